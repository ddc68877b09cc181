//! Hybrid genetic search driver.
//!
//! Two sub-populations (feasible and infeasible) evolve by binary-tournament
//! selection, order crossover with service-level targets, Split decoding and
//! local search. Penalties on capacity and service levels adapt to keep a
//! fixed share of educated individuals feasible.

mod crossover;
mod penalty;
mod population;

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::instance::Instance;
use crate::localsearch::{LocalSearch, DEFAULT_GRANULARITY};
use crate::solution::{split, PenaltyState, Solution};

pub use crossover::{aox_with, crossover_aox};
pub use penalty::{adapt, adapt_penalties, feasibility_targets, FeasibilityWindow, DECREASE, INCREASE};
pub use population::{biased_fitness, ranks, Individual, Population, SubPopulation};

/// Feasible improvements smaller than this do not reset the patience counter.
const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub mu: usize,
    pub lambda: usize,
    pub n_elite: usize,
    pub n_close: usize,
    /// Consecutive iterations without improvement before stopping.
    pub it_ni: u64,
    /// Non-improving iterations between diversifications.
    pub it_div: u64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub penalty_window: usize,
    pub repair_prob: f64,
    /// Initial population size as a multiple of `mu`.
    pub init_multiplier: usize,
    pub granularity: usize,
    pub time_limit: Option<Duration>,
    pub max_iterations: Option<u64>,
}

impl Default for SearchParams {
    fn default() -> Self {
        let (xi_min, xi_max) = feasibility_targets(1);
        SearchParams {
            mu: 25,
            lambda: 40,
            n_elite: 10,
            n_close: 5,
            it_ni: 20_000,
            it_div: 8_000,
            xi_min,
            xi_max,
            penalty_window: 100,
            repair_prob: 0.5,
            init_multiplier: 4,
            granularity: DEFAULT_GRANULARITY,
            time_limit: None,
            max_iterations: None,
        }
    }
}

impl SearchParams {
    /// Defaults with feasibility targets for the instance's group count.
    /// Population sizes are halved from 200 customers on.
    pub fn for_instance(inst: &Instance) -> Self {
        let (xi_min, xi_max) = feasibility_targets(inst.group_count());
        let mut p = SearchParams { xi_min, xi_max, ..Self::default() };
        if inst.n() >= 200 {
            p.n_elite = 5;
            p.mu = 12;
            p.lambda = 20;
        }
        p
    }

    /// Sets the patience and keeps the diversification period at 40% of it.
    pub fn with_it_ni(mut self, it_ni: u64) -> Self {
        self.it_ni = it_ni;
        self.it_div = (it_ni * 2 / 5).max(1);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.xi_min && self.xi_min < self.xi_max && self.xi_max < 1.0) {
            return Err(format!("need 0 < xi_min < xi_max < 1, got {} and {}", self.xi_min, self.xi_max));
        }
        if self.it_div >= self.it_ni {
            return Err(format!("it_div ({}) must be below it_ni ({})", self.it_div, self.it_ni));
        }
        if self.mu == 0 || self.lambda == 0 {
            return Err("mu and lambda must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.repair_prob) {
            return Err(format!("repair probability {} outside [0, 1]", self.repair_prob));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogEvent {
    Initialized,
    PenaltyUpdate,
    Diversification,
    Finished,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogEntry {
    pub iteration: u64,
    pub elapsed_secs: f64,
    pub event: LogEvent,
    pub best_feasible: Option<f64>,
    /// Capacity penalty first, then one per group.
    pub penalties: Vec<f64>,
    pub feasibility_ratios: Vec<f64>,
    pub feasible_size: usize,
    pub infeasible_size: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunStats {
    pub initial_generated: usize,
    pub diversifications: usize,
    /// Largest sub-population sizes observed right after an insertion.
    pub max_feasible_size: usize,
    pub max_infeasible_size: usize,
    /// `(iteration, objective)` each time the feasible incumbent improved.
    pub incumbent_history: Vec<(u64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Best feasible solution, or the best infeasible one if none was found.
    pub best: Solution,
    pub feasible: bool,
    pub iterations: u64,
    pub elapsed: Duration,
    pub penalties: PenaltyState,
    pub log: Vec<LogEntry>,
    pub stats: RunStats,
}

/// Runs the search from `seed`. Costs of the returned solution are the
/// unpenalized objective when feasible.
pub fn run(inst: &Instance, params: &SearchParams, seed: u64) -> RunOutcome {
    Search::new(inst, params, seed).run()
}

/// Random customer subset meeting every group threshold: each customer is
/// drawn with probability `max(α_k, 1/2)`, then deficient groups are topped
/// up with their unselected customers in increasing demand/weight order.
pub fn random_selection<R: Rng>(inst: &Instance, rng: &mut R) -> Vec<usize> {
    let mut chosen = vec![false; inst.n() + 1];
    let mut tour = Vec::new();
    for k in 0..inst.group_count() {
        let prob = inst.service_level(k).clamp(0.5, 1.0);
        let mut delivered = 0.0;
        for &c in inst.group(k) {
            if rng.gen_bool(prob) {
                chosen[c] = true;
                tour.push(c);
                delivered += inst.weight(c);
            }
        }
        if inst.shortfall(k, delivered) > 0.0 {
            let mut rest: Vec<(f64, f64, usize)> = inst
                .group(k)
                .iter()
                .filter(|&&c| !chosen[c])
                .map(|&c| {
                    let ratio = if inst.weight(c) > 0.0 { inst.demand(c) / inst.weight(c) } else { f64::INFINITY };
                    (ratio, rng.gen::<f64>(), c)
                })
                .collect();
            rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            for (_, _, c) in rest {
                if inst.shortfall(k, delivered) <= 0.0 {
                    break;
                }
                chosen[c] = true;
                tour.push(c);
                delivered += inst.weight(c);
            }
        }
    }
    tour.shuffle(rng);
    tour
}

struct Search<'a> {
    inst: &'a Instance,
    params: SearchParams,
    rng: ChaCha8Rng,
    ls: LocalSearch<'a>,
    pen: PenaltyState,
    pop: Population,
    window: FeasibilityWindow,
    best_feasible: Option<Solution>,
    best_infeasible: Option<Solution>,
    start: Instant,
    log: Vec<LogEntry>,
    stats: RunStats,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, params: &SearchParams, seed: u64) -> Self {
        let p = params.clone();
        Search {
            inst,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ls: LocalSearch::new(inst, p.granularity),
            pen: PenaltyState::new(inst.group_count()),
            pop: Population::new(p.mu, p.lambda, p.n_elite, p.n_close),
            window: FeasibilityWindow::new(p.penalty_window),
            best_feasible: None,
            best_infeasible: None,
            start: Instant::now(),
            log: Vec::new(),
            stats: RunStats::default(),
            params: p,
        }
    }

    fn out_of_time(&self) -> bool {
        self.params.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    /// Builds, educates and inserts a random individual.
    fn random_individual(&mut self) -> bool {
        let tour = random_selection(self.inst, &mut self.rng);
        let sol = split(&tour, self.inst, &self.pen);
        let sol = self.ls.educate(&sol, &self.pen, &mut self.rng);
        self.insert(sol)
    }

    /// Inserts and tracks the incumbents; true when the feasible incumbent
    /// improved.
    fn insert(&mut self, sol: Solution) -> bool {
        let ind = Individual::new(sol, self.inst);
        let mut improved = false;
        if ind.feasible {
            let obj = ind.sol.objective(self.inst);
            let better = match &self.best_feasible {
                None => true,
                Some(b) => obj < b.objective(self.inst) - IMPROVEMENT_TOL,
            };
            if better {
                let mut best = ind.sol.clone();
                best.cost = obj;
                self.best_feasible = Some(best);
                improved = true;
            }
        } else {
            let better = self.best_infeasible.as_ref().is_none_or(|b| ind.sol.cost < b.cost);
            if better {
                self.best_infeasible = Some(ind.sol.clone());
            }
        }
        let feasible = ind.feasible;
        let reached = self.pop.insert(ind);
        if feasible {
            self.stats.max_feasible_size = self.stats.max_feasible_size.max(reached);
        } else {
            self.stats.max_infeasible_size = self.stats.max_infeasible_size.max(reached);
        }
        improved
    }

    fn record_improvement(&mut self, iteration: u64) {
        if let Some(b) = &self.best_feasible {
            self.stats.incumbent_history.push((iteration, b.cost));
        }
    }

    fn push_log(&mut self, iteration: u64, event: LogEvent) {
        let constraints = 1 + self.inst.group_count();
        log::debug!(
            "it {iteration} {event:?}: best {:?}, penalties {:?}, sizes {}/{}",
            self.best_feasible.as_ref().map(|b| b.cost),
            self.pen.as_vec(),
            self.pop.feasible.len(),
            self.pop.infeasible.len()
        );
        self.log.push(LogEntry {
            iteration,
            elapsed_secs: self.start.elapsed().as_secs_f64(),
            event,
            best_feasible: self.best_feasible.as_ref().map(|b| b.cost),
            penalties: self.pen.as_vec(),
            feasibility_ratios: self.window.ratios(constraints),
            feasible_size: self.pop.feasible.len(),
            infeasible_size: self.pop.infeasible.len(),
        });
    }

    fn initialize(&mut self) {
        let target = self.params.init_multiplier * self.params.mu;
        for _ in 0..target {
            if self.out_of_time() && self.stats.initial_generated > 0 {
                break;
            }
            if self.random_individual() {
                self.record_improvement(0);
            }
            self.stats.initial_generated += 1;
        }
        self.push_log(0, LogEvent::Initialized);
    }

    fn update_penalties(&mut self) {
        let ratios = self.window.ratios(1 + self.inst.group_count());
        self.pen = adapt_penalties(&self.pen, &ratios, self.params.xi_min, self.params.xi_max);
        let (inst, pen) = (self.inst, &self.pen);
        for ind in self.pop.infeasible.members_mut_for_rescore() {
            ind.sol.evaluate(inst, pen);
        }
        for ind in self.pop.feasible.members_mut_for_rescore() {
            ind.sol.evaluate(inst, pen);
        }
    }

    fn diversify(&mut self) {
        let keep = self.params.mu / 3;
        self.pop.truncate(keep);
        let mu = self.params.mu;
        let mut budget = self.params.init_multiplier * mu;
        while budget > 0 && (self.pop.feasible.len() < mu || self.pop.infeasible.len() < mu) {
            if self.out_of_time() {
                break;
            }
            budget -= 1;
            let tour = random_selection(self.inst, &mut self.rng);
            let sol = split(&tour, self.inst, &self.pen);
            let sol = self.ls.educate(&sol, &self.pen, &mut self.rng);
            let ind = Individual::new(sol, self.inst);
            let room = if ind.feasible { self.pop.feasible.len() } else { self.pop.infeasible.len() };
            if room < mu {
                self.insert(ind.sol);
            }
        }
        self.stats.diversifications += 1;
    }

    fn run(mut self) -> RunOutcome {
        self.initialize();
        let mut iteration: u64 = 0;
        let mut last_improvement: u64 = 0;
        let mut last_diversification: u64 = 0;
        let mut pen_counter = 0usize;
        loop {
            if iteration - last_improvement >= self.params.it_ni
                || self.params.max_iterations.is_some_and(|m| iteration >= m)
                || self.out_of_time()
                || self.pop.is_empty()
            {
                break;
            }
            iteration += 1;
            let (p1, p2) = self.pop.select_parents(&mut self.rng);
            let tour = crossover_aox(
                &p1.sol.giant_tour,
                &p1.sol.levels,
                &p2.sol.giant_tour,
                &p2.sol.levels,
                self.inst,
                &mut self.rng,
            );
            let child = split(&tour, self.inst, &self.pen);
            let child = self.ls.educate(&child, &self.pen, &mut self.rng);
            let flags = Individual::new(child.clone(), self.inst);
            self.window.push(flags.constraint_flags.clone());
            let mut improved = self.insert(child.clone());
            if !flags.feasible && self.rng.gen_bool(self.params.repair_prob) {
                let repaired = self.ls.repair(&child, &self.pen, &mut self.rng);
                improved |= self.insert(repaired);
            }
            if improved {
                last_improvement = iteration;
                self.record_improvement(iteration);
            }
            pen_counter += 1;
            if pen_counter == self.params.penalty_window {
                pen_counter = 0;
                self.update_penalties();
                self.push_log(iteration, LogEvent::PenaltyUpdate);
            }
            if iteration - last_improvement.max(last_diversification) >= self.params.it_div {
                self.diversify();
                last_diversification = iteration;
                self.push_log(iteration, LogEvent::Diversification);
            }
        }
        self.push_log(iteration, LogEvent::Finished);
        let (best, feasible) = match (self.best_feasible.take(), self.best_infeasible.take()) {
            (Some(b), _) => (b, true),
            (None, Some(b)) => (b, false),
            (None, None) => (Solution::empty(self.inst, &self.pen), false),
        };
        RunOutcome {
            best,
            feasible,
            iterations: iteration,
            elapsed: self.start.elapsed(),
            penalties: self.pen,
            log: self.log,
            stats: self.stats,
        }
    }
}
