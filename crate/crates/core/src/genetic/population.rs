//! Sub-populations with cached distances and biased fitness.

use rand::prelude::*;

use crate::instance::Instance;
use crate::solution::{adjacency, adjacency_distance, is_feasible, Solution, Violation};

/// Distances at or below this count as clones.
const CLONE_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Individual {
    pub sol: Solution,
    pub adj: Vec<[usize; 2]>,
    pub feasible: bool,
    /// Capacity feasibility first, then one flag per group.
    pub constraint_flags: Vec<bool>,
}

impl Individual {
    pub fn new(sol: Solution, inst: &Instance) -> Self {
        let report = is_feasible(&sol, inst);
        let mut flags = vec![true; 1 + inst.group_count()];
        for v in &report.violations {
            match v {
                Violation::Capacity { .. } => flags[0] = false,
                Violation::ServiceLevel { group, .. } => flags[*group] = false,
                _ => {}
            }
        }
        Individual {
            adj: adjacency(&sol, inst.n()),
            feasible: report.feasible(),
            constraint_flags: flags,
            sol,
        }
    }

    pub fn cost(&self) -> f64 {
        self.sol.cost
    }
}

/// 1-based competition ranks (ties share the smallest rank) of `values`,
/// ascending.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            out[k] = (i + 1) as f64;
        }
        i = j + 1;
    }
    out
}

/// `R(cost) + (1 - n_elite/|P|) R(div)`, with cost ranked ascending and
/// diversity contribution ranked descending (most diverse = rank 1).
pub fn biased_fitness(costs: &[f64], diversity: &[f64], n_elite: usize) -> Vec<f64> {
    let size = costs.len();
    if size == 0 {
        return Vec::new();
    }
    let rc = ranks(costs);
    let neg: Vec<f64> = diversity.iter().map(|d| -d).collect();
    let rd = ranks(&neg);
    let factor = 1.0 - n_elite as f64 / size as f64;
    rc.iter().zip(&rd).map(|(c, d)| c + factor * d).collect()
}

#[derive(Debug, Clone, Default)]
pub struct SubPopulation {
    members: Vec<Individual>,
    dist: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    stale: bool,
}

impl SubPopulation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &Individual {
        &self.members[i]
    }

    /// Cached distance between members `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    /// Adds an individual, computing its distance to every member.
    pub fn push(&mut self, ind: Individual) {
        let row: Vec<f64> = self
            .members
            .iter()
            .map(|m| adjacency_distance(&m.adj, &ind.adj))
            .collect();
        for (r, &d) in self.dist.iter_mut().zip(&row) {
            r.push(d);
        }
        let mut row = row;
        row.push(0.0);
        self.dist.push(row);
        self.members.push(ind);
        self.stale = true;
    }

    pub fn remove(&mut self, i: usize) -> Individual {
        self.dist.remove(i);
        for r in &mut self.dist {
            r.remove(i);
        }
        self.stale = true;
        self.members.remove(i)
    }

    /// Mean distance to the `n_close` closest other members.
    pub fn diversity(&self, i: usize, n_close: usize) -> f64 {
        self.diversity_into(i, n_close, &mut Vec::new())
    }

    fn diversity_into(&self, i: usize, n_close: usize, d: &mut Vec<f64>) -> f64 {
        d.clear();
        d.extend((0..self.len()).filter(|&j| j != i).map(|j| self.dist[i][j]));
        if d.is_empty() {
            return 0.0;
        }
        let k = n_close.min(d.len()).max(1);
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
        }
        d[..k].iter().sum::<f64>() / k as f64
    }

    pub fn update_fitness(&mut self, n_elite: usize, n_close: usize) {
        if !self.stale && self.fitness.len() == self.len() {
            return;
        }
        let costs: Vec<f64> = self.members.iter().map(|m| m.cost()).collect();
        let mut buf = Vec::with_capacity(self.len());
        let div: Vec<f64> = (0..self.len()).map(|i| self.diversity_into(i, n_close, &mut buf)).collect();
        self.fitness = biased_fitness(&costs, &div, n_elite);
        self.stale = false;
    }

    /// Biased fitness of every member; call `update_fitness` first.
    pub fn fitness(&self) -> &[f64] {
        assert!(!self.stale, "fitness is stale");
        &self.fitness
    }

    pub fn mark_stale(&mut self) {
        self.stale = true;
    }

    fn is_clone(&self, i: usize) -> bool {
        (0..self.len()).any(|j| j != i && self.dist[i][j] <= CLONE_EPS)
    }

    /// Index removed next: the worst-fitness clone if there is one, else the
    /// worst fitness overall (ties go to the higher cost).
    pub fn victim(&mut self, n_elite: usize, n_close: usize) -> usize {
        self.update_fitness(n_elite, n_close);
        let worse = |a: usize, b: usize| {
            self.fitness[a]
                .total_cmp(&self.fitness[b])
                .then(self.members[a].cost().total_cmp(&self.members[b].cost()))
                .then(a.cmp(&b))
        };
        let clones: Vec<usize> = (0..self.len()).filter(|&i| self.is_clone(i)).collect();
        let pool: Vec<usize> = if clones.is_empty() { (0..self.len()).collect() } else { clones };
        pool.into_iter().max_by(|&a, &b| worse(a, b)).unwrap()
    }

    /// Removes members one at a time until `target` remain.
    pub fn reduce_to(&mut self, target: usize, n_elite: usize, n_close: usize) {
        while self.len() > target {
            let v = self.victim(n_elite, n_close);
            self.remove(v);
        }
        self.update_fitness(n_elite, n_close);
    }

    pub fn best_by_cost(&self) -> Option<&Individual> {
        self.members.iter().min_by(|a, b| a.cost().total_cmp(&b.cost()))
    }

    pub fn members_mut_for_rescore(&mut self) -> impl Iterator<Item = &mut Individual> {
        self.stale = true;
        self.members.iter_mut()
    }
}

/// Feasible and infeasible sub-populations.
#[derive(Debug, Clone)]
pub struct Population {
    pub feasible: SubPopulation,
    pub infeasible: SubPopulation,
    pub mu: usize,
    pub lambda: usize,
    pub n_elite: usize,
    pub n_close: usize,
}

impl Population {
    pub fn new(mu: usize, lambda: usize, n_elite: usize, n_close: usize) -> Self {
        Population {
            feasible: SubPopulation::new(),
            infeasible: SubPopulation::new(),
            mu,
            lambda,
            n_elite,
            n_close,
        }
    }

    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts into the matching sub-population. Once it reaches `μ + λ`
    /// members it is culled back to `μ`. Returns the size reached before
    /// culling.
    pub fn insert(&mut self, ind: Individual) -> usize {
        let (mu, lambda, ne, nc) = (self.mu, self.lambda, self.n_elite, self.n_close);
        let sub = if ind.feasible { &mut self.feasible } else { &mut self.infeasible };
        sub.push(ind);
        let reached = sub.len();
        if reached >= mu + lambda {
            sub.reduce_to(mu, ne, nc);
        }
        reached
    }

    fn refresh(&mut self) {
        let (ne, nc) = (self.n_elite, self.n_close);
        if self.feasible.stale {
            self.feasible.update_fitness(ne, nc);
        }
        if self.infeasible.stale {
            self.infeasible.update_fitness(ne, nc);
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (bool, usize) {
        let i = rng.gen_range(0..self.len());
        if i < self.feasible.len() {
            (true, i)
        } else {
            (false, i - self.feasible.len())
        }
    }

    fn fitness_of(&self, (feasible, i): (bool, usize)) -> f64 {
        if feasible {
            self.feasible.fitness[i]
        } else {
            self.infeasible.fitness[i]
        }
    }

    fn individual(&self, (feasible, i): (bool, usize)) -> &Individual {
        if feasible {
            self.feasible.get(i)
        } else {
            self.infeasible.get(i)
        }
    }

    /// Binary tournament on biased fitness over both sub-populations.
    pub fn tournament<R: Rng>(&mut self, rng: &mut R) -> &Individual {
        assert!(!self.is_empty(), "tournament on an empty population");
        self.refresh();
        let a = self.draw(rng);
        let b = self.draw(rng);
        let pick = if self.fitness_of(b) < self.fitness_of(a) { b } else { a };
        self.individual(pick)
    }

    /// Two parents drawn independently.
    pub fn select_parents<R: Rng>(&mut self, rng: &mut R) -> (Individual, Individual) {
        let p1 = self.tournament(rng).clone();
        let p2 = self.tournament(rng).clone();
        (p1, p2)
    }

    /// Keeps the best `keep` members of each sub-population.
    pub fn truncate(&mut self, keep: usize) {
        let (ne, nc) = (self.n_elite, self.n_close);
        self.feasible.reduce_to(keep, ne, nc);
        self.infeasible.reduce_to(keep, ne, nc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::testutil::simple;
    use crate::solution::PenaltyState;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn competition_ranks() {
        assert_eq!(ranks(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.0, 3.0, 1.0]);
    }

    #[test]
    fn biased_fitness_examples() {
        assert_eq!(biased_fitness(&[5.0], &[0.0], 10), vec![1.0 - 9.0]);
        // cost ranks (1,2,3), diversity ranks (3,1,2) with n_elite = 1
        let f = biased_fitness(&[1.0, 2.0, 3.0], &[0.1, 0.9, 0.5], 1);
        let expect = [3.0, 2.0 + 2.0 / 3.0, 3.0 + 4.0 / 3.0];
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn line(n: usize) -> crate::Instance {
        let coords: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 * 3.0, (i % 3) as f64]).collect();
        simple(&coords, &vec![1.0; n], &vec![5.0; n], 0.0, n, 100.0)
    }

    fn ind(inst: &crate::Instance, routes: Vec<Vec<usize>>) -> Individual {
        Individual::new(Solution::from_routes(routes, inst, &PenaltyState::new(1)), inst)
    }

    #[test]
    fn clone_goes_first() {
        let inst = line(6);
        let mut sub = SubPopulation::new();
        sub.push(ind(&inst, vec![vec![1, 2, 3]]));
        sub.push(ind(&inst, vec![vec![4, 5, 6]]));
        sub.push(ind(&inst, vec![vec![1], vec![2]]));
        sub.push(ind(&inst, vec![vec![3, 2, 1]]));
        let v = sub.victim(1, 5);
        assert!(v == 0 || v == 3);
    }

    #[test]
    fn cull_to_mu_and_keep_best() {
        let inst = line(8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pop = Population::new(4, 3, 2, 2);
        let mut best = f64::INFINITY;
        for _ in 0..40 {
            let mut tour: Vec<usize> = (1..=8).filter(|_| rng.gen_bool(0.6)).collect();
            tour.shuffle(&mut rng);
            let cut = rng.gen_range(0..=tour.len());
            let i = ind(&inst, vec![tour[..cut].to_vec(), tour[cut..].to_vec()]);
            best = best.min(i.cost());
            let reached = pop.insert(i);
            assert!(reached <= 7);
            assert!(pop.feasible.len() <= 6);
            let kept = pop.feasible.best_by_cost().unwrap().cost();
            assert_eq!(kept, best);
        }
    }

    #[test]
    fn tournament_prefers_best_fitness() {
        let inst = line(8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pop = Population::new(50, 50, 1, 2);
        for k in 1..=8 {
            pop.insert(ind(&inst, vec![(1..=k).collect()]));
        }
        pop.refresh();
        let fit = pop.feasible.fitness().to_vec();
        let best = (0..fit.len()).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap();
        let best_cost = pop.feasible.get(best).cost();
        let trials = 10_000;
        let hits = (0..trials).filter(|_| pop.tournament(&mut rng).cost() == best_cost).count();
        // uniform would give 1/8; a binary tournament gives 1 - (7/8)^2
        assert!(hits as f64 / trials as f64 > 0.2, "{hits}");
    }

    #[test]
    fn singleton_tournament() {
        let inst = line(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pop = Population::new(5, 5, 1, 2);
        pop.insert(ind(&inst, vec![vec![1, 2]]));
        let (a, b) = pop.select_parents(&mut rng);
        assert_eq!(a.sol, b.sol);
    }
}
