//! Forward labeling over load levels.

use super::{edge_reduced_cost, integer_demands, DualVector, NgConfig, PricedRoute, PricingError, NEGATIVE_THRESHOLD};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelingOptions {
    /// Discard labels dominated in cost, load and memory.
    pub dominance: bool,
    /// Keep only the cheapest label per (vertex, load) instead.
    pub heuristic: bool,
}

impl Default for LabelingOptions {
    fn default() -> Self {
        LabelingOptions { dominance: true, heuristic: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PricingResult {
    /// Walks with reduced cost below the threshold, cheapest first.
    pub routes: Vec<PricedRoute>,
    /// Cheapest completed walk, negative or not.
    pub best: Option<PricedRoute>,
    pub labels_created: usize,
}

impl PricingResult {
    pub fn min_reduced_cost(&self) -> Option<f64> {
        self.best.as_ref().map(|r| r.reduced_cost)
    }
}

/// Exact ng-route labeling with dominance.
pub fn price_ng(inst: &Instance, duals: &DualVector, ng: &NgConfig) -> Result<PricingResult, PricingError> {
    price_with(inst, duals, ng, LabelingOptions::default())
}

/// Keeps one label per (vertex, load): fast, no optimality guarantee.
pub fn price_heuristic(inst: &Instance, duals: &DualVector, ng: &NgConfig) -> Result<PricingResult, PricingError> {
    price_with(inst, duals, ng, LabelingOptions { dominance: false, heuristic: true })
}

struct Label {
    last: usize,
    rcost: f64,
    load: u64,
    parent: Option<usize>,
    alive: bool,
}

struct Arena {
    words: usize,
    labels: Vec<Label>,
    mems: Vec<u64>,
}

impl Arena {
    fn mem(&self, l: usize) -> &[u64] {
        &self.mems[l * self.words..(l + 1) * self.words]
    }

    fn remembers(&self, l: usize, c: usize) -> bool {
        self.mem(l)[c / 64] >> (c % 64) & 1 == 1
    }

    fn push(&mut self, label: Label, mem: &[u64]) -> usize {
        self.labels.push(label);
        self.mems.extend_from_slice(mem);
        self.labels.len() - 1
    }

    /// `a` dominates `b`: same vertex assumed, no worse in cost and load,
    /// and remembers a subset.
    fn dominates(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (&self.labels[a], &self.labels[b]);
        la.rcost <= lb.rcost
            && la.load <= lb.load
            && self.mem(a).iter().zip(self.mem(b)).all(|(x, y)| x & !y == 0)
    }

    fn path(&self, mut l: usize) -> Vec<usize> {
        let mut out = Vec::new();
        loop {
            let lab = &self.labels[l];
            if lab.last == 0 {
                break;
            }
            out.push(lab.last);
            match lab.parent {
                Some(p) => l = p,
                None => break,
            }
        }
        out.reverse();
        out
    }
}

pub fn price_with(
    inst: &Instance,
    duals: &DualVector,
    ng: &NgConfig,
    opts: LabelingOptions,
) -> Result<PricingResult, PricingError> {
    duals.validate(inst)?;
    let demand = integer_demands(inst)?;
    let n = inst.n();
    let cap = inst.capacity().floor().max(0.0) as u64;
    let words = (n + 1).div_ceil(64);
    let mut ng_mask = vec![0u64; (n + 1) * words];
    for j in inst.customers() {
        for &i in &ng.ng_sets[j] {
            ng_mask[j * words + i / 64] |= 1 << (i % 64);
        }
        ng_mask[j * words + j / 64] |= 1 << (j % 64);
    }
    let rc: Vec<f64> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .map(|(i, j)| edge_reduced_cost(inst, i, j, duals))
        .collect();

    let mut arena = Arena { words, labels: Vec::new(), mems: Vec::new() };
    let root = arena.push(Label { last: 0, rcost: 0.0, load: 0, parent: None, alive: true }, &vec![0; words]);
    let mut by_load: Vec<Vec<usize>> = vec![Vec::new(); cap as usize + 1];
    by_load[0].push(root);
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut cell: Vec<Option<usize>> = if opts.heuristic { vec![None; (n + 1) * (cap as usize + 1)] } else { Vec::new() };

    let mut result = PricingResult::default();
    let mut scratch = vec![0u64; words];
    for level in 0..=cap as usize {
        let mut idx = 0;
        while idx < by_load[level].len() {
            let l = by_load[level][idx];
            idx += 1;
            if !arena.labels[l].alive {
                continue;
            }
            let (v, rcost, load) = (arena.labels[l].last, arena.labels[l].rcost, arena.labels[l].load);
            if v != 0 {
                let total = rcost + rc[v * (n + 1)];
                let better = result.best.as_ref().is_none_or(|b| total < b.reduced_cost);
                if total < NEGATIVE_THRESHOLD || better {
                    let route = PricedRoute { visits: arena.path(l), reduced_cost: total, load };
                    if better {
                        result.best = Some(route.clone());
                    }
                    if total < NEGATIVE_THRESHOLD {
                        result.routes.push(route);
                    }
                }
            }
            for j in 1..=n {
                let new_load = load + demand[j];
                if new_load > cap || arena.remembers(l, j) {
                    continue;
                }
                let mask = &ng_mask[j * words..(j + 1) * words];
                for (w, s) in scratch.iter_mut().enumerate() {
                    *s = arena.mem(l)[w] & mask[w];
                }
                scratch[j / 64] |= 1 << (j % 64);
                let new_cost = rcost + rc[v * (n + 1) + j];
                let slot = j * (cap as usize + 1) + new_load as usize;
                if opts.heuristic {
                    if let Some(old) = cell[slot] {
                        if arena.labels[old].rcost <= new_cost {
                            continue;
                        }
                        arena.labels[old].alive = false;
                    }
                }
                let id = arena.push(
                    Label { last: j, rcost: new_cost, load: new_load, parent: Some(l), alive: true },
                    &scratch,
                );
                result.labels_created += 1;
                if opts.heuristic {
                    cell[slot] = Some(id);
                } else if opts.dominance {
                    if at_vertex[j].iter().any(|&o| arena.dominates(o, id)) {
                        arena.labels[id].alive = false;
                        continue;
                    }
                    for &o in &at_vertex[j] {
                        if arena.dominates(id, o) {
                            arena.labels[o].alive = false;
                        }
                    }
                    at_vertex[j].retain(|&o| arena.labels[o].alive);
                    at_vertex[j].push(id);
                }
                by_load[new_load as usize].push(id);
            }
        }
    }
    result.routes.sort_by(|a, b| a.reduced_cost.total_cmp(&b.reduced_cost));
    Ok(result)
}
