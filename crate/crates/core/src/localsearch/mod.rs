//! Education and repair of solutions by granular first-improvement search.
//!
//! Route neighborhoods (2-opt, 2-opt*, swaps, relocations) are combined with
//! customer-selection moves (remove, add, replace). Candidate pairs `(u, v)`
//! are limited to each customer's nearest neighbors.

mod moves;

pub use moves::{Anchor, Move, MoveKind};

use rand::prelude::*;

use crate::instance::Instance;
use crate::solution::{is_feasible, PenaltyState, Solution};
use moves::State;

/// A move is applied only if it lowers the cost by more than this.
pub const IMPROVEMENT_EPS: f64 = 1e-6;
pub const DEFAULT_GRANULARITY: usize = 20;

/// `min(granularity, n - 1)` nearest customers of every customer, closest
/// first, ties by index.
pub fn neighbor_lists(inst: &Instance, granularity: usize) -> Vec<Vec<usize>> {
    let n = inst.n();
    let size = granularity.min(n.saturating_sub(1));
    let mut lists = vec![Vec::new(); n + 1];
    for u in 1..=n {
        let mut others: Vec<usize> = (1..=n).filter(|&v| v != u).collect();
        others.sort_by(|&a, &b| inst.d(u, a).total_cmp(&inst.d(u, b)).then(a.cmp(&b)));
        others.truncate(size);
        lists[u] = others;
    }
    lists
}

/// Reusable local search bound to an instance.
#[derive(Debug, Clone)]
pub struct LocalSearch<'a> {
    inst: &'a Instance,
    neighbors: Vec<Vec<usize>>,
    order: Vec<usize>,
    buffer: Vec<Move>,
}

impl<'a> LocalSearch<'a> {
    pub fn new(inst: &'a Instance, granularity: usize) -> Self {
        LocalSearch {
            inst,
            neighbors: neighbor_lists(inst, granularity),
            order: (1..=inst.n()).collect(),
            buffer: Vec::new(),
        }
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Runs passes over all customers in random order, applying the first
    /// improving move found, until a full pass brings no improvement.
    ///
    /// Moves between `u` and a neighbor are skipped when neither route changed
    /// since `u` was last scanned without success; selection moves are also
    /// re-examined whenever the delivered service weights changed.
    pub fn educate<R: Rng>(&mut self, sol: &Solution, pen: &PenaltyState, rng: &mut R) -> Solution {
        let mut st = State::new(sol, self.inst, pen);
        for list in self.neighbors.iter_mut() {
            list.shuffle(rng);
        }
        let mut buffer = std::mem::take(&mut self.buffer);
        let mut clock: u64 = 1;
        let mut route_stamp = vec![1u64; st.routes.len()];
        let mut service_stamp: u64 = 1;
        let mut tested = vec![0u64; self.inst.n() + 1];
        loop {
            self.order.shuffle(rng);
            let mut improved = false;
            for idx in 0..self.order.len() {
                let u = self.order[idx];
                'rescan: loop {
                    buffer.clear();
                    let fresh = Freshness {
                        since: tested[u],
                        routes: &route_stamp,
                        service: service_stamp,
                    };
                    candidates_for(&st, u, &self.neighbors[u], &fresh, &mut buffer);
                    for mv in &buffer {
                        if let Some(delta) = st.delta(mv) {
                            if delta < -IMPROVEMENT_EPS {
                                clock += 1;
                                for r in st.apply(mv).into_iter().flatten() {
                                    route_stamp[r] = clock;
                                }
                                if let Move::Remove { .. } | Move::Add { .. } | Move::Replace { .. } = mv {
                                    service_stamp = clock;
                                }
                                improved = true;
                                continue 'rescan;
                            }
                        }
                    }
                    tested[u] = clock;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        self.buffer = buffer;
        st.to_solution()
    }

    /// Educates with all penalties ×10, then ×100 if still infeasible. The
    /// result is evaluated under the original penalties.
    pub fn repair<R: Rng>(&mut self, sol: &Solution, pen: &PenaltyState, rng: &mut R) -> Solution {
        let mut out = self.educate(sol, &pen.scaled(10.0), rng);
        if !is_feasible(&out, self.inst).feasible() {
            out = self.educate(&out, &pen.scaled(100.0), rng);
        }
        out.evaluate(self.inst, pen);
        out
    }
}

/// Modification times used to skip moves already known not to improve.
struct Freshness<'a> {
    /// Clock value when the customer was last scanned without success.
    since: u64,
    routes: &'a [u64],
    service: u64,
}

impl Freshness<'_> {
    const ALL: Freshness<'static> = Freshness { since: 0, routes: &[], service: u64::MAX };

    fn route_changed(&self, r: usize) -> bool {
        self.routes.get(r).is_none_or(|&t| t > self.since)
    }

    fn service_changed(&self) -> bool {
        self.service > self.since
    }
}

/// Every candidate move for customer `u`: route moves with its neighbors,
/// selection moves with unvisited neighbors, its removal, and moves opening
/// an empty route. Moves whose inputs did not change since the last scan of
/// `u` are left out.
fn candidates_for(st: &State, u: usize, neighbors: &[usize], fresh: &Freshness, out: &mut Vec<Move>) {
    if !st.visited(u) {
        if let Some(r) = st.empty_slot() {
            out.push(Move::Add { v: u, to: Anchor::RouteStart(r) });
        }
        return;
    }
    let ru = st.route_of[u];
    let u_first = st.pos_of[u] == 0;
    let ru_changed = fresh.route_changed(ru);
    let selection = ru_changed || fresh.service_changed();
    for &v in neighbors {
        if st.visited(v) {
            let rv = st.route_of[v];
            if !ru_changed && !fresh.route_changed(rv) {
                continue;
            }
            out.push(Move::Relocate1 { u, to: Anchor::After(v) });
            out.push(Move::Relocate2 { u, to: Anchor::After(v) });
            if st.pos_of[v] == 0 {
                out.push(Move::Relocate1 { u, to: Anchor::RouteStart(rv) });
                out.push(Move::Relocate2 { u, to: Anchor::RouteStart(rv) });
            }
            out.push(Move::Swap11 { u, v });
            out.push(Move::Swap21 { u, v });
            out.push(Move::Swap22 { u, v });
            if ru == rv {
                out.push(Move::TwoOpt { u, v });
            } else {
                out.push(Move::TwoOptStar { u, v });
            }
        } else if selection {
            out.push(Move::Add { v, to: Anchor::After(u) });
            if u_first {
                out.push(Move::Add { v, to: Anchor::RouteStart(ru) });
            }
            out.push(Move::Replace { u, v });
        }
    }
    if selection {
        out.push(Move::Remove { u });
    }
    if ru_changed {
        if let Some(r) = st.empty_slot() {
            out.push(Move::Relocate1 { u, to: Anchor::RouteStart(r) });
        }
    }
}

/// Educates `sol` with neighbor lists of size `granularity`.
pub fn educate<R: Rng>(
    sol: &Solution,
    inst: &Instance,
    pen: &PenaltyState,
    rng: &mut R,
    granularity: usize,
) -> Solution {
    LocalSearch::new(inst, granularity).educate(sol, pen, rng)
}

pub fn repair<R: Rng>(
    sol: &Solution,
    inst: &Instance,
    pen: &PenaltyState,
    rng: &mut R,
    granularity: usize,
) -> Solution {
    LocalSearch::new(inst, granularity).repair(sol, pen, rng)
}

/// Cost change of `mv` on `sol`, or `None` if the move does not apply.
/// Route slots are the routes of `sol` followed by empty slots up to the
/// fleet size.
pub fn delta_cost(mv: &Move, sol: &Solution, inst: &Instance, pen: &PenaltyState) -> Option<f64> {
    State::new(sol, inst, pen).delta(mv)
}

/// Applies `mv` to `sol`. Panics if the move does not apply.
pub fn apply(mv: &Move, sol: &Solution, inst: &Instance, pen: &PenaltyState) -> Solution {
    let mut st = State::new(sol, inst, pen);
    assert!(st.delta(mv).is_some(), "move {mv:?} does not apply");
    st.apply(mv);
    st.to_solution()
}

/// All moves the search would examine on `sol`, over every customer.
pub fn candidate_moves(sol: &Solution, inst: &Instance, granularity: usize) -> Vec<Move> {
    let pen = PenaltyState::new(inst.group_count());
    let st = State::new(sol, inst, &pen);
    let lists = neighbor_lists(inst, granularity);
    let mut out = Vec::new();
    for u in 1..=inst.n() {
        candidates_for(&st, u, &lists[u], &Freshness::ALL, &mut out);
    }
    out.retain(|mv| st.delta(mv).is_some());
    out
}
