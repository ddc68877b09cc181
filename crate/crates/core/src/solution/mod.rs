//! Solutions: the two chromosomes, decoded routes and penalized costs.

mod split;

pub use split::split;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// Tolerance on delivered weight when comparing against a group threshold.
const LEVEL_EPS: f64 = 1e-9;
/// Tolerance on route load when checking capacity.
const LOAD_EPS: f64 = 1e-9;

/// Capacity penalty `w_q` and one service-level penalty per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub w_q: f64,
    pub w_s: Vec<f64>,
}

impl PenaltyState {
    pub const INITIAL: f64 = 10.0;

    pub fn new(groups: usize) -> Self {
        PenaltyState {
            w_q: Self::INITIAL,
            w_s: vec![Self::INITIAL; groups],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PenaltyState {
            w_q: self.w_q * factor,
            w_s: self.w_s.iter().map(|w| w * factor).collect(),
        }
    }

    /// All `1 + K` penalties, capacity first.
    pub fn as_vec(&self) -> Vec<f64> {
        std::iter::once(self.w_q).chain(self.w_s.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub visits: Vec<usize>,
    pub load: f64,
    pub distance: f64,
    pub profit: f64,
    /// `distance - profit + w_q * max(0, load - Q)`.
    pub cost: f64,
}

/// Evaluates a route; `visits` excludes the depot at both ends.
pub fn route_cost(visits: &[usize], inst: &Instance, pen: &PenaltyState) -> Route {
    let mut load = 0.0;
    let mut profit = 0.0;
    let mut distance = 0.0;
    let mut prev = 0;
    for &v in visits {
        load += inst.demand(v);
        profit += inst.profit(v);
        distance += inst.d(prev, v);
        prev = v;
    }
    if !visits.is_empty() {
        distance += inst.d(prev, 0);
    }
    let cost = distance - profit + pen.w_q * (load - inst.capacity()).max(0.0);
    Route {
        visits: visits.to_vec(),
        load,
        distance,
        profit,
        cost,
    }
}

impl Instance {
    /// Service penalty base `max(α_k - φ^k, 0)` of group `k` given the weight
    /// it receives. Zero once the delivered weight reaches the threshold.
    pub fn shortfall(&self, k: usize, delivered: f64) -> f64 {
        let total = self.group_weight(k);
        if total <= 0.0 || delivered >= self.threshold(k) - LEVEL_EPS {
            0.0
        } else {
            (self.service_level(k) - delivered / total).max(0.0)
        }
    }

    /// Weight ratio `φ^k`; 1 for groups of zero total weight.
    pub fn level_ratio(&self, k: usize, delivered: f64) -> f64 {
        let total = self.group_weight(k);
        if total <= 0.0 {
            1.0
        } else {
            delivered / total
        }
    }
}

/// An individual: giant tour, per-group level ratios, and its decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Serviced customers in visiting order, without depot copies.
    pub giant_tour: Vec<usize>,
    /// Per-group ratio of delivered service weight.
    pub levels: Vec<f64>,
    pub routes: Vec<Route>,
    /// Penalized cost under the penalties last used for evaluation.
    pub cost: f64,
}

impl Solution {
    pub fn empty(inst: &Instance, pen: &PenaltyState) -> Self {
        Self::from_routes(Vec::new(), inst, pen)
    }

    /// Builds a solution from explicit routes; empty routes are dropped.
    pub fn from_routes(routes: Vec<Vec<usize>>, inst: &Instance, pen: &PenaltyState) -> Self {
        let routes: Vec<Route> = routes
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| route_cost(&r, inst, pen))
            .collect();
        let giant_tour = routes.iter().flat_map(|r| r.visits.iter().copied()).collect();
        let mut sol = Solution {
            giant_tour,
            levels: Vec::new(),
            routes,
            cost: 0.0,
        };
        sol.levels = level_ratios(&sol.giant_tour, inst);
        sol.cost = sol.penalized_cost_of_routes(inst, pen);
        sol
    }

    /// Re-evaluates routes, levels and cost under `pen`.
    pub fn evaluate(&mut self, inst: &Instance, pen: &PenaltyState) {
        for r in &mut self.routes {
            *r = route_cost(&r.visits, inst, pen);
        }
        self.levels = level_ratios(&self.giant_tour, inst);
        self.cost = self.penalized_cost_of_routes(inst, pen);
    }

    fn penalized_cost_of_routes(&self, inst: &Instance, pen: &PenaltyState) -> f64 {
        let delivered = delivered_weights(&self.giant_tour, inst);
        let mut cost = inst.total_profit();
        for r in &self.routes {
            cost += r.cost;
        }
        for k in 0..inst.group_count() {
            cost += pen.w_s[k] * inst.shortfall(k, delivered[k]);
        }
        cost
    }

    /// Travel distance plus lost profit, with no penalty terms.
    pub fn objective(&self, inst: &Instance) -> f64 {
        let dist: f64 = self.routes.iter().map(|r| r.distance).sum();
        let served: f64 = self.routes.iter().map(|r| r.profit).sum();
        dist + inst.total_profit() - served
    }

    pub fn route_lists(&self) -> Vec<Vec<usize>> {
        self.routes.iter().map(|r| r.visits.clone()).collect()
    }

    pub fn is_visited_mask(&self, inst: &Instance) -> Vec<bool> {
        let mut mask = vec![false; inst.n() + 1];
        for &c in &self.giant_tour {
            mask[c] = true;
        }
        mask
    }

    /// Capacity excess summed over routes.
    pub fn load_excess(&self, inst: &Instance) -> f64 {
        self.routes
            .iter()
            .map(|r| (r.load - inst.capacity()).max(0.0))
            .sum()
    }

    pub fn to_report(&self, inst: &Instance) -> SolutionReport {
        let feas = is_feasible(self, inst);
        SolutionReport {
            routes: self.route_lists(),
            cost: self.objective(inst),
            feasible: feas.feasible(),
            service_levels: self.levels.clone(),
            violations: feas.violations,
        }
    }
}

/// Delivered service weight per group for a set of visits.
pub fn delivered_weights(visits: &[usize], inst: &Instance) -> Vec<f64> {
    let mut w = vec![0.0; inst.group_count()];
    for &c in visits {
        w[inst.group_of(c)] += inst.weight(c);
    }
    w
}

pub fn level_ratios(visits: &[usize], inst: &Instance) -> Vec<f64> {
    delivered_weights(visits, inst)
        .iter()
        .enumerate()
        .map(|(k, &w)| inst.level_ratio(k, w))
        .collect()
}

/// Penalized cost `φ_P + Σ_r φ(r) + Σ_k w_k max(α_k - φ^k, 0)` recomputed
/// from the routes of `sol`.
pub fn solution_cost(sol: &Solution, inst: &Instance, pen: &PenaltyState) -> f64 {
    let routes: Vec<Vec<usize>> = sol.route_lists();
    Solution::from_routes(routes, inst, pen).cost
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Capacity { route: usize, load: f64, excess: f64 },
    RouteCount { routes: usize, fleet: usize },
    Duplicate { customer: usize },
    UnknownCustomer { customer: usize },
    ServiceLevel { group: usize, delivered: f64, required: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks capacity, fleet size, unique visits and group service levels.
pub fn is_feasible(sol: &Solution, inst: &Instance) -> FeasibilityReport {
    let mut violations = Vec::new();
    let routes: Vec<&Route> = sol.routes.iter().filter(|r| !r.visits.is_empty()).collect();
    if routes.len() > inst.fleet_size() {
        violations.push(Violation::RouteCount {
            routes: routes.len(),
            fleet: inst.fleet_size(),
        });
    }
    let mut seen = vec![false; inst.n() + 1];
    let mut delivered = vec![0.0; inst.group_count()];
    for (idx, r) in routes.iter().enumerate() {
        let mut load = 0.0;
        for &c in &r.visits {
            if c == 0 || c > inst.n() {
                violations.push(Violation::UnknownCustomer { customer: c });
                continue;
            }
            if seen[c] {
                violations.push(Violation::Duplicate { customer: c });
                continue;
            }
            seen[c] = true;
            load += inst.demand(c);
            delivered[inst.group_of(c)] += inst.weight(c);
        }
        if load > inst.capacity() + LOAD_EPS {
            violations.push(Violation::Capacity {
                route: idx,
                load,
                excess: load - inst.capacity(),
            });
        }
    }
    for (k, &w) in delivered.iter().enumerate() {
        let required = inst.threshold(k);
        if w < required - LEVEL_EPS {
            violations.push(Violation::ServiceLevel {
                group: k + 1,
                delivered: w,
                required,
            });
        }
    }
    FeasibilityReport { violations }
}

/// JSON form of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub routes: Vec<Vec<usize>>,
    /// Travel distance plus lost profit.
    pub cost: f64,
    pub feasible: bool,
    pub service_levels: Vec<f64>,
    pub violations: Vec<Violation>,
}

/// Undirected neighbours of every customer (`usize::MAX` when unvisited).
pub fn adjacency(sol: &Solution, n: usize) -> Vec<[usize; 2]> {
    let mut adj = vec![[usize::MAX; 2]; n + 1];
    for r in &sol.routes {
        let v = &r.visits;
        for (i, &c) in v.iter().enumerate() {
            let pred = if i == 0 { 0 } else { v[i - 1] };
            let succ = if i + 1 == v.len() { 0 } else { v[i + 1] };
            adj[c] = [pred, succ];
        }
    }
    adj
}

/// Edges charged to customer `c`: those towards a smaller endpoint (the
/// depot included), without repeats.
fn charged(adj: &[usize; 2], c: usize) -> impl Iterator<Item = usize> {
    let [a, b] = *adj;
    let first = (a < c).then_some(a);
    let second = (b < c && b != a).then_some(b);
    first.into_iter().chain(second)
}

/// Broken-pairs style distance `1 - |E1 ∩ E2| / |E1 ∪ E2|` over undirected
/// edge sets, depot edges included. Two empty solutions are at distance 0.
pub fn adjacency_distance(a: &[[usize; 2]], b: &[[usize; 2]]) -> f64 {
    let mut ea = 0usize;
    let mut eb = 0usize;
    let mut common = 0usize;
    for c in 1..a.len() {
        if a[c][0] != usize::MAX {
            for x in charged(&a[c], c) {
                ea += 1;
                if b[c][0] != usize::MAX && (b[c][0] == x || b[c][1] == x) {
                    common += 1;
                }
            }
        }
        if b[c][0] != usize::MAX {
            eb += charged(&b[c], c).count();
        }
    }
    let union = ea + eb - common;
    if union == 0 {
        0.0
    } else {
        1.0 - common as f64 / union as f64
    }
}

pub fn solution_distance(s1: &Solution, s2: &Solution, inst: &Instance) -> f64 {
    adjacency_distance(&adjacency(s1, inst.n()), &adjacency(s2, inst.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::testutil::simple;
    use crate::instance::{EdgeWeight, InstanceData};

    fn line3() -> Instance {
        simple(
            &[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0], [-2.0, 0.0]],
            &[2.0, 3.0, 4.0],
            &[3.0, 5.0, 1.0],
            0.5,
            2,
            10.0,
        )
    }

    #[test]
    fn single_customer_route() {
        let inst = line3();
        let r = route_cost(&[1], &inst, &PenaltyState::new(1));
        assert_eq!(r.distance, 8.0);
        assert_eq!(r.cost, 5.0);
    }

    #[test]
    fn overload_penalty() {
        // Q = 10, load 12, w = 10
        let coords = [[0.0, 0.0], [5.0, 0.0], [5.0, 5.0], [0.0, 5.0]];
        let inst = simple(&coords, &[4.0, 4.0, 4.0], &[1.0, 2.0, 2.0], 0.0, 1, 10.0);
        let r = route_cost(&[1, 2, 3], &inst, &PenaltyState::new(1));
        assert_eq!(r.distance, 20.0);
        assert_eq!(r.profit, 5.0);
        assert_eq!(r.cost, 35.0);
        let at_cap = route_cost(&[1, 2], &simple(&coords, &[5.0, 5.0, 1.0], &[0.0; 3], 0.0, 1, 10.0), &PenaltyState::new(1));
        assert_eq!(at_cap.cost, at_cap.distance);
    }

    #[test]
    fn empty_solution_cost() {
        let inst = line3();
        let pen = PenaltyState { w_q: 10.0, w_s: vec![7.0] };
        let s = Solution::empty(&inst, &pen);
        assert_eq!(s.cost, 9.0 + 7.0 * 0.5);
        let rep = is_feasible(&s, &inst);
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn full_service_cancels_profit() {
        let inst = line3();
        let pen = PenaltyState::new(1);
        let s = Solution::from_routes(vec![vec![1, 2], vec![3]], &inst, &pen);
        assert_eq!(s.cost, 4.0 + 5.0 + 3.0 + 4.0);
        assert_eq!(s.cost, s.objective(&inst));
        assert!(is_feasible(&s, &inst).feasible());
    }

    #[test]
    fn two_group_partial_selection() {
        let inst = Instance::new(InstanceData {
            name: "g".into(),
            coords: vec![[0.0, 0.0], [3.0, 4.0], [6.0, 8.0], [0.0, 1.0]],
            dist: None,
            edge_weight: EdgeWeight::Euc2d,
            demand: vec![0.0, 1.0, 1.0, 1.0],
            profit: vec![0.0, 2.0, 4.0, 8.0],
            weight: vec![0.0, 1.0, 3.0, 5.0],
            groups: vec![vec![1, 2], vec![3]],
            service_level: vec![0.55, 1.0],
            fleet_size: 1,
            capacity: 5.0,
        })
        .unwrap();
        let pen = PenaltyState { w_q: 1.0, w_s: vec![100.0, 1000.0] };
        let s = Solution::from_routes(vec![vec![1]], &inst, &pen);
        // profit 14, route 10 - 2, group 1 at 0.25 < 0.55, group 2 at 0
        let expect = 14.0 + 8.0 + 100.0 * (0.55 - 0.25) + 1000.0;
        assert!((s.cost - expect).abs() < 1e-12);
        assert_eq!(s.levels, vec![0.25, 0.0]);
    }

    #[test]
    fn reversal_keeps_route_cost() {
        let inst = line3();
        let pen = PenaltyState::new(1);
        let a = route_cost(&[1, 2, 3], &inst, &pen);
        let b = route_cost(&[3, 2, 1], &inst, &pen);
        assert!((a.cost - b.cost).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let inst = line3();
        let pen = PenaltyState::new(1);
        let s = Solution::from_routes(vec![vec![1, 2, 3]], &inst, &pen);
        assert_eq!(solution_distance(&s, &s, &inst), 0.0);
        let e = Solution::empty(&inst, &pen);
        assert_eq!(solution_distance(&e, &e, &inst), 0.0);
        assert_eq!(solution_distance(&s, &e, &inst), 1.0);
        // {01, 12, 23, 30} vs {01, 10} ∪ {02, 23, 30}: common 01 23 30
        let t = Solution::from_routes(vec![vec![1], vec![2, 3]], &inst, &pen);
        assert!((solution_distance(&s, &t, &inst) - (1.0 - 3.0 / 5.0)).abs() < 1e-12);
        // {01} vs {01, 02}: 1 common out of 2
        let a = Solution::from_routes(vec![vec![1]], &inst, &pen);
        let b = Solution::from_routes(vec![vec![1, 2]], &inst, &pen);
        let c = Solution::from_routes(vec![vec![2]], &inst, &pen);
        assert!((solution_distance(&a, &b, &inst) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(solution_distance(&a, &c, &inst), 1.0);
    }

    #[test]
    fn feasibility_report_lists_all_violations() {
        let inst = line3();
        let pen = PenaltyState::new(1);
        let mut s = Solution::from_routes(vec![vec![1, 2, 3], vec![1]], &inst, &pen);
        s.routes[0].visits.push(2);
        let rep = is_feasible(&s, &inst);
        assert!(rep.violations.contains(&Violation::Duplicate { customer: 1 }));
        assert!(rep.violations.contains(&Violation::Duplicate { customer: 2 }));
        let narrow = simple(&[[0.0, 0.0], [1.0, 0.0]], &[11.0], &[0.0], 1.0, 1, 10.0);
        let s = Solution::from_routes(vec![vec![1]], &narrow, &pen);
        assert_eq!(
            is_feasible(&s, &narrow).violations,
            vec![Violation::Capacity { route: 0, load: 11.0, excess: 1.0 }]
        );
    }
}
