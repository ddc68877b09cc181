//! Optimal segmentation of a giant tour into at most `m` routes.

use super::{PenaltyState, Solution};
use crate::instance::Instance;

/// Splits `tour` into consecutive routes minimizing the sum of penalized route
/// costs. Customer selection is left untouched. When the best unrestricted
/// segmentation needs more than `m` routes, a second pass bounds the route
/// count, which forces longer (possibly overloaded) routes.
pub fn split(tour: &[usize], inst: &Instance, pen: &PenaltyState) -> Solution {
    let bounds = split_bounds(tour, inst, pen);
    let routes = bounds.windows(2).map(|w| tour[w[0]..w[1]].to_vec()).collect();
    Solution::from_routes(routes, inst, pen)
}

/// Route boundaries `0 = b_0 < b_1 < ... < b_r = tour.len()`.
pub(crate) fn split_bounds(tour: &[usize], inst: &Instance, pen: &PenaltyState) -> Vec<usize> {
    let len = tour.len();
    if len == 0 {
        return vec![0];
    }
    let arcs = SegmentCosts::new(tour, inst, pen);
    let mut best = vec![f64::INFINITY; len + 1];
    let mut pred = vec![0usize; len + 1];
    let mut count = vec![0usize; len + 1];
    best[0] = 0.0;
    for i in 0..len {
        if !best[i].is_finite() {
            continue;
        }
        for (j, c) in arcs.from(i) {
            let v = best[i] + c;
            if v < best[j] {
                best[j] = v;
                pred[j] = i;
                count[j] = count[i] + 1;
            }
        }
    }
    let m = inst.fleet_size();
    if count[len] <= m {
        return unwind(&pred, len);
    }

    // bounded route count: layer k holds paths of exactly k routes
    let mut layer = vec![f64::INFINITY; len + 1];
    layer[0] = 0.0;
    let mut preds: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut best_end = (f64::INFINITY, 0usize);
    for k in 1..=m {
        let mut next = vec![f64::INFINITY; len + 1];
        let mut p = vec![0usize; len + 1];
        for i in 0..len {
            if !layer[i].is_finite() {
                continue;
            }
            for (j, c) in arcs.from(i) {
                let v = layer[i] + c;
                if v < next[j] {
                    next[j] = v;
                    p[j] = i;
                }
            }
        }
        preds.push(p);
        if next[len] < best_end.0 {
            best_end = (next[len], k);
        }
        layer = next;
    }
    let mut bounds = vec![len];
    let mut j = len;
    for k in (0..best_end.1).rev() {
        j = preds[k][j];
        bounds.push(j);
    }
    bounds.reverse();
    bounds
}

fn unwind(pred: &[usize], end: usize) -> Vec<usize> {
    let mut bounds = vec![end];
    let mut j = end;
    while j > 0 {
        j = pred[j];
        bounds.push(j);
    }
    bounds.reverse();
    bounds
}

/// Costs of every segment `tour[i..j]`, computed on the fly.
struct SegmentCosts<'a> {
    tour: &'a [usize],
    inst: &'a Instance,
    w_q: f64,
}

impl<'a> SegmentCosts<'a> {
    fn new(tour: &'a [usize], inst: &'a Instance, pen: &PenaltyState) -> Self {
        SegmentCosts {
            tour,
            inst,
            w_q: pen.w_q,
        }
    }

    /// Yields `(j, cost of tour[i..j])` for `j = i+1..=len`.
    fn from(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let inst = self.inst;
        let tour = self.tour;
        let q = inst.capacity();
        let mut load = 0.0;
        let mut inner = 0.0;
        let mut profit = 0.0;
        (i + 1..=tour.len()).map(move |j| {
            let c = tour[j - 1];
            if j > i + 1 {
                inner += inst.d(tour[j - 2], c);
            }
            load += inst.demand(c);
            profit += inst.profit(c);
            let dist = inst.d(0, tour[i]) + inner + inst.d(c, 0);
            (j, dist - profit + self.w_q * (load - q).max(0.0))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::testutil::simple;
    use crate::solution::route_cost;

    #[test]
    fn one_customer() {
        let inst = simple(&[[0.0, 0.0], [1.0, 1.0]], &[1.0], &[0.0], 1.0, 1, 5.0);
        let s = split(&[1], &inst, &PenaltyState::new(1));
        assert_eq!(s.routes.len(), 1);
        assert_eq!(s.routes[0].visits, vec![1]);
    }

    #[test]
    fn empty_tour() {
        let inst = simple(&[[0.0, 0.0], [1.0, 1.0]], &[1.0], &[0.0], 0.0, 1, 5.0);
        let s = split(&[], &inst, &PenaltyState::new(1));
        assert!(s.routes.is_empty());
    }

    #[test]
    fn full_customers_get_own_routes() {
        // both customers fill a vehicle; joining costs w_q * Q extra
        let inst = simple(&[[0.0, 0.0], [10.0, 0.0], [10.0, 1.0]], &[5.0, 5.0], &[0.0, 0.0], 1.0, 2, 5.0);
        let pen = PenaltyState::new(1);
        let joined = route_cost(&[1, 2], &inst, &pen).cost;
        let apart = route_cost(&[1], &inst, &pen).cost + route_cost(&[2], &inst, &pen).cost;
        assert!(apart < joined);
        let s = split(&[1, 2], &inst, &pen);
        assert_eq!(s.route_lists(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn fleet_cap_forces_overload() {
        let inst = simple(&[[0.0, 0.0], [10.0, 0.0], [10.0, 1.0]], &[5.0, 5.0], &[0.0, 0.0], 1.0, 1, 5.0);
        let s = split(&[1, 2], &inst, &PenaltyState::new(1));
        assert_eq!(s.route_lists(), vec![vec![1, 2]]);
    }
}
