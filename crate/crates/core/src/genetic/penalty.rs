//! Adaptive penalty coefficients.

use std::collections::VecDeque;

use crate::solution::PenaltyState;

pub const INCREASE: f64 = 1.2;
pub const DECREASE: f64 = 0.85;

/// Target feasibility interval `[0.15^(1/(1+K)), 0.35^(1/(1+K))]` for each
/// of the `1 + K` constraints, so that about a quarter of the educated
/// individuals end up feasible overall.
pub fn feasibility_targets(groups: usize) -> (f64, f64) {
    let e = 1.0 / (1.0 + groups as f64);
    (0.15f64.powf(e), 0.35f64.powf(e))
}

/// Rule for one coefficient given its observed feasibility ratio.
pub fn adapt(w: f64, ratio: f64, xi_min: f64, xi_max: f64) -> f64 {
    if ratio <= xi_min {
        w * INCREASE
    } else if ratio >= xi_max {
        w * DECREASE
    } else {
        w
    }
}

/// Updates each of the `1 + K` penalties independently. `ratios` lists the
/// capacity ratio first, then one per group.
pub fn adapt_penalties(state: &PenaltyState, ratios: &[f64], xi_min: f64, xi_max: f64) -> PenaltyState {
    assert_eq!(ratios.len(), 1 + state.w_s.len(), "one ratio per constraint");
    PenaltyState {
        w_q: adapt(state.w_q, ratios[0], xi_min, xi_max),
        w_s: state
            .w_s
            .iter()
            .zip(&ratios[1..])
            .map(|(&w, &r)| adapt(w, r, xi_min, xi_max))
            .collect(),
    }
}

/// Sliding window of per-constraint feasibility flags of educated individuals.
#[derive(Debug, Clone)]
pub struct FeasibilityWindow {
    size: usize,
    flags: VecDeque<Vec<bool>>,
}

impl FeasibilityWindow {
    pub fn new(size: usize) -> Self {
        FeasibilityWindow {
            size,
            flags: VecDeque::with_capacity(size),
        }
    }

    pub fn push(&mut self, flags: Vec<bool>) {
        if self.flags.len() == self.size {
            self.flags.pop_front();
        }
        self.flags.push_back(flags);
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Fraction of feasible entries per constraint (1 when empty).
    pub fn ratios(&self, constraints: usize) -> Vec<f64> {
        if self.flags.is_empty() {
            return vec![1.0; constraints];
        }
        (0..constraints)
            .map(|c| self.flags.iter().filter(|f| f[c]).count() as f64 / self.flags.len() as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_branches() {
        let (lo, hi) = feasibility_targets(1);
        assert!((adapt(10.0, 0.05, lo, hi) - 12.0).abs() < 1e-12);
        assert!((adapt(10.0, 0.99, lo, hi) - 8.5).abs() < 1e-12);
        assert_eq!(adapt(10.0, (lo + hi) / 2.0, lo, hi), 10.0);
    }

    #[test]
    fn targets_by_group_count() {
        for (k, lo, hi) in [
            (1usize, 0.15f64.sqrt(), 0.35f64.sqrt()),
            (2, 0.15f64.cbrt(), 0.35f64.cbrt()),
            (5, 0.15f64.powf(1.0 / 6.0), 0.35f64.powf(1.0 / 6.0)),
        ] {
            let (a, b) = feasibility_targets(k);
            assert!((a - lo).abs() < 1e-15 && (b - hi).abs() < 1e-15);
            assert!(0.0 < a && a < b && b < 1.0);
        }
    }

    #[test]
    fn independent_updates() {
        let st = PenaltyState { w_q: 10.0, w_s: vec![10.0, 10.0] };
        let (lo, hi) = feasibility_targets(2);
        let out = adapt_penalties(&st, &[0.0, 1.0, (lo + hi) / 2.0], lo, hi);
        assert!((out.w_q - 12.0).abs() < 1e-12);
        assert!((out.w_s[0] - 8.5).abs() < 1e-12);
        assert_eq!(out.w_s[1], 10.0);
    }

    #[test]
    fn window_keeps_last_entries() {
        let mut w = FeasibilityWindow::new(3);
        for f in [false, false, true, true] {
            w.push(vec![f, true]);
        }
        assert_eq!(w.len(), 3);
        let r = w.ratios(2);
        assert!((r[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r[1], 1.0);
    }
}
