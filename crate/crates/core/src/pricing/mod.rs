//! Column-generation pricing over ng-routes.
//!
//! Given duals `β_i` for the customer rows, `γ` for the fleet row and
//! optional edge adjustments `ρ_ij`, the reduced cost of an edge is
//! `d_ij − (β_i + β_j)/2 − ρ_ij` with `β_0 = γ`, and a route's reduced cost
//! is the sum over its edges. The labeling engines search depot-to-depot
//! walks of negative reduced cost under the ng-route relaxation.

mod labeling;
mod oracle;

use thiserror::Error;

use crate::instance::Instance;

pub use labeling::{price_heuristic, price_ng, price_with, LabelingOptions, PricingResult};
pub use oracle::{oracle_elementary, ORACLE_MAX_N};

/// Routes are reported only when their reduced cost is below this.
pub const NEGATIVE_THRESHOLD: f64 = -1e-9;

pub const DEFAULT_NG_SIZE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("expected {expected} dual values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("edge adjustment matrix is not symmetric at ({i}, {j})")]
    AsymmetricRho { i: usize, j: usize },
    #[error("customer {customer} has demand {demand}; pricing needs positive integer demands")]
    BadDemand { customer: usize, demand: f64 },
    #[error("stabilization weight {0} outside [0, 1)")]
    BadAlpha(f64),
    #[error("exhaustive enumeration refuses {n} customers (limit {max_n})")]
    TooLarge { n: usize, max_n: usize },
}

/// Dual values indexed by vertex: `beta[0]` is the fleet dual `γ`, `beta[i]`
/// the dual of customer `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub beta: Vec<f64>,
    /// Optional full `(n+1) × (n+1)` row-major matrix of edge adjustments.
    pub rho: Option<Vec<f64>>,
}

impl DualVector {
    pub fn zeros(n: usize) -> Self {
        DualVector { beta: vec![0.0; n + 1], rho: None }
    }

    pub fn new(gamma: f64, customer_duals: &[f64]) -> Self {
        let mut beta = Vec::with_capacity(customer_duals.len() + 1);
        beta.push(gamma);
        beta.extend_from_slice(customer_duals);
        DualVector { beta, rho: None }
    }

    pub fn gamma(&self) -> f64 {
        self.beta[0]
    }

    pub fn n(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        match &self.rho {
            Some(r) => r[i * self.beta.len() + j],
            None => 0.0,
        }
    }

    /// Sets `ρ_ij = ρ_ji = value`.
    pub fn set_rho(&mut self, i: usize, j: usize, value: f64) {
        let dim = self.beta.len();
        let r = self.rho.get_or_insert_with(|| vec![0.0; dim * dim]);
        r[i * dim + j] = value;
        r[j * dim + i] = value;
    }

    /// Checks the dimension against `inst` and the symmetry of `ρ`.
    pub fn validate(&self, inst: &Instance) -> Result<(), PricingError> {
        if self.beta.len() != inst.n() + 1 {
            return Err(PricingError::DimensionMismatch { expected: inst.n() + 1, got: self.beta.len() });
        }
        if let Some(r) = &self.rho {
            let dim = self.beta.len();
            if r.len() != dim * dim {
                return Err(PricingError::DimensionMismatch { expected: dim * dim, got: r.len() });
            }
            for i in 0..dim {
                for j in i + 1..dim {
                    if r[i * dim + j] != r[j * dim + i] {
                        return Err(PricingError::AsymmetricRho { i, j });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn edge_reduced_cost(inst: &Instance, i: usize, j: usize, duals: &DualVector) -> f64 {
    inst.d(i, j) - (duals.beta[i] + duals.beta[j]) / 2.0 - duals.rho(i, j)
}

/// `c_r − γ − Σ a_i β_i − Σ ρ_ij` for the depot-to-depot route visiting
/// `visits` (no depot copies).
pub fn route_reduced_cost(inst: &Instance, visits: &[usize], duals: &DualVector) -> f64 {
    let mut cost = -duals.gamma();
    let mut prev = 0;
    for &c in visits.iter().chain(std::iter::once(&0)) {
        cost += inst.d(prev, c) - duals.rho(prev, c);
        prev = c;
    }
    for &c in visits {
        cost -= duals.beta[c];
    }
    cost
}

/// `alpha · prev + (1 − alpha) · next`, componentwise. Missing edge
/// adjustments count as zero.
pub fn stabilize_duals(prev: &DualVector, next: &DualVector, alpha: f64) -> Result<DualVector, PricingError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(PricingError::BadAlpha(alpha));
    }
    if prev.beta.len() != next.beta.len() {
        return Err(PricingError::DimensionMismatch { expected: prev.beta.len(), got: next.beta.len() });
    }
    let mix = |a: f64, b: f64| alpha * a + (1.0 - alpha) * b;
    let beta = prev.beta.iter().zip(&next.beta).map(|(&a, &b)| mix(a, b)).collect();
    let rho = match (&prev.rho, &next.rho) {
        (None, None) => None,
        _ => {
            let dim = prev.beta.len();
            Some(
                (0..dim * dim)
                    .map(|e| mix(prev.rho(e / dim, e % dim), next.rho(e / dim, e % dim)))
                    .collect(),
            )
        }
    };
    Ok(DualVector { beta, rho })
}

/// Stabilization weights starting at 0.9 and decreasing by 0.1 down to 0.
pub fn stabilization_schedule() -> impl Iterator<Item = f64> {
    (0..=9).rev().map(|k| k as f64 / 10.0)
}

/// Per-customer ng memories. Every customer remembers itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NgConfig {
    /// `ng_sets[i]` for customers `i = 1..=n`; entry 0 is empty.
    pub ng_sets: Vec<Vec<usize>>,
    pub ng_size: usize,
}

impl NgConfig {
    /// `NG_i` = `i` plus its `size − 1` nearest customers.
    pub fn nearest(inst: &Instance, size: usize) -> Self {
        let size = size.max(1);
        let mut sets = vec![Vec::new(); inst.n() + 1];
        for i in inst.customers() {
            let mut others: Vec<usize> = inst.customers().filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| inst.d(i, a).total_cmp(&inst.d(i, b)).then(a.cmp(&b)));
            others.truncate(size - 1);
            let mut set = vec![i];
            set.extend(others);
            sets[i] = set;
        }
        NgConfig { ng_sets: sets, ng_size: size }
    }

    /// Every customer remembers every other one: elementary routes only.
    pub fn full(inst: &Instance) -> Self {
        Self::nearest(inst, inst.n())
    }

    /// `NG_i = {i}`: only immediate returns are forbidden.
    pub fn minimal(inst: &Instance) -> Self {
        Self::nearest(inst, 1)
    }

    /// Builds from explicit sets, adding each customer to its own set.
    pub fn from_sets(mut sets: Vec<Vec<usize>>) -> Self {
        for (i, s) in sets.iter_mut().enumerate().skip(1) {
            if !s.contains(&i) {
                s.push(i);
            }
        }
        let size = sets.iter().map(Vec::len).max().unwrap_or(0);
        NgConfig { ng_sets: sets, ng_size: size }
    }
}

/// Integer demands, or the first customer whose demand is not a positive
/// integer.
fn integer_demands(inst: &Instance) -> Result<Vec<u64>, PricingError> {
    let mut out = vec![0u64; inst.n() + 1];
    for c in inst.customers() {
        let q = inst.demand(c);
        if q <= 0.0 || q.fract() != 0.0 || !q.is_finite() {
            return Err(PricingError::BadDemand { customer: c, demand: q });
        }
        out[c] = q as u64;
    }
    Ok(out)
}

/// A depot-to-depot walk found by pricing.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedRoute {
    pub visits: Vec<usize>,
    pub reduced_cost: f64,
    pub load: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::testutil::simple;

    fn inst3() -> Instance {
        simple(&[[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 10.0]], &[1.0; 3], &[0.0; 3], 0.0, 2, 5.0)
    }

    #[test]
    fn edge_cost_examples() {
        let inst = simple(&[[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]], &[1.0; 2], &[0.0; 2], 0.0, 1, 5.0);
        let mut duals = DualVector::zeros(2);
        assert_eq!(edge_reduced_cost(&inst, 1, 2, &duals), 10.0);
        duals.beta[1] = 4.0;
        duals.beta[2] = 6.0;
        assert_eq!(edge_reduced_cost(&inst, 1, 2, &duals), 5.0);
        assert_eq!(edge_reduced_cost(&inst, 2, 1, &duals), 5.0);
        duals.set_rho(1, 2, 2.0);
        assert_eq!(edge_reduced_cost(&inst, 1, 2, &duals), 3.0);
    }

    #[test]
    fn route_cost_examples() {
        let inst = inst3();
        assert_eq!(route_reduced_cost(&inst, &[1, 2], &DualVector::zeros(3)), 12.0);
        let duals = DualVector::new(1.0, &[3.0, 0.0, 0.0]);
        assert_eq!(route_reduced_cost(&inst, &[1], &duals), 4.0);
    }

    #[test]
    fn route_cost_is_edge_sum() {
        let inst = inst3();
        let mut duals = DualVector::new(2.5, &[1.0, -3.0, 7.25]);
        duals.set_rho(0, 2, 0.5);
        duals.set_rho(1, 3, -1.5);
        for route in [vec![1], vec![2, 3], vec![3, 1, 2], vec![1, 3, 1]] {
            let mut edges = 0.0;
            let mut prev = 0;
            for &c in route.iter().chain([0].iter()) {
                edges += edge_reduced_cost(&inst, prev, c, &duals);
                prev = c;
            }
            assert!((edges - route_reduced_cost(&inst, &route, &duals)).abs() < 1e-12);
        }
    }

    #[test]
    fn stabilization() {
        let prev = DualVector::new(10.0, &[1.0]);
        let next = DualVector::new(20.0, &[3.0]);
        assert_eq!(stabilize_duals(&prev, &next, 0.0).unwrap(), next);
        let mid = stabilize_duals(&prev, &next, 0.9).unwrap();
        assert!((mid.gamma() - 11.0).abs() < 1e-12);
        assert!((mid.beta[1] - 1.2).abs() < 1e-12);
        let eps = 1e-6;
        let near = stabilize_duals(&prev, &next, 1.0 - eps).unwrap();
        assert!((near.gamma() - 10.0).abs() <= eps * 10.0 + 1e-12);
        assert!(stabilize_duals(&prev, &next, 1.0).is_err());
        assert!(stabilize_duals(&prev, &DualVector::zeros(3), 0.5).is_err());
        let sched: Vec<f64> = stabilization_schedule().collect();
        assert_eq!(sched.len(), 10);
        assert_eq!(sched[0], 0.9);
        assert_eq!(sched[9], 0.0);
    }

    #[test]
    fn ng_sets_contain_self_and_nearest() {
        let inst = inst3();
        let ng = NgConfig::nearest(&inst, 2);
        assert_eq!(ng.ng_sets[1], vec![1, 2]);
        assert_eq!(ng.ng_sets[3], vec![3, 2]);
        assert_eq!(NgConfig::minimal(&inst).ng_sets[2], vec![2]);
        assert_eq!(NgConfig::full(&inst).ng_sets[2].len(), 3);
        let custom = NgConfig::from_sets(vec![vec![], vec![2], vec![], vec![1, 2]]);
        assert!(custom.ng_sets[1].contains(&1) && custom.ng_sets[3].contains(&3));
    }

    #[test]
    fn validation() {
        let inst = inst3();
        assert!(DualVector::zeros(3).validate(&inst).is_ok());
        assert!(DualVector::zeros(2).validate(&inst).is_err());
        let mut d = DualVector::zeros(3);
        d.set_rho(1, 2, 1.0);
        d.rho.as_mut().unwrap()[4 + 2] = 5.0;
        assert_eq!(d.validate(&inst), Err(PricingError::AsymmetricRho { i: 1, j: 2 }));
        let frac = simple(&[[0.0, 0.0], [1.0, 0.0]], &[1.5], &[0.0], 0.0, 1, 5.0);
        assert!(integer_demands(&frac).is_err());
    }
}
