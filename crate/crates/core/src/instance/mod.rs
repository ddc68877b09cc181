//! Problem instances and group-level quantities.

mod format;
mod generate;
mod reduce;

pub use format::{parse_instance, serialize_instance, InstanceFormat};
pub use generate::{assign_groups, generate_s1, generate_s2, GroupConfig};
pub use reduce::{reduce, reduce_pvrp, PeriodicCustomer, PeriodicInput, Reduction};

use thiserror::Error;

/// Slack used when taking the ceiling of a real threshold, so that
/// `0.55 * 20 = 11.000000000000002` still rounds to 11.
const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("line {line} ({section}): {message}")]
    Parse {
        line: usize,
        section: String,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("group {group} has non-integer service weights")]
    NonIntegralWeights { group: usize },
    #[error("cannot build {groups} groups from {customers} customers")]
    TooManyGroups { groups: usize, customers: usize },
    #[error("periodic customer {customer}: {message}")]
    Periodic { customer: usize, message: String },
}

/// How edge costs are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeight {
    /// Euclidean distance rounded to the nearest integer.
    Euc2d,
    /// Euclidean distance kept in double precision.
    Euc2dExact,
    /// An explicit symmetric matrix (reductions that rewrite edge costs).
    Explicit,
}

impl EdgeWeight {
    pub fn euclidean(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let d = (dx * dx + dy * dy).sqrt();
        match self {
            EdgeWeight::Euc2d => (d + 0.5).floor(),
            _ => d,
        }
    }
}

/// A VRP-SL instance. Node 0 is the depot, nodes `1..=n` are customers.
///
/// Per-node vectors (`demand`, `profit`, `weight`) have length `n + 1` with a
/// zero entry for the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    coords: Vec<[f64; 2]>,
    dist: Vec<f64>,
    edge_weight: EdgeWeight,
    demand: Vec<f64>,
    profit: Vec<f64>,
    weight: Vec<f64>,
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    service_level: Vec<f64>,
    fleet_size: usize,
    capacity: f64,
    // derived
    group_weight: Vec<f64>,
    threshold: Vec<f64>,
    integral_weights: Vec<bool>,
    total_profit: f64,
}

/// Raw fields used to build an [`Instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub name: String,
    pub coords: Vec<[f64; 2]>,
    /// Explicit full matrix, required when `edge_weight` is `Explicit`.
    pub dist: Option<Vec<f64>>,
    pub edge_weight: EdgeWeight,
    pub demand: Vec<f64>,
    pub profit: Vec<f64>,
    pub weight: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    pub service_level: Vec<f64>,
    pub fleet_size: usize,
    pub capacity: f64,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, InstanceError> {
        let InstanceData {
            name,
            coords,
            dist,
            edge_weight,
            demand,
            profit,
            weight,
            groups,
            service_level,
            fleet_size,
            capacity,
        } = data;
        let nodes = coords.len();
        if nodes == 0 {
            return Err(InstanceError::Invalid("no depot".into()));
        }
        for (what, v) in [("demand", &demand), ("profit", &profit), ("weight", &weight)] {
            if v.len() != nodes {
                return Err(InstanceError::Invalid(format!(
                    "{what} has {} entries, expected {nodes}",
                    v.len()
                )));
            }
            if let Some(i) = (1..nodes).find(|&i| !(v[i] >= 0.0) || !v[i].is_finite()) {
                return Err(InstanceError::Invalid(format!(
                    "{what} of customer {i} must be finite and non-negative"
                )));
            }
        }
        if !(capacity > 0.0) {
            return Err(InstanceError::Invalid("capacity must be positive".into()));
        }
        if fleet_size == 0 {
            return Err(InstanceError::Invalid("fleet size must be at least 1".into()));
        }
        if groups.len() != service_level.len() {
            return Err(InstanceError::Invalid(format!(
                "{} groups but {} service levels",
                groups.len(),
                service_level.len()
            )));
        }
        if let Some(k) = service_level.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(InstanceError::Invalid(format!(
                "service level of group {} outside [0, 1]",
                k + 1
            )));
        }
        let mut group_of = vec![usize::MAX; nodes];
        for (k, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(InstanceError::Invalid(format!("group {} is empty", k + 1)));
            }
            for &i in g {
                if i == 0 || i >= nodes {
                    return Err(InstanceError::Invalid(format!(
                        "group {} references unknown customer {i}",
                        k + 1
                    )));
                }
                if group_of[i] != usize::MAX {
                    return Err(InstanceError::Invalid(format!(
                        "customer {i} belongs to groups {} and {}",
                        group_of[i] + 1,
                        k + 1
                    )));
                }
                group_of[i] = k;
            }
        }
        if let Some(i) = (1..nodes).find(|&i| group_of[i] == usize::MAX) {
            return Err(InstanceError::Invalid(format!("customer {i} has no group")));
        }

        let dist = match (edge_weight, dist) {
            (EdgeWeight::Explicit, Some(d)) => {
                if d.len() != nodes * nodes {
                    return Err(InstanceError::Invalid("distance matrix has wrong size".into()));
                }
                for i in 0..nodes {
                    if d[i * nodes + i] != 0.0 {
                        return Err(InstanceError::Invalid("non-zero diagonal".into()));
                    }
                    for j in 0..i {
                        let v = d[i * nodes + j];
                        if v != d[j * nodes + i] || !(v >= 0.0) {
                            return Err(InstanceError::Invalid(format!(
                                "distance ({i},{j}) is not symmetric and non-negative"
                            )));
                        }
                    }
                }
                d
            }
            (EdgeWeight::Explicit, None) => {
                return Err(InstanceError::Invalid("explicit weights without a matrix".into()))
            }
            (ew, _) => {
                let mut d = vec![0.0; nodes * nodes];
                for i in 0..nodes {
                    for j in 0..i {
                        let v = ew.euclidean(coords[i], coords[j]);
                        d[i * nodes + j] = v;
                        d[j * nodes + i] = v;
                    }
                }
                d
            }
        };

        let group_weight: Vec<f64> = groups
            .iter()
            .map(|g| g.iter().map(|&i| weight[i]).sum())
            .collect();
        let integral_weights: Vec<bool> = groups
            .iter()
            .map(|g| g.iter().all(|&i| weight[i].fract() == 0.0))
            .collect();
        let threshold = (0..groups.len())
            .map(|k| {
                let raw = service_level[k] * group_weight[k];
                if integral_weights[k] {
                    (raw - CEIL_SLACK).ceil().max(0.0)
                } else {
                    raw
                }
            })
            .collect();
        let total_profit = profit[1..].iter().sum();

        Ok(Instance {
            name,
            coords,
            dist,
            edge_weight,
            demand,
            profit,
            weight,
            groups,
            group_of,
            service_level,
            fleet_size,
            capacity,
            group_weight,
            threshold,
            integral_weights,
            total_profit,
        })
    }

    /// Decomposes the instance back into its raw fields.
    pub fn to_data(&self) -> InstanceData {
        InstanceData {
            name: self.name.clone(),
            coords: self.coords.clone(),
            dist: (self.edge_weight == EdgeWeight::Explicit).then(|| self.dist.clone()),
            edge_weight: self.edge_weight,
            demand: self.demand.clone(),
            profit: self.profit.clone(),
            weight: self.weight.clone(),
            groups: self.groups.clone(),
            service_level: self.service_level.clone(),
            fleet_size: self.fleet_size,
            capacity: self.capacity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of customers `n`.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.coords.len() + j]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn edge_weight(&self) -> EdgeWeight {
        self.edge_weight
    }

    pub fn demand(&self, i: usize) -> f64 {
        self.demand[i]
    }

    pub fn profit(&self, i: usize) -> f64 {
        self.profit[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }

    pub fn demands(&self) -> &[f64] {
        &self.demand
    }

    pub fn profits(&self) -> &[f64] {
        &self.profit
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Total profit of all customers (the constant term of the objective).
    pub fn total_profit(&self) -> f64 {
        self.total_profit
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, k: usize) -> &[usize] {
        &self.groups[k]
    }

    /// Zero-based group index of customer `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn service_level(&self, k: usize) -> f64 {
        self.service_level[k]
    }

    pub fn service_levels(&self) -> &[f64] {
        &self.service_level
    }

    /// Total service weight of group `k`.
    pub fn group_weight(&self, k: usize) -> f64 {
        self.group_weight[k]
    }

    /// Minimum delivered weight for group `k`: the rounded-up threshold when
    /// all weights of the group are integer, the exact real one otherwise.
    pub fn threshold(&self, k: usize) -> f64 {
        self.threshold[k]
    }

    pub fn has_integral_weights(&self, k: usize) -> bool {
        self.integral_weights[k]
    }

    pub fn fleet_size(&self) -> usize {
        self.fleet_size
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Quantities of one group used by cuts and generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupQuantities {
    /// Minimum load `Z_k` able to satisfy the service level.
    pub z_min: f64,
    /// `⌈α_k Σ s_i⌉`.
    pub rhs_ceil: u64,
    /// Smallest demand quantity satisfying the service level (equals `z_min`).
    pub q_min: f64,
    /// Total demand of the group.
    pub q_max: f64,
}

/// Computes `Z_k`, the rounded threshold and the demand bounds of group `k`.
///
/// `Z_k` is obtained by a knapsack-style dynamic program over the delivered
/// weight, capped at the threshold. Requires integer service weights; for
/// fractional weights use [`Instance::threshold`], which keeps the exact real
/// threshold.
pub fn group_quantities(inst: &Instance, k: usize) -> Result<GroupQuantities, InstanceError> {
    if !inst.has_integral_weights(k) {
        return Err(InstanceError::NonIntegralWeights { group: k + 1 });
    }
    let target = inst.threshold(k) as usize;
    let mut best = vec![f64::INFINITY; target + 1];
    best[0] = 0.0;
    for &i in inst.group(k) {
        let s = inst.weight(i) as usize;
        let q = inst.demand(i);
        if s == 0 {
            continue;
        }
        for w in (1..=target).rev() {
            let from = best[w.saturating_sub(s)];
            if from + q < best[w] {
                best[w] = from + q;
            }
        }
    }
    let z_min = best[target];
    let q_max = inst.group(k).iter().map(|&i| inst.demand(i)).sum();
    Ok(GroupQuantities {
        z_min,
        rhs_ceil: target as u64,
        q_min: z_min,
        q_max,
    })
}

/// Right-hand side `2⌈Z_k / Q⌉` of the group capacity cut.
pub fn capacity_cut_rhs(gq: &GroupQuantities, capacity: f64) -> u64 {
    assert!(capacity > 0.0, "capacity must be positive");
    2 * ((gq.z_min / capacity) - CEIL_SLACK).ceil().max(0.0) as u64
}
