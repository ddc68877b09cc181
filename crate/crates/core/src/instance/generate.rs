//! Seeded derivation of grouped instances from CVRP and CPTP bases.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{group_quantities, EdgeWeight, Instance, InstanceError};

/// Service levels drawn for each group.
pub const LEVELS: [f64; 7] = [0.45, 0.55, 0.65, 0.75, 0.85, 0.95, 1.0];

/// Group configurations: one group, or 2/5 groups built randomly (R) or by
/// spatial clustering (C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupConfig {
    One,
    TwoR,
    TwoC,
    FiveR,
    FiveC,
}

impl GroupConfig {
    pub const ALL: [GroupConfig; 5] = [
        GroupConfig::One,
        GroupConfig::TwoR,
        GroupConfig::TwoC,
        GroupConfig::FiveR,
        GroupConfig::FiveC,
    ];

    pub fn groups(self) -> usize {
        match self {
            GroupConfig::One => 1,
            GroupConfig::TwoR | GroupConfig::TwoC => 2,
            GroupConfig::FiveR | GroupConfig::FiveC => 5,
        }
    }

    pub fn clustered(self) -> bool {
        matches!(self, GroupConfig::TwoC | GroupConfig::FiveC)
    }

    pub fn label(self) -> &'static str {
        match self {
            GroupConfig::One => "1",
            GroupConfig::TwoR => "2R",
            GroupConfig::TwoC => "2C",
            GroupConfig::FiveR => "5R",
            GroupConfig::FiveC => "5C",
        }
    }
}

impl std::str::FromStr for GroupConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        GroupConfig::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown group configuration `{s}`"))
    }
}

/// Set S1: profits `round(h * q_i)` with `h ~ U[0.75, 2.25]`, then grouping.
pub fn generate_s1(seed: u64, base: &Instance, config: GroupConfig) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = base.to_data();
    for i in 1..data.profit.len() {
        let h = rng.gen_range(0.75..=2.25);
        data.profit[i] = (h * data.demand[i]).round();
    }
    if data.edge_weight == EdgeWeight::Euc2dExact {
        data.edge_weight = EdgeWeight::Euc2d;
    }
    let inst = Instance::new(data)?;
    let name = format!("{}-S1-{}", base.name(), config.label());
    Ok(assign_groups_with(&mut rng, &inst, config)?.with_name(name))
}

/// Set S2: capacity 500, halved profits, grouping, and a fleet size from the
/// group demand bounds `m = ⌈Σ_k (Qmin_k + Qmax_k) / (2Q)⌉`.
pub fn generate_s2(seed: u64, base: &Instance, config: GroupConfig) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = base.to_data();
    data.capacity = 500.0;
    for p in data.profit.iter_mut() {
        *p *= 0.5;
    }
    if data.edge_weight == EdgeWeight::Euc2dExact {
        data.edge_weight = EdgeWeight::Euc2d;
    }
    let grouped = assign_groups_with(&mut rng, &Instance::new(data)?, config)?;
    let fleet = s2_fleet_size(&grouped)?;
    let mut data = grouped.to_data();
    data.fleet_size = fleet;
    data.name = format!("{}-S2-{}", base.name(), config.label());
    Instance::new(data)
}

pub(crate) fn s2_fleet_size(inst: &Instance) -> Result<usize, InstanceError> {
    let mut total = 0.0;
    for k in 0..inst.group_count() {
        let gq = group_quantities(inst, k)?;
        total += gq.q_min + gq.q_max;
    }
    Ok(((total / (2.0 * inst.capacity())) - 1e-9).ceil().max(1.0) as usize)
}

/// Partitions the customers into groups, draws service levels and sets
/// `s_i = q_i`.
pub fn assign_groups(seed: u64, inst: &Instance, config: GroupConfig) -> Result<Instance, InstanceError> {
    assign_groups_with(&mut ChaCha8Rng::seed_from_u64(seed), inst, config)
}

pub(crate) fn assign_groups_with<R: Rng>(
    rng: &mut R,
    inst: &Instance,
    config: GroupConfig,
) -> Result<Instance, InstanceError> {
    let n = inst.n();
    let k = config.groups();
    if k > n {
        return Err(InstanceError::TooManyGroups { groups: k, customers: n });
    }
    let label: Vec<usize> = if k == 1 {
        vec![0; n]
    } else if config.clustered() {
        kmeans(rng, &inst.coords()[1..], k)
    } else {
        (0..n).map(|_| rng.gen_range(0..k)).collect()
    };
    let label = fill_empty_groups(rng, label, k);
    let mut groups = vec![Vec::new(); k];
    for (c, &g) in label.iter().enumerate() {
        groups[g].push(c + 1);
    }
    let levels = (0..k).map(|_| *LEVELS.choose(rng).unwrap()).collect();
    let mut data = inst.to_data();
    data.groups = groups;
    data.service_level = levels;
    data.weight = data.demand.clone();
    Instance::new(data)
}

/// Moves a random member of the largest group into each empty group.
fn fill_empty_groups<R: Rng>(rng: &mut R, mut label: Vec<usize>, k: usize) -> Vec<usize> {
    loop {
        let mut size = vec![0usize; k];
        for &g in &label {
            size[g] += 1;
        }
        let Some(empty) = size.iter().position(|&s| s == 0) else {
            return label;
        };
        let largest = (0..k).max_by_key(|&g| (size[g], std::cmp::Reverse(g))).unwrap();
        let members: Vec<usize> = (0..label.len()).filter(|&c| label[c] == largest).collect();
        label[*members.choose(rng).unwrap()] = empty;
    }
}

fn sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Lloyd's k-means with farthest-first seeding. The first center is a random
/// point; later ones are the point farthest from all chosen centers. Ties
/// go to the lowest index, both for seeding and for assignment.
pub(crate) fn kmeans<R: Rng>(rng: &mut R, points: &[[f64; 2]], k: usize) -> Vec<usize> {
    let mut centers = vec![points[rng.gen_range(0..points.len())]];
    let mut nearest: Vec<f64> = points.iter().map(|&p| sq(p, centers[0])).collect();
    while centers.len() < k {
        let mut best = 0;
        for i in 1..points.len() {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        let c = points[best];
        centers.push(c);
        for (i, &p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(sq(p, c));
        }
    }
    let mut label = vec![usize::MAX; points.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, &p) in points.iter().enumerate() {
            let mut g = 0;
            for c in 1..k {
                if sq(p, centers[c]) < sq(p, centers[g]) {
                    g = c;
                }
            }
            if label[i] != g {
                label[i] = g;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sum = vec![[0.0, 0.0]; k];
        let mut cnt = vec![0usize; k];
        for (i, &p) in points.iter().enumerate() {
            sum[label[i]][0] += p[0];
            sum[label[i]][1] += p[1];
            cnt[label[i]] += 1;
        }
        for c in 0..k {
            if cnt[c] > 0 {
                centers[c] = [sum[c][0] / cnt[c] as f64, sum[c][1] / cnt[c] as f64];
            }
        }
    }
    label
}
