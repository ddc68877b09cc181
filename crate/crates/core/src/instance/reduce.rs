//! Special cases expressed as VRP-SL instances.

use super::format::default_weight;
use super::{EdgeWeight, Instance, InstanceData, InstanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// Private fleet with a common carrier; profits are outsourcing costs.
    Vrppfcc,
    /// Capacitated profitable tour; profits are prizes.
    Cptp,
    /// Every customer must be served, no profits.
    Cvrp,
    /// The input groups are clusters, each needing at least one visit.
    Gvrp,
}

impl std::str::FromStr for Reduction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vrppfcc" => Ok(Self::Vrppfcc),
            "cptp" => Ok(Self::Cptp),
            "cvrp" => Ok(Self::Cvrp),
            "gvrp" => Ok(Self::Gvrp),
            other => Err(format!("unknown reduction `{other}`")),
        }
    }
}

/// Rewrites groups, levels, profits and weights of `inst` for the given case.
pub fn reduce(special: Reduction, inst: &Instance) -> Result<Instance, InstanceError> {
    let mut data = inst.to_data();
    let n = inst.n();
    match special {
        Reduction::Vrppfcc | Reduction::Cptp => {
            data.groups = vec![(1..=n).collect()];
            data.service_level = vec![0.0];
        }
        Reduction::Cvrp => {
            data.groups = vec![(1..=n).collect()];
            data.service_level = vec![1.0];
            data.profit = vec![0.0; n + 1];
            for i in 1..=n {
                data.weight[i] = default_weight(data.demand[i]);
            }
        }
        Reduction::Gvrp => {
            data.profit = vec![0.0; n + 1];
            let mut levels = Vec::with_capacity(inst.group_count());
            for (k, g) in inst.groups().iter().enumerate() {
                let total: f64 = g.iter().map(|&i| inst.weight(i)).sum();
                let smallest = g
                    .iter()
                    .map(|&i| inst.weight(i))
                    .filter(|&s| s > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if !smallest.is_finite() {
                    return Err(InstanceError::Invalid(format!(
                        "cluster {} has no positive service weight",
                        k + 1
                    )));
                }
                levels.push((smallest / total).min(1.0));
            }
            data.service_level = levels;
        }
    }
    Instance::new(data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCustomer {
    pub coord: [f64; 2],
    pub demand: f64,
    /// Number of visits required over the horizon.
    pub frequency: usize,
    /// Allowed visit days, each `< horizon`.
    pub days: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicInput {
    pub name: String,
    pub depot: [f64; 2],
    pub customers: Vec<PeriodicCustomer>,
    pub horizon: usize,
    pub vehicles_per_day: usize,
    pub capacity: f64,
    pub edge_weight: EdgeWeight,
}

/// Periodic routing: each customer is duplicated once per allowed day and its
/// copies form a group with level `f / |D|` and unit weights, so exactly `f`
/// copies must be visited. Edges joining vertices of different days cost
/// `M = n * max d` (n the number of copies), which keeps every route within a
/// single day. The fleet is `vehicles_per_day * horizon` routes in total.
///
/// Returns the instance and, for each vertex, its `(customer, day)` origin.
pub fn reduce_pvrp(input: &PeriodicInput) -> Result<(Instance, Vec<(usize, usize)>), InstanceError> {
    if input.horizon == 0 {
        return Err(InstanceError::Invalid("empty horizon".into()));
    }
    let mut origin = vec![(usize::MAX, usize::MAX)];
    for (c, cust) in input.customers.iter().enumerate() {
        let fail = |message: String| InstanceError::Periodic { customer: c + 1, message };
        let mut days = cust.days.clone();
        days.sort_unstable();
        days.dedup();
        if days.len() != cust.days.len() {
            return Err(fail("repeated visit day".into()));
        }
        if let Some(&d) = days.iter().find(|&&d| d >= input.horizon) {
            return Err(fail(format!("day {d} outside the horizon")));
        }
        if cust.frequency == 0 || cust.frequency > days.len() {
            return Err(fail(format!(
                "frequency {} cannot be met with {} allowed days",
                cust.frequency,
                days.len()
            )));
        }
        if cust.demand > input.capacity {
            return Err(fail("demand exceeds vehicle capacity".into()));
        }
        for d in days {
            origin.push((c, d));
        }
    }
    let nodes = origin.len();
    let coord = |v: usize| {
        if v == 0 {
            input.depot
        } else {
            input.customers[origin[v].0].coord
        }
    };
    let metric = match input.edge_weight {
        EdgeWeight::Explicit => EdgeWeight::Euc2dExact,
        e => e,
    };
    let mut dist = vec![0.0; nodes * nodes];
    let mut max_d: f64 = 0.0;
    for i in 0..nodes {
        for j in 0..nodes {
            if i != j {
                let d = metric.euclidean(coord(i), coord(j));
                dist[i * nodes + j] = d;
                max_d = max_d.max(d);
            }
        }
    }
    let big_m = (nodes - 1) as f64 * max_d;
    for i in 1..nodes {
        for j in 1..nodes {
            if origin[i].1 != origin[j].1 {
                dist[i * nodes + j] = big_m;
            }
        }
    }
    let mut groups = vec![Vec::new(); input.customers.len()];
    for (v, &(c, _)) in origin.iter().enumerate().skip(1) {
        groups[c].push(v);
    }
    let service_level = groups
        .iter()
        .enumerate()
        .map(|(c, g)| input.customers[c].frequency as f64 / g.len() as f64)
        .collect();
    let mut demand = vec![0.0];
    demand.extend(origin[1..].iter().map(|&(c, _)| input.customers[c].demand));
    let mut weight = vec![1.0; nodes];
    weight[0] = 0.0;
    let inst = Instance::new(InstanceData {
        name: input.name.clone(),
        coords: (0..nodes).map(coord).collect(),
        dist: Some(dist),
        edge_weight: EdgeWeight::Explicit,
        demand,
        profit: vec![0.0; nodes],
        weight,
        groups,
        service_level,
        fleet_size: (input.vehicles_per_day * input.horizon).max(1),
        capacity: input.capacity,
    })?;
    Ok((inst, origin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::group_quantities;

    fn line(n: usize) -> Instance {
        let coords: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64, 0.0]).collect();
        let mut demand: Vec<f64> = (0..=n).map(|i| i as f64).collect();
        demand[0] = 0.0;
        Instance::new(InstanceData {
            name: "line".into(),
            coords,
            dist: None,
            edge_weight: EdgeWeight::Euc2d,
            profit: demand.iter().map(|q| q * 3.0).collect(),
            weight: demand.clone(),
            demand,
            groups: vec![(1..=n / 2).collect(), (n / 2 + 1..=n).collect()],
            service_level: vec![0.5, 0.5],
            fleet_size: 2,
            capacity: 10.0,
        })
        .unwrap()
    }

    #[test]
    fn cptp_and_vrppfcc_drop_service_levels() {
        for r in [Reduction::Cptp, Reduction::Vrppfcc] {
            let inst = reduce(r, &line(6)).unwrap();
            assert_eq!(inst.service_levels(), &[0.0]);
            assert_eq!(inst.profit(4), 12.0);
        }
    }

    #[test]
    fn cvrp_requires_everyone() {
        let inst = reduce(Reduction::Cvrp, &line(6)).unwrap();
        assert_eq!(inst.service_levels(), &[1.0]);
        assert!(inst.profits().iter().all(|&p| p == 0.0));
        assert_eq!(inst.threshold(0), 21.0);
    }

    #[test]
    fn gvrp_needs_the_lightest_member() {
        let inst = reduce(Reduction::Gvrp, &line(6)).unwrap();
        assert_eq!(group_quantities(&inst, 0).unwrap().rhs_ceil, 1);
        assert_eq!(group_quantities(&inst, 1).unwrap().rhs_ceil, 4);
    }

    fn periodic(freq: usize, days: Vec<usize>) -> PeriodicInput {
        PeriodicInput {
            name: "p".into(),
            depot: [0.0, 0.0],
            customers: vec![
                PeriodicCustomer { coord: [1.0, 0.0], demand: 2.0, frequency: freq, days },
                PeriodicCustomer { coord: [0.0, 2.0], demand: 1.0, frequency: 1, days: vec![1] },
            ],
            horizon: 3,
            vehicles_per_day: 1,
            capacity: 5.0,
            edge_weight: EdgeWeight::Euc2d,
        }
    }

    #[test]
    fn pvrp_duplicates_per_day() {
        let (inst, origin) = reduce_pvrp(&periodic(2, vec![0, 1, 2])).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.group(0).len(), 3);
        assert_eq!(group_quantities(&inst, 0).unwrap().rhs_ceil, 2);
        assert_eq!(inst.fleet_size(), 3);
        // vertex 2 is customer 0 on day 1, vertex 4 is customer 1 on day 1
        assert_eq!(origin[2], (0, 1));
        assert_eq!(origin[4], (1, 1));
        assert_eq!(inst.d(2, 4), 2.0);
        assert!(inst.d(1, 4) >= 4.0 * 2.0);
    }

    #[test]
    fn pvrp_rejects_impossible_frequency() {
        let err = reduce_pvrp(&periodic(3, vec![0, 2])).unwrap_err();
        assert!(matches!(err, InstanceError::Periodic { customer: 1, .. }));
        let err = reduce_pvrp(&periodic(1, vec![5])).unwrap_err();
        assert!(matches!(err, InstanceError::Periodic { customer: 1, .. }));
    }
}
