//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use vrpsl::instance::{EdgeWeight, InstanceData};
use vrpsl::localsearch::{Anchor, Move};
use vrpsl::{Instance, PenaltyState, Solution};

/// Random instance with integer demands in `1..10`, service weights equal to
/// demand or drawn in `1..5`, `1..=k_max` groups and random service levels.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, k_max: usize) -> Instance {
    let coords: Vec<[f64; 2]> = (0..=n)
        .map(|_| [rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64])
        .collect();
    let mut demand: Vec<f64> = (0..=n).map(|_| rng.gen_range(1..10) as f64).collect();
    demand[0] = 0.0;
    let mut profit: Vec<f64> = (0..=n).map(|_| rng.gen_range(0..80) as f64).collect();
    profit[0] = 0.0;
    let mut weight = if rng.gen_bool(0.5) {
        demand.clone()
    } else {
        (0..=n).map(|_| rng.gen_range(1..5) as f64).collect()
    };
    weight[0] = 0.0;
    let k = rng.gen_range(1..=k_max.min(n));
    let mut groups = vec![Vec::new(); k];
    for c in 1..=n {
        groups[if c <= k { c - 1 } else { rng.gen_range(0..k) }].push(c);
    }
    let total: f64 = demand.iter().sum();
    Instance::new(InstanceData {
        name: "random".into(),
        coords,
        dist: None,
        edge_weight: if rng.gen_bool(0.5) { EdgeWeight::Euc2d } else { EdgeWeight::Euc2dExact },
        demand,
        profit,
        weight,
        groups,
        service_level: (0..k).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect(),
        fleet_size: rng.gen_range(1..=4),
        capacity: rng.gen_range(10.0..=total.max(10.0)).floor(),
    })
    .unwrap()
}

pub fn random_penalties(rng: &mut ChaCha8Rng, groups: usize) -> PenaltyState {
    PenaltyState {
        w_q: rng.gen_range(0.1..50.0),
        w_s: (0..groups).map(|_| rng.gen_range(0.1..100.0)).collect(),
    }
}

/// Minimum cost over every segmentation of `tour` into at most `m`
/// consecutive non-empty routes.
pub fn split_oracle(tour: &[usize], inst: &Instance, pen: &PenaltyState) -> f64 {
    if tour.is_empty() {
        return Solution::empty(inst, pen).cost;
    }
    let cuts = tour.len() - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cuts) {
        if mask.count_ones() as usize + 1 > inst.fleet_size() {
            continue;
        }
        let mut routes = vec![vec![tour[0]]];
        for (i, &c) in tour.iter().enumerate().skip(1) {
            if mask >> (i - 1) & 1 == 1 {
                routes.push(Vec::new());
            }
            routes.last_mut().unwrap().push(c);
        }
        best = best.min(Solution::from_routes(routes, inst, pen).cost);
    }
    best
}

/// Smallest total demand of a subset of group `k` meeting its threshold.
pub fn z_brute_force(inst: &Instance, k: usize) -> f64 {
    let members = inst.group(k);
    let need = (inst.service_level(k) * inst.group_weight(k) - 1e-9).ceil();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << members.len()) {
        let (mut s, mut q) = (0.0, 0.0);
        for (b, &c) in members.iter().enumerate() {
            if mask >> b & 1 == 1 {
                s += inst.weight(c);
                q += inst.demand(c);
            }
        }
        if s >= need {
            best = best.min(q);
        }
    }
    best
}

/// Checks a set of routes against the raw constraints: customer indices,
/// single service, vehicle loads, fleet size and the rounded service
/// thresholds.
pub fn check_routes(inst: &Instance, routes: &[Vec<usize>]) -> Result<(), String> {
    let n = inst.n();
    let nonempty = routes.iter().filter(|r| !r.is_empty()).count();
    if nonempty > inst.fleet_size() {
        return Err(format!("{nonempty} routes for a fleet of {}", inst.fleet_size()));
    }
    let mut seen = vec![false; n + 1];
    for (r, route) in routes.iter().enumerate() {
        let mut load = 0.0;
        for &c in route {
            if c == 0 || c > n {
                return Err(format!("route {r} visits unknown vertex {c}"));
            }
            if seen[c] {
                return Err(format!("customer {c} served twice"));
            }
            seen[c] = true;
            load += inst.demand(c);
        }
        if load > inst.capacity() + 1e-9 {
            return Err(format!("route {r} carries {load} > {}", inst.capacity()));
        }
    }
    for k in 0..inst.group_count() {
        let total: f64 = inst.group(k).iter().map(|&c| inst.weight(c)).sum();
        let got: f64 = inst.group(k).iter().filter(|&&c| seen[c]).map(|&c| inst.weight(c)).sum();
        let integral = inst.group(k).iter().all(|&c| inst.weight(c).fract() == 0.0);
        let need = if integral {
            (inst.service_level(k) * total - 1e-9).ceil()
        } else {
            inst.service_level(k) * total - 1e-9
        };
        if got < need {
            return Err(format!("group {} delivers {got} < {need}", k + 1));
        }
    }
    Ok(())
}

/// Travel distance plus lost profit, recomputed from the routes.
pub fn objective_of(inst: &Instance, routes: &[Vec<usize>]) -> f64 {
    let mut total = inst.total_profit();
    for r in routes.iter().filter(|r| !r.is_empty()) {
        let mut prev = 0;
        for &c in r {
            total += inst.d(prev, c) - inst.profit(c);
            prev = c;
        }
        total += inst.d(prev, 0);
    }
    total
}

pub fn random_solution(rng: &mut ChaCha8Rng, inst: &Instance, pen: &PenaltyState) -> Solution {
    let mut visited: Vec<usize> = inst.customers().filter(|_| rng.gen_bool(0.7)).collect();
    visited.shuffle(rng);
    let m = inst.fleet_size();
    let mut routes = vec![Vec::new(); m];
    for c in visited {
        routes[rng.gen_range(0..m)].push(c);
    }
    Solution::from_routes(routes, inst, pen)
}

pub fn random_move(rng: &mut ChaCha8Rng, inst: &Instance) -> Move {
    let n = inst.n();
    let c = |rng: &mut ChaCha8Rng| rng.gen_range(1..=n);
    let anchor = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.7) {
            Anchor::After(rng.gen_range(1..=n))
        } else {
            Anchor::RouteStart(rng.gen_range(0..inst.fleet_size()))
        }
    };
    match rng.gen_range(0..10) {
        0 => Move::TwoOpt { u: c(rng), v: c(rng) },
        1 => Move::TwoOptStar { u: c(rng), v: c(rng) },
        2 => Move::Swap11 { u: c(rng), v: c(rng) },
        3 => Move::Swap21 { u: c(rng), v: c(rng) },
        4 => Move::Swap22 { u: c(rng), v: c(rng) },
        5 => Move::Relocate1 { u: c(rng), to: anchor(rng) },
        6 => Move::Relocate2 { u: c(rng), to: anchor(rng) },
        7 => Move::Remove { u: c(rng) },
        8 => Move::Add { v: c(rng), to: anchor(rng) },
        _ => Move::Replace { u: c(rng), v: c(rng) },
    }
}
