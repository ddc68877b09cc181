//! Acceptance checks, one line per criterion.
//!
//! The CE benchmark instances are not shipped with the crate. Point
//! `VRPSL_CE_DIR` at a directory holding `CE-01` .. `CE-14` (optionally with
//! a `.txt` or `.vrp` extension) in the column format read by
//! `InstanceFormat::Vrppfcc`; `data/vrppfcc/` under the workspace root is
//! tried otherwise.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{
    check_routes, random_instance, random_move, random_penalties, random_solution, split_oracle, z_brute_force,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use vrpsl::genetic::{adapt, feasibility_targets, RunOutcome};
use vrpsl::instance::{group_quantities, reduce, EdgeWeight, InstanceData, Reduction};
use vrpsl::localsearch::{apply, delta_cost};
use vrpsl::pricing::{oracle_elementary, price_with, DualVector, LabelingOptions, NgConfig};
use vrpsl::solution::solution_cost;
use vrpsl::{is_feasible, parse_instance, run, split, Instance, InstanceFormat, SearchParams, Solution};

const CE_BKS: [(&str, f64); 14] = [
    ("CE-01", 1119.47),
    ("CE-02", 1814.52),
    ("CE-03", 1919.05),
    ("CE-04", 2505.39),
    ("CE-05", 3081.59),
    ("CE-06", 1207.47),
    ("CE-07", 2004.53),
    ("CE-08", 2052.05),
    ("CE-09", 2419.84),
    ("CE-10", 3373.84),
    ("CE-11", 2330.94),
    ("CE-12", 1952.86),
    ("CE-13", 2858.83),
    ("CE-14", 2213.02),
];

type Outcome = Result<String, String>;

fn criterion(results: &mut Vec<bool>, name: &str, check: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let outcome = match catch_unwind(AssertUnwindSafe(check)) {
        Ok(r) => r,
        Err(e) => Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
        Err(detail) => println!("FAIL {name}: {detail} ({secs:.1}s)"),
    }
    results.push(outcome.is_ok());
}

fn ce_dir() -> PathBuf {
    match std::env::var_os("VRPSL_CE_DIR") {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/vrppfcc"),
    }
}

fn load_ce(name: &str) -> Result<Instance, String> {
    let dir = ce_dir();
    for ext in ["", ".txt", ".vrp", ".dat"] {
        let path = dir.join(format!("{name}{ext}"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            return parse_instance(&text, InstanceFormat::Vrppfcc)
                .map(|i| i.with_name(name))
                .map_err(|e| format!("{}: {e}", path.display()));
        }
    }
    Err(format!("instance {name} not found in {} (set VRPSL_CE_DIR)", dir.display()))
}

/// Ten independent runs with seeds 1..=10, spread over the available cores.
fn best_of_ten(inst: &Instance) -> (Vec<RunOutcome>, f64) {
    let params = &SearchParams::for_instance(inst);
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut outcomes: Vec<(u64, RunOutcome)> = Vec::new();
    let seeds: Vec<u64> = (1..=10).collect();
    for chunk in seeds.chunks(threads) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|&seed| (seed, s.spawn(move || run(inst, params, seed)))).collect();
            for (seed, h) in handles {
                outcomes.push((seed, h.join().unwrap()));
            }
        });
    }
    let runs: Vec<RunOutcome> = outcomes.into_iter().map(|(_, o)| o).collect();
    let best = runs.iter().filter(|o| o.feasible).map(|o| o.best.cost).fold(f64::INFINITY, f64::min);
    (runs, best)
}

fn check_outcome(inst: &Instance, params: &SearchParams, out: &RunOutcome) -> Result<(), String> {
    let h = &out.stats.incumbent_history;
    if !h.windows(2).all(|w| w[1].1 <= w[0].1) {
        return Err(format!("{}: incumbent increased", inst.name()));
    }
    let cap = params.mu + params.lambda;
    if out.stats.max_feasible_size > cap || out.stats.max_infeasible_size > cap {
        return Err(format!("{}: sub-population above {cap}", inst.name()));
    }
    if out.feasible {
        check_routes(inst, &out.best.route_lists()).map_err(|e| format!("{}: {e}", inst.name()))?;
    }
    Ok(())
}

fn ce_single(name: &str, bks: f64) -> Outcome {
    let inst = load_ce(name)?;
    let (runs, best) = best_of_ten(&inst);
    let slowest = runs.iter().map(|o| o.elapsed).max().unwrap_or_default();
    let got = format!("{best:.2}");
    let want = format!("{bks:.2}");
    let detail = format!("best-of-10 {got} (target {want}), slowest run {:.1}s", slowest.as_secs_f64());
    if got == want && slowest <= Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ce_set() -> Outcome {
    let start = Instant::now();
    let mut gaps = Vec::new();
    let mut missing = Vec::new();
    for (name, bks) in CE_BKS {
        match load_ce(name) {
            Ok(inst) => {
                let (_, best) = best_of_ten(&inst);
                gaps.push(100.0 * (best - bks) / bks);
            }
            Err(_) => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(format!("{} of 14 instances missing from {}", missing.len(), ce_dir().display()));
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let total = start.elapsed();
    let detail = format!("mean gap {mean:.3}%, total {:.0}s", total.as_secs_f64());
    if mean <= 0.25 && total <= Duration::from_secs(1800) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn split_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, n, 3);
        let pen = random_penalties(&mut rng, inst.group_count());
        let mut tour: Vec<usize> = inst.customers().collect();
        tour.shuffle(&mut rng);
        tour.truncate(rng.gen_range(0..=n));
        let got = split(&tour, &inst, &pen).cost;
        let want = split_oracle(&tour, &inst, &pen);
        let err = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(err);
        if err > 1e-12 {
            return Err(format!("instance {t}: split {got} vs oracle {want}"));
        }
    }
    Ok(format!("1000 instances, largest relative difference {worst:.1e}"))
}

fn pricing_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let no_dom = LabelingOptions { dominance: false, heuristic: false };
    for t in 0..200 {
        let n = rng.gen_range(1..=7);
        let inst = random_instance(&mut rng, n, 2);
        let duals = DualVector::new(
            rng.gen_range(-30.0..30.0),
            &(0..n).map(|_| rng.gen_range(0.0..100.0)).collect::<Vec<_>>(),
        );
        let ng = NgConfig::full(&inst);
        let oracle = oracle_elementary(&inst, &duals, 10).map_err(|e| e.to_string())?.map(|r| r.reduced_cost);
        let exact = price_with(&inst, &duals, &ng, LabelingOptions::default()).unwrap().min_reduced_cost();
        let plain = price_with(&inst, &duals, &ng, no_dom).unwrap().min_reduced_cost();
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
            (None, None) => true,
            _ => false,
        };
        if !close(oracle, exact) || !close(exact, plain) {
            return Err(format!("pair {t}: oracle {oracle:?}, labeling {exact:?}, no dominance {plain:?}"));
        }
    }
    Ok("200 (instance, dual) pairs agree".into())
}

fn z_dp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut groups = 0;
    for t in 0..100 {
        let n = rng.gen_range(1..=15);
        let inst = random_instance(&mut rng, n, 3);
        for k in 0..inst.group_count() {
            if inst.group(k).len() > 15 {
                continue;
            }
            let dp = group_quantities(&inst, k).map_err(|e| e.to_string())?.z_min;
            let bf = z_brute_force(&inst, k);
            if dp != bf {
                return Err(format!("instance {t} group {k}: dp {dp} vs enumeration {bf}"));
            }
            groups += 1;
        }
    }
    Ok(format!("{groups} groups on 100 instances"))
}

/// Benchmark solves on generated instances: several sizes, group counts and
/// service levels.
fn benchmark_solves() -> Vec<(Instance, SearchParams, RunOutcome)> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut out = Vec::new();
    for (i, n) in [15usize, 25, 40, 60].into_iter().enumerate() {
        for k in [1usize, 3] {
            // redraw until the groups' minimum loads fit the fleet with slack
            let inst = loop {
                let inst = random_instance(&mut rng, n, k);
                let need: f64 = (0..inst.group_count()).map(|g| group_quantities(&inst, g).unwrap().z_min).sum();
                if need <= 0.7 * inst.fleet_size() as f64 * inst.capacity() {
                    break inst.with_name(format!("bench-{n}-{k}"));
                }
            };
            let params = SearchParams::for_instance(&inst).with_it_ni(2000);
            let o = run(&inst, &params, i as u64 * 10 + k as u64);
            out.push((inst, params, o));
        }
    }
    out
}

fn feasibility_soundness(solves: &[(Instance, SearchParams, RunOutcome)]) -> Outcome {
    let mut feasible = 0;
    for (inst, _, o) in solves {
        if o.feasible {
            check_routes(inst, &o.best.route_lists()).map_err(|e| format!("{}: {e}", inst.name()))?;
            if !is_feasible(&o.best, inst).feasible() {
                return Err(format!("{}: flagged feasible, checker disagrees", inst.name()));
            }
            feasible += 1;
        }
    }
    Ok(format!("{feasible} of {} runs feasible, all verified", solves.len()))
}

fn monotone_and_bounded(solves: &[(Instance, SearchParams, RunOutcome)]) -> Outcome {
    for (inst, params, o) in solves {
        check_outcome(inst, params, o)?;
    }
    Ok(format!("{} solves", solves.len()))
}

fn trivial_optima() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let params = SearchParams::default().with_it_ni(300);
    for t in 0..5 {
        let n = rng.gen_range(3..12);
        let data = random_instance(&mut rng, n, 2).to_data();
        let k = data.groups.len();
        let zero = Instance::new(InstanceData { profit: vec![0.0; n + 1], service_level: vec![0.0; k], ..data })
            .unwrap();
        let o = run(&zero, &params, t);
        if !o.feasible || o.best.cost != 0.0 {
            return Err(format!("zero instance {t}: cost {}", o.best.cost));
        }
    }
    for t in 0..5 {
        let c = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let q = rng.gen_range(1..10) as f64;
        let inst = Instance::new(InstanceData {
            name: "one".into(),
            coords: vec![[0.0, 0.0], c],
            dist: None,
            edge_weight: if t % 2 == 0 { EdgeWeight::Euc2d } else { EdgeWeight::Euc2dExact },
            demand: vec![0.0, q],
            profit: vec![0.0, rng.gen_range(0..50) as f64],
            weight: vec![0.0, q],
            groups: vec![vec![1]],
            service_level: vec![1.0],
            fleet_size: 1,
            capacity: q + rng.gen_range(0..5) as f64,
        })
        .unwrap();
        let o = run(&inst, &params, t);
        let want = 2.0 * inst.d(0, 1);
        if !o.feasible || o.best.cost != want {
            return Err(format!("one-customer instance {t}: cost {} vs {want}", o.best.cost));
        }
    }
    Ok("5 zero instances cost 0, 5 one-customer instances cost 2 d(0,c)".into())
}

fn delta_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    while checked < 100_000 {
        let n = rng.gen_range(2..15);
        let inst = random_instance(&mut rng, n, 3);
        let pen = random_penalties(&mut rng, inst.group_count());
        let sol = random_solution(&mut rng, &inst, &pen);
        let before = solution_cost(&sol, &inst, &pen);
        for _ in 0..50 {
            let mv = random_move(&mut rng, &inst);
            let Some(delta) = delta_cost(&mv, &sol, &inst, &pen) else {
                continue;
            };
            let after = solution_cost(&apply(&mv, &sol, &inst, &pen), &inst, &pen);
            let err = (delta - (after - before)).abs() / before.abs().max(1.0);
            worst = worst.max(err);
            if err > 1e-9 {
                return Err(format!("{mv:?}: delta {delta} vs {}", after - before));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} moves, largest relative error {worst:.1e}"))
}

fn penalty_rule() -> Outcome {
    for k in [1usize, 2, 5] {
        let (lo, hi) = feasibility_targets(k);
        let e = 1.0 / (1.0 + k as f64);
        if (lo - 0.15f64.powf(e)).abs() > 1e-15 || (hi - 0.35f64.powf(e)).abs() > 1e-15 || !(lo < hi && hi < 1.0) {
            return Err(format!("targets for K={k}: {lo}, {hi}"));
        }
        let up = adapt(10.0, lo - 0.01, lo, hi);
        let down = adapt(10.0, hi + 0.01, lo, hi);
        let same = adapt(10.0, (lo + hi) / 2.0, lo, hi);
        if (up - 12.0).abs() > 1e-12 || (down - 8.5).abs() > 1e-12 || same != 10.0 {
            return Err(format!("K={k}: got {up}, {down}, {same}"));
        }
    }
    Ok("increase, decrease and hold branches at K = 1, 2, 5".into())
}

fn cptp_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut instances = Vec::new();
    for n in [10usize, 20, 35, 50] {
        instances.push(reduce(Reduction::Cptp, &random_instance(&mut rng, n, 2)).unwrap());
    }
    for (name, _) in CE_BKS.iter().take(2) {
        if let Ok(ce) = load_ce(name) {
            instances.push(reduce(Reduction::Cptp, &ce).unwrap());
        }
    }
    for (t, inst) in instances.iter().enumerate() {
        let empty = Solution::empty(inst, &vrpsl::PenaltyState::new(inst.group_count()));
        if !is_feasible(&empty, inst).feasible() {
            return Err(format!("instance {t}: empty solution infeasible"));
        }
        let params = SearchParams::for_instance(inst).with_it_ni(2000);
        let o = run(inst, &params, t as u64);
        check_outcome(inst, &params, &o)?;
        let prizes = inst.total_profit();
        if !o.feasible || o.best.cost > prizes + 1e-9 {
            return Err(format!("instance {t}: cost {} above total prize {prizes}", o.best.cost));
        }
    }
    Ok(format!("{} instances, all at or below the total prize", instances.len()))
}

fn main() {
    let mut results = Vec::new();
    criterion(&mut results, "split optimality", split_optimality);
    criterion(&mut results, "pricing matches elementary oracle", pricing_correctness);
    criterion(&mut results, "Z_k dynamic program", z_dp);
    let solves = benchmark_solves();
    criterion(&mut results, "feasibility soundness", || feasibility_soundness(&solves));
    criterion(&mut results, "trivial optima", trivial_optima);
    criterion(&mut results, "delta-cost exactness", delta_exactness);
    criterion(&mut results, "penalty rule", penalty_rule);
    criterion(&mut results, "monotone incumbent and population bounds", || monotone_and_bounded(&solves));
    criterion(&mut results, "CPTP sanity", cptp_sanity);
    criterion(&mut results, "CE-01 best-of-10", || ce_single("CE-01", 1119.47));
    criterion(&mut results, "CE-06 best-of-10", || ce_single("CE-06", 1207.47));
    criterion(&mut results, "CE set mean gap", ce_set);
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
