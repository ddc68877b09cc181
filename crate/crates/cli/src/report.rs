//! Per-run reports and the worst/average/best aggregate over repeated runs.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use vrpsl::{is_feasible, Instance, PenaltyState, RunOutcome, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    /// Travel distance plus lost profit of `routes`.
    pub cost: f64,
    pub feasible: bool,
    pub time_seconds: f64,
    pub iterations: u64,
    /// Delivered share of each group's service weight.
    pub service_levels: Vec<f64>,
    pub routes: Vec<Vec<usize>>,
}

impl RunReport {
    pub fn new(inst: &Instance, seed: u64, out: &RunOutcome) -> Self {
        let sol = out.best.to_report(inst);
        RunReport {
            instance: inst.name().to_string(),
            seed,
            cost: sol.cost,
            feasible: sol.feasible,
            time_seconds: out.elapsed.as_secs_f64(),
            iterations: out.iterations,
            service_levels: sol.service_levels,
            routes: sol.routes,
        }
    }

    /// Re-evaluates `routes` on `inst` and compares with the stored cost and
    /// feasibility flag.
    pub fn verify(&self, inst: &Instance) -> Result<()> {
        let sol = Solution::from_routes(self.routes.clone(), inst, &PenaltyState::new(inst.group_count()));
        let cost = sol.objective(inst);
        if (cost - self.cost).abs() > 1e-6 * cost.abs().max(1.0) {
            bail!("stored cost {} but routes evaluate to {cost}", self.cost);
        }
        let feasible = is_feasible(&sol, inst).feasible();
        if feasible != self.feasible {
            bail!("stored feasible flag {} but routes give {feasible}", self.feasible);
        }
        Ok(())
    }
}

/// Signed percentage gap of `value` over `reference`; negative values
/// improve on the reference.
pub fn gap(value: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) || !reference.is_finite() {
        bail!("reference must be positive, got {reference}");
    }
    Ok(100.0 * (value - reference) / reference)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub instance: String,
    pub runs: usize,
    pub feasible_runs: usize,
    /// Statistics over the feasible runs only; absent when none was feasible.
    pub worst: Option<f64>,
    pub avg: Option<f64>,
    pub best: Option<f64>,
    pub reference: Option<f64>,
    pub gap_worst: Option<f64>,
    pub gap_avg: Option<f64>,
    pub gap_best: Option<f64>,
    pub mean_time: f64,
}

impl AggregateRow {
    pub fn new(instance: &str, reports: &[RunReport], reference: Option<f64>) -> Result<Self> {
        let costs: Vec<f64> = reports.iter().filter(|r| r.feasible).map(|r| r.cost).collect();
        let (worst, avg, best) = if costs.is_empty() {
            (None, None, None)
        } else {
            let worst = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
            // clamp so rounding in the mean cannot break worst >= avg >= best
            let avg = (costs.iter().sum::<f64>() / costs.len() as f64).clamp(best, worst);
            (Some(worst), Some(avg), Some(best))
        };
        let g = |v: Option<f64>| -> Result<Option<f64>> {
            match (v, reference) {
                (Some(v), Some(r)) => gap(v, r).map(Some),
                _ => Ok(None),
            }
        };
        let mean_time = if reports.is_empty() {
            0.0
        } else {
            reports.iter().map(|r| r.time_seconds).sum::<f64>() / reports.len() as f64
        };
        Ok(AggregateRow {
            instance: instance.to_string(),
            runs: reports.len(),
            feasible_runs: costs.len(),
            gap_worst: g(worst)?,
            gap_avg: g(avg)?,
            gap_best: g(best)?,
            worst,
            avg,
            best,
            reference,
            mean_time,
        })
    }
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

/// Aligned text table with one line per row.
pub fn render_aggregates(rows: &[AggregateRow]) -> String {
    let header = ["Instance", "BKS", "Wor-10", "Avg-10", "Best-10", "Gap(%)", "T(s)"];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.instance.clone(),
                cell(r.reference, 2),
                cell(r.worst, 2),
                cell(r.avg, 2),
                cell(r.best, 2),
                cell(r.gap_best, 3),
                format!("{:.2}", r.mean_time),
            ]
        })
        .collect();
    table(&header, &body)
}

pub fn render_runs(reports: &[RunReport]) -> String {
    let header = ["Instance", "Seed", "Cost", "Feasible", "Iter", "T(s)", "Levels"];
    let body: Vec<[String; 7]> = reports
        .iter()
        .map(|r| {
            let levels: Vec<String> = r.service_levels.iter().map(|l| format!("{l:.3}")).collect();
            [
                r.instance.clone(),
                r.seed.to_string(),
                format!("{:.2}", r.cost),
                if r.feasible { "yes" } else { "no" }.to_string(),
                r.iterations.to_string(),
                format!("{:.2}", r.time_seconds),
                levels.join(" "),
            ]
        })
        .collect();
    table(&header, &body)
}

fn table<const N: usize>(header: &[&str; N], body: &[[String; N]]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in body {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            if i == 0 {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in body {
        line(row.iter().map(String::as_str).collect());
    }
    out
}
