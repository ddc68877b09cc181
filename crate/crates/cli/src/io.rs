//! Reading instances and dual vectors from disk.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use vrpsl::instance::{reduce, Reduction};
use vrpsl::pricing::DualVector;
use vrpsl::{parse_instance, Instance, InstanceFormat};

/// Guesses the format from the text: TSPLIB headers are the canonical
/// format when they carry any extension section and plain CVRPLIB otherwise;
/// headerless files are told apart by the width of their first line.
pub fn sniff_format(text: &str) -> InstanceFormat {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().unwrap_or("");
    if first.contains(':') || first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
        let extended = ["PROFIT_SECTION", "SERVICE_WEIGHT_SECTION", "GROUP_SECTION", "SERVICE_LEVEL_SECTION"]
            .iter()
            .any(|s| text.contains(s));
        return if extended { InstanceFormat::Vrpsl } else { InstanceFormat::Cvrplib };
    }
    match first.split_whitespace().count() {
        3 => InstanceFormat::Cptp,
        _ => InstanceFormat::Vrppfcc,
    }
}

pub fn load_instance(path: &Path, format: Option<InstanceFormat>, mode: Option<Reduction>) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let format = format.unwrap_or_else(|| sniff_format(&text));
    let mut inst = parse_instance(&text, format).with_context(|| format!("cannot parse {}", path.display()))?;
    if inst.name().is_empty() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        inst = inst.with_name(stem);
    }
    match mode {
        Some(m) => reduce(m, &inst).with_context(|| format!("cannot apply {m:?} to {}", path.display())),
        None => Ok(inst),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DualJson {
    /// `[γ, β_1, ..., β_n]`
    Flat(Vec<f64>),
    Object {
        gamma: f64,
        beta: Vec<f64>,
        /// `[i, j, value]` triples, applied symmetrically.
        #[serde(default)]
        rho: Vec<(usize, usize, f64)>,
    },
}

/// Parses duals given either inline as JSON or as a path to a JSON file.
pub fn parse_duals(arg: &str, inst: &Instance) -> Result<DualVector> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("cannot read duals from {arg}"))?
    };
    let parsed: DualJson = serde_json::from_str(&text).context("duals must be `[gamma, beta_1..beta_n]` or an object")?;
    let n = inst.n();
    let duals = match parsed {
        DualJson::Flat(v) => {
            if v.is_empty() {
                bail!("empty dual vector");
            }
            DualVector::new(v[0], &v[1..])
        }
        DualJson::Object { gamma, beta, rho } => {
            if beta.len() != n {
                bail!("expected {n} customer duals, got {}", beta.len());
            }
            let mut d = DualVector::new(gamma, &beta);
            for (i, j, v) in rho {
                if i > n || j > n {
                    bail!("edge adjustment ({i}, {j}) outside 0..={n}");
                }
                d.set_rho(i, j, v);
            }
            d
        }
    };
    duals.validate(inst)?;
    Ok(duals)
}
