//! Command-line front end: solve, generate, price, bench and gap.

pub mod io;
pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use vrpsl::instance::{generate_s1, generate_s2, GroupConfig, Reduction};
use vrpsl::pricing::{price_with, LabelingOptions, NgConfig, DEFAULT_NG_SIZE};
use vrpsl::{run, serialize_instance, Instance, InstanceFormat, SearchParams};

pub use report::{gap, render_aggregates, render_runs, AggregateRow, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vrpsl", version, about = "Vehicle routing with service levels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the genetic search on one instance.
    Solve(SolveArgs),
    /// Derive grouped instances from base files.
    Generate(GenerateArgs),
    /// Search for routes of negative reduced cost.
    Price(PriceArgs),
    /// Repeated runs over several instances with a summary table.
    Bench(BenchArgs),
    /// Percentage gap of values over a reference.
    Gap(GapArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input format; guessed from the file contents when omitted.
    #[arg(long)]
    pub format: Option<InstanceFormat>,
    /// Special case to reduce the instance to before solving.
    #[arg(long)]
    pub mode: Option<Reduction>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// First seed; run r uses seed + r.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    /// Iterations without improvement before stopping.
    #[arg(long)]
    pub it_ni: Option<u64>,
    /// Wall-clock limit per run, in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<u64>,
}

impl SearchArgs {
    fn params(&self, inst: &Instance) -> Result<SearchParams> {
        let mut p = SearchParams::for_instance(inst);
        if let Some(it) = self.it_ni {
            p = p.with_it_ni(it);
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) || !t.is_finite() {
                bail!("--time-limit must be a positive number of seconds");
            }
            p.time_limit = Some(Duration::from_secs_f64(t));
        }
        p.max_iterations = self.max_iterations;
        p.validate().map_err(anyhow::Error::msg)?;
        Ok(p)
    }

    fn seeds(&self) -> Result<Vec<u64>> {
        if self.runs == 0 {
            bail!("--runs must be at least 1");
        }
        (0..self.runs)
            .map(|r| self.seed.checked_add(r).context("seed range overflows"))
            .collect()
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Directory receiving one solution file per run and `report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InstanceSet {
    /// Profits from demands on CVRP bases.
    S1,
    /// Capacity 500 and halved prizes on CPTP bases.
    S2,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Base instance files.
    #[arg(long, required = true, num_args = 1..)]
    pub base: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = InstanceSet::S1)]
    pub set: InstanceSet,
    /// Group configurations, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = GroupConfig::ALL.map(|c| c.label().to_string()))]
    pub configs: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub format: Option<InstanceFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// `[gamma, beta_1, ..., beta_n]`, an object with `gamma`, `beta` and
    /// optional `rho` triples, or a path to a file holding either.
    #[arg(long)]
    pub duals: String,
    #[arg(long, default_value_t = DEFAULT_NG_SIZE)]
    pub ng_size: usize,
    /// Keep one label per vertex and load instead of exact dominance.
    #[arg(long)]
    pub heuristic: bool,
    /// Print at most this many routes.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// JSON object mapping instance names to reference values.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Write all reports and rows to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long)]
    pub reference: f64,
    #[arg(required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    reports: &'a [RunReport],
    aggregate: &'a AggregateRow,
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    reports: &'a [RunReport],
    rows: &'a [AggregateRow],
    mean_gap_best: Option<f64>,
}

#[derive(Serialize)]
struct PricedOutput {
    visits: Vec<usize>,
    reduced_cost: f64,
    load: u64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        Command::Price(a) => price(a),
        Command::Bench(a) => bench(a),
        Command::Gap(a) => {
            for v in a.values {
                println!("{:.6}", gap(v, a.reference)?);
            }
            Ok(EXIT_OK)
        }
    }
}

/// Pool capped by `VRPSL_THREADS` when set.
fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("VRPSL_THREADS") {
        let t: usize = v.trim().parse().with_context(|| format!("VRPSL_THREADS must be a positive integer, got `{v}`"))?;
        if t == 0 {
            bail!("VRPSL_THREADS must be a positive integer");
        }
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

/// Runs every (instance, seed) pair; reports come back in input order.
fn run_all(jobs: &[(&Instance, SearchParams, u64)]) -> Result<Vec<RunReport>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(inst, params, seed)| RunReport::new(inst, *seed, &run(inst, params, *seed)))
            .collect()
    }))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn solve(a: SolveArgs) -> Result<i32> {
    let inst = io::load_instance(&a.instance, a.input.format, a.input.mode)?;
    let params = a.search.params(&inst)?;
    let jobs: Vec<_> = a.search.seeds()?.into_iter().map(|s| (&inst, params.clone(), s)).collect();
    let reports = run_all(&jobs)?;
    let row = AggregateRow::new(inst.name(), &reports, None)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (r, (_, _, seed)) in reports.iter().zip(&jobs) {
            let sol = vrpsl::Solution::from_routes(r.routes.clone(), &inst, &vrpsl::PenaltyState::new(inst.group_count()));
            write_json(&dir.join(format!("{}-seed{seed}.json", inst.name())), &sol.to_report(&inst))?;
        }
        write_json(&dir.join("report.json"), &SolveOutput { reports: &reports, aggregate: &row })?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&SolveOutput { reports: &reports, aggregate: &row })?);
    } else {
        print!("{}", render_runs(&reports));
        if reports.len() > 1 {
            println!();
            print!("{}", render_aggregates(std::slice::from_ref(&row)));
        }
    }
    Ok(if reports.iter().any(|r| r.feasible) { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn generate(a: GenerateArgs) -> Result<i32> {
    let configs: Vec<GroupConfig> = a
        .configs
        .iter()
        .map(|c| c.parse().map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    for path in &a.base {
        let base = io::load_instance(path, a.format, None)?;
        for &config in &configs {
            let inst = match a.set {
                InstanceSet::S1 => generate_s1(a.seed, &base, config),
                InstanceSet::S2 => generate_s2(a.seed, &base, config),
            }
            .with_context(|| format!("cannot derive {} from {}", config.label(), path.display()))?;
            let file = a.out.join(format!("{}.vrp", inst.name()));
            fs::write(&file, serialize_instance(&inst)).with_context(|| format!("cannot write {}", file.display()))?;
            println!("{}", file.display());
        }
    }
    Ok(EXIT_OK)
}

fn price(a: PriceArgs) -> Result<i32> {
    let inst = io::load_instance(&a.instance, a.input.format, a.input.mode)?;
    let duals = io::parse_duals(&a.duals, &inst)?;
    if a.ng_size == 0 {
        bail!("--ng-size must be at least 1");
    }
    let ng = NgConfig::nearest(&inst, a.ng_size);
    let opts = LabelingOptions { dominance: true, heuristic: a.heuristic };
    let res = price_with(&inst, &duals, &ng, opts)?;
    let routes: Vec<PricedOutput> = res
        .routes
        .iter()
        .take(a.limit.unwrap_or(usize::MAX))
        .map(|r| PricedOutput { visits: r.visits.clone(), reduced_cost: r.reduced_cost, load: r.load })
        .collect();
    if a.json {
        let out = serde_json::json!({
            "routes": routes,
            "negative_routes": res.routes.len(),
            "min_reduced_cost": res.min_reduced_cost(),
            "labels": res.labels_created,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{} routes with negative reduced cost, {} labels", res.routes.len(), res.labels_created);
        if let Some(m) = res.min_reduced_cost() {
            println!("minimum reduced cost {m:.6}");
        }
        for r in &routes {
            let visits: Vec<String> = r.visits.iter().map(usize::to_string).collect();
            println!("{:>14.6}  load {:>5}  0 {} 0", r.reduced_cost, r.load, visits.join(" "));
        }
    }
    Ok(EXIT_OK)
}

fn read_references(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} must map instance names to numbers", path.display()))
}

fn bench(a: BenchArgs) -> Result<i32> {
    let refs = match &a.reference {
        Some(p) => read_references(p)?,
        None => BTreeMap::new(),
    };
    let instances: Vec<Instance> = a
        .instances
        .iter()
        .map(|p| io::load_instance(p, a.input.format, a.input.mode))
        .collect::<Result<_>>()?;
    let seeds = a.search.seeds()?;
    let mut jobs = Vec::new();
    for inst in &instances {
        let params = a.search.params(inst)?;
        for &s in &seeds {
            jobs.push((inst, params.clone(), s));
        }
    }
    let reports = run_all(&jobs)?;
    let rows: Vec<AggregateRow> = instances
        .iter()
        .zip(reports.chunks(seeds.len()))
        .map(|(inst, chunk)| AggregateRow::new(inst.name(), chunk, refs.get(inst.name()).copied()))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap_best).collect();
    let mean_gap_best = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
    let output = BenchOutput { reports: &reports, rows: &rows, mean_gap_best };
    if let Some(p) = &a.out {
        write_json(p, &output)?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&output)?);
    } else {
        print!("{}", render_aggregates(&rows));
        if let Some(g) = mean_gap_best {
            println!("mean gap of Best-10: {g:.3}%");
        }
    }
    Ok(if rows.iter().all(|r| r.feasible_runs > 0) { EXIT_OK } else { EXIT_INFEASIBLE })
}
