//! `mixde`: single runs, sweeps, ECDF aggregation, best-PCM tables and
//! per-run diagnostic traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mixde::bench::logio::{format_ecdf, read_diagnostics, read_ecdf, read_run_log, read_run_logs, write_atomic};
use mixde::bench::table::format_table;
use mixde::bench::{
    best_config_table, ecdf, log_grid, make_targets, sweep, CurveKey, SweepJob, SweepPlan, GRID_POINTS,
};
use mixde::{make_domain_layout, FunctionKind, PcmKind, RepairPolicy, RunConfig, RunLog, StrategyKind};

#[derive(Parser)]
#[command(name = "mixde", version, about = "Differential evolution benchmark harness for mixed-integer problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration on one problem instance.
    Run(RunArgs),
    /// Run the full cross-product of the given lists.
    Sweep(SweepArgs),
    /// Aggregate run logs into an ECDF curve.
    Ecdf(EcdfArgs),
    /// Tabulate the best PCM per strategy, repair and dimension.
    Table(TableArgs),
    /// Merge a run's log and diagnostics into one per-iteration trace.
    Diag(DiagArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Population size.
    #[arg(long, default_value_t = RunConfig::DEFAULT_MU)]
    mu: usize,
    /// Greediness of the p-best strategies.
    #[arg(long, default_value_t = RunConfig::DEFAULT_P)]
    p: f64,
    /// Archive capacity [default: mu].
    #[arg(long)]
    archive: Option<usize>,
    /// Evaluation budget per dimension.
    #[arg(long, default_value_t = RunConfig::DEFAULT_BUDGET_MULTIPLIER)]
    budget_mult: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    function: FunctionKind,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    instance: u64,
    #[arg(long)]
    strategy: StrategyKind,
    #[arg(long)]
    pcm: PcmKind,
    /// baldwin or lamarck.
    #[arg(long)]
    repair: RepairPolicy,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    functions: Vec<FunctionKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    strategies: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    pcms: Vec<PcmKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    repairs: Vec<RepairPolicy>,
    /// Instances 1..=runs per function.
    #[arg(long, default_value_t = 15)]
    runs: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EcdfArgs {
    /// Directory of run logs.
    #[arg(long)]
    logs: PathBuf,
    /// Output file, or output directory with --by-config.
    #[arg(long)]
    out: PathBuf,
    /// Write one curve per (strategy, pcm, repair, n) instead of one overall.
    #[arg(long)]
    by_config: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Directory of per-configuration ECDF curves.
    #[arg(long)]
    curves: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagArgs {
    /// Run log written by `run` or `sweep`.
    #[arg(long)]
    log: PathBuf,
    /// Diagnostics file [default: the log's `.diag.csv` sibling].
    #[arg(long)]
    diag: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Validation failures exit with 2, everything else with 1.
enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<mixde::Error> for Failure {
    fn from(e: mixde::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Ecdf(args) => cmd_ecdf(args).map_err(Failure::from),
        Command::Table(args) => cmd_table(args).map_err(Failure::from),
        Command::Diag(args) => cmd_diag(args).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run_config(common: &CommonArgs, n: usize, strategy: StrategyKind, pcm: PcmKind, repair: RepairPolicy) -> RunConfig {
    RunConfig {
        mu: common.mu,
        strategy,
        pcm,
        repair,
        p: common.p,
        archive: common.archive.unwrap_or(common.mu),
        budget: common.budget_mult * n as u64,
        seed: common.seed,
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    make_domain_layout(args.dim).map_err(invalid)?;
    let config = run_config(&args.common, args.dim, args.strategy, args.pcm, args.repair);
    config.validate().map_err(invalid)?;

    fs::create_dir_all(&args.common.out).with_context(|| format!("cannot create {}", args.common.out.display()))?;
    let job = SweepJob { function: args.function, n: args.dim, instance: args.instance, config };
    let log = job.execute(&args.common.out)?;
    println!(
        "{}: {} evaluations, final f_delta {:e}",
        job.log_path(&args.common.out).display(),
        log.evaluations,
        log.final_delta().unwrap_or(f64::INFINITY)
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    for &n in &args.dims {
        make_domain_layout(n).map_err(invalid)?;
    }
    let mut plan = SweepPlan::new(args.functions, args.dims, args.strategies, args.pcms, args.repairs);
    plan.runs = args.runs;
    plan.mu = args.common.mu;
    plan.p = args.common.p;
    plan.archive = args.common.archive;
    plan.budget_multiplier = args.common.budget_mult;
    plan.seed = args.common.seed;
    plan.jobs().map_err(invalid)?;

    let summary = sweep(&plan, &args.common.out, args.jobs)?;
    println!(
        "{} runs completed, {} already present, {} evaluations",
        summary.completed, summary.skipped, summary.evaluations
    );
    Ok(())
}

fn curve_for(logs: &[RunLog]) -> anyhow::Result<mixde::bench::EcdfCurve> {
    let budget = logs.iter().map(|l| l.meta.budget).max().unwrap_or(1);
    let f_opt = 0.0;
    Ok(ecdf(logs, &make_targets(f_opt), &log_grid(budget, GRID_POINTS))?)
}

fn cmd_ecdf(args: EcdfArgs) -> anyhow::Result<()> {
    let logs = read_run_logs(&args.logs)?;
    if logs.is_empty() {
        bail!("no run logs in {}", args.logs.display());
    }
    if !args.by_config {
        let curve = curve_for(&logs)?;
        write_atomic(&args.out, &format_ecdf(&curve, None, logs.len()))?;
        return Ok(());
    }
    let mut groups: BTreeMap<CurveKey, Vec<RunLog>> = BTreeMap::new();
    for log in logs {
        let key = CurveKey { strategy: log.meta.strategy, pcm: log.meta.pcm, repair: log.meta.repair, n: log.meta.n };
        groups.entry(key).or_default().push(log);
    }
    fs::create_dir_all(&args.out)?;
    for (key, logs) in &groups {
        let curve = curve_for(logs)?;
        let name = format!("{}_{}_{}_n{}.ecdf.csv", key.strategy, key.pcm, key.repair, key.n);
        write_atomic(&args.out.join(name), &format_ecdf(&curve, Some(key), logs.len()))?;
    }
    println!("{} curves written to {}", groups.len(), args.out.display());
    Ok(())
}

fn cmd_table(args: TableArgs) -> anyhow::Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.curves)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut curves = BTreeMap::new();
    for path in &paths {
        let (key, curve) = read_ecdf(path)?;
        let key = key.with_context(|| format!("{} has no configuration header", path.display()))?;
        curves.insert(key, curve);
    }
    if curves.is_empty() {
        bail!("no ECDF curves in {}", args.curves.display());
    }
    write_atomic(&args.out, &format_table(&best_config_table(&curves)))?;
    Ok(())
}

fn diag_sibling(log: &Path) -> PathBuf {
    let name = log.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    log.with_file_name(format!("{}.diag.csv", name.trim_end_matches(".csv")))
}

fn cmd_diag(args: DiagArgs) -> anyhow::Result<()> {
    let log = read_run_log(&args.log)?;
    let diag_path = args.diag.unwrap_or_else(|| diag_sibling(&args.log));
    let (meta, rows) = read_diagnostics(&diag_path)?;
    if meta != log.meta {
        bail!("{} and {} describe different runs", args.log.display(), diag_path.display());
    }
    let mut out = String::from("t,evals,f_delta,div,nsame,mean_succ_s,mean_succ_c,pcm_snapshot...\n");
    for r in &rows {
        let f_delta = log.delta_at(r.evals).map(|d| format!("{d:?}")).unwrap_or_default();
        let (s, c) = r.mean_success.map(|(s, c)| (format!("{s:?}"), format!("{c:?}"))).unwrap_or_default();
        let _ = write!(out, "{},{},{f_delta},{:?},{},{s},{c}", r.t, r.evals, r.div, r.nsame);
        for v in &r.snapshot {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    write_atomic(&args.out, &out)?;
    Ok(())
}
