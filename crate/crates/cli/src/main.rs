//! `tempered`: run tempered-posterior predictive experiments and write
//! plot-ready tables.

mod config;
mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::builder::RangedU64ValueParser;
use clap::{Parser, Subcommand};

use tempered::experiments::{run_replicates, summarize, tau_selection_histogram, Execution};
use tempered::selection::{risk_normal, risk_normal_flat, TempGrid, TempSchedule};

use config::{MetricName, PriorVar, RunConfig};
use output::{num, Manifest, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Incompatible(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Incompatible(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<tempered::Error> for CliError {
    fn from(e: tempered::Error) -> Self {
        match e {
            tempered::Error::Incompatible(_) => CliError::Incompatible(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tempered", version, about = "Tempered posterior predictive experiments")]
struct Cli {
    /// Root seed; overrides the config file's `seed`.
    #[arg(long, global = true, value_parser = RangedU64ValueParser::<u64>::new().range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Worker threads for replicate execution (output does not depend on it).
    #[arg(long, global = true, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "tempered-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance or elpd of the τ-predictive across a temperature grid.
    /// Writes sweep.csv, replicates.csv and manifest.json.
    #[command(after_long_help = config::REFERENCE)]
    Sweep { config: PathBuf },
    /// Cross-validated temperature per replicate. Writes selection.csv and manifest.json.
    #[command(after_long_help = config::REFERENCE)]
    Select { config: PathBuf },
    /// Analytic KL risk of the normal location model (σ = 1, prior mean 0).
    /// Writes risk.csv and manifest.json.
    Risk {
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true,
              value_parser = RangedU64ValueParser::<u64>::new().range(1..))]
        n: Vec<u64>,
        /// `default` (61 points on [0.01, 100]), `lo:hi:count` (log spaced) or a comma-separated list.
        #[arg(long, default_value = "default", value_parser = parse_grid)]
        grid: TempGrid,
        /// Prior variance, or `flat`.
        #[arg(long = "sigma0-sq", default_value = "flat", value_parser = parse_prior_var)]
        sigma0_sq: PriorVar,
        /// Extra columns at a schedule's τ_n: `fixed:τ`, `power:c,γ` or `coarsened:α`. Repeatable.
        #[arg(long = "schedule", value_parser = parse_schedule)]
        schedules: Vec<ScheduleArg>,
    },
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_grid(s: &str) -> Result<TempGrid, String> {
    if s == "default" {
        return Ok(TempGrid::default());
    }
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, count] => {
            let count = count.trim().parse::<usize>().map_err(|_| format!("`{count}` is not a point count"))?;
            TempGrid::log_spaced(parse_f64(lo)?, parse_f64(hi)?, count)
        }
        [list] => TempGrid::new(list.split(',').map(parse_f64).collect::<Result<_, _>>()?),
        _ => return Err("expected `default`, `lo:hi:count` or a comma-separated list".into()),
    };
    grid.map_err(|e| e.to_string())
}

fn parse_prior_var(s: &str) -> Result<PriorVar, String> {
    if s == "flat" {
        return Ok(PriorVar::Flat);
    }
    match parse_f64(s)? {
        v if v > 0.0 && v.is_finite() => Ok(PriorVar::Finite(v)),
        v => Err(format!("prior variance must be positive and finite, got {v}")),
    }
}

#[derive(Debug, Clone)]
struct ScheduleArg {
    text: String,
    label: String,
    schedule: TempSchedule,
}

fn parse_schedule(s: &str) -> Result<ScheduleArg, String> {
    let (kind, args) = s.split_once(':').ok_or("expected `kind:args`")?;
    let values: Vec<f64> = args.split(',').map(parse_f64).collect::<Result<_, _>>()?;
    let (schedule, label) = match (kind, values.as_slice()) {
        ("fixed", [t]) => (TempSchedule::fixed(*t), format!("fixed_{}", num(*t))),
        ("power", [c, g]) => (TempSchedule::power_decay(*c, *g), format!("power_{}_{}", num(*c), num(*g))),
        ("coarsened", [a]) => (TempSchedule::coarsened(*a), format!("coarsened_{}", num(*a))),
        _ => return Err("expected `fixed:τ`, `power:c,γ` or `coarsened:α`".into()),
    };
    Ok(ScheduleArg { text: s.to_string(), label, schedule: schedule.map_err(|e| e.to_string())? })
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn load(path: &Path, seed: Option<u64>, default_metric: Option<MetricName>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = RunConfig::parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    parsed.resolve(seed, default_metric)
}

fn manifest(command: &'static str, seed: u64, config: serde_json::Value, toml: Option<String>, started: Instant) -> Manifest {
    Manifest {
        tool: "tempered",
        version: env!("CARGO_PKG_VERSION"),
        command,
        root_seed: seed,
        config,
        config_toml: toml,
        files: Vec::new(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    }
}

fn echo(cfg: &RunConfig) -> Result<(serde_json::Value, String), CliError> {
    let json = serde_json::to_value(cfg).map_err(|e| CliError::Internal(format!("cannot echo config: {e}")))?;
    Ok((json, cfg.to_toml()?))
}

fn sweep(cli: &Cli, path: &Path, started: Instant) -> Result<(), CliError> {
    let cfg = load(path, cli.seed, None)?;
    let exp = cfg.experiment()?;
    let (table, curve) = with_threads(cli.threads, || -> Result<_, CliError> {
        let table = run_replicates(&exp)?;
        let curve = summarize(&table, exp.scale_by_sqrt_n)?;
        Ok((table, curve))
    })??;
    let mut out = OutputDir::create(&cli.out)?;
    out.write("sweep.csv", &output::sweep_csv(&curve))?;
    out.write("replicates.csv", &output::replicates_csv(&table))?;
    let (json, toml) = echo(&cfg)?;
    out.finish(manifest("sweep", exp.root_seed, json, Some(toml), started))
}

fn select(cli: &Cli, path: &Path, started: Instant) -> Result<(), CliError> {
    let cfg = load(path, cli.seed, Some(MetricName::Elpd))?;
    let exp = cfg.experiment()?;
    let rows = with_threads(cli.threads, || tau_selection_histogram(&exp, Execution::Parallel))??;
    let mut out = OutputDir::create(&cli.out)?;
    out.write("selection.csv", &output::selection_csv(&rows))?;
    let (json, toml) = echo(&cfg)?;
    out.finish(manifest("select", exp.root_seed, json, Some(toml), started))
}

fn risk_at(n: u64, tau: f64, prior: PriorVar) -> f64 {
    match prior {
        PriorVar::Flat => risk_normal_flat(n, tau),
        PriorVar::Finite(v) => risk_normal(n, tau, v),
    }
}

fn risk_csv(ns: &[u64], grid: &TempGrid, prior: PriorVar, schedules: &[ScheduleArg]) -> String {
    let mut out = String::from("n,tau,risk");
    for s in schedules {
        let _ = write!(out, ",{0}_tau,{0}_risk", s.label);
    }
    out.push('\n');
    for &n in ns {
        let extra: String = schedules
            .iter()
            .map(|s| {
                let tau = s.schedule.tau(n);
                format!(",{},{}", num(tau), num(risk_at(n, tau, prior)))
            })
            .collect();
        for &tau in grid.points() {
            let _ = writeln!(out, "{n},{},{}{extra}", num(tau), num(risk_at(n, tau, prior)));
        }
    }
    out
}

fn risk(cli: &Cli, ns: &[u64], grid: &TempGrid, prior: PriorVar, schedules: &[ScheduleArg], started: Instant) -> Result<(), CliError> {
    let mut out = OutputDir::create(&cli.out)?;
    out.write("risk.csv", &risk_csv(ns, grid, prior, schedules))?;
    let config = serde_json::json!({
        "n": ns,
        "grid": grid.points(),
        "sigma0_sq": prior,
        "schedules": schedules.iter().map(|s| s.text.clone()).collect::<Vec<_>>(),
    });
    out.finish(manifest("risk", cli.seed.unwrap_or(config::DEFAULT_SEED), config, None, started))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match &cli.command {
        Command::Sweep { config } => sweep(cli, config, started),
        Command::Select { config } => select(cli, config, started),
        Command::Risk { n, grid, sigma0_sq, schedules } => risk(cli, n, grid, *sigma0_sq, schedules, started),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
