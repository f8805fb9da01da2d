use clap::{Parser, Subcommand, ValueEnum};
use hetnet_sim::config::parse_threshold;
use hetnet_sim::harness::{compare_engines, params_at, reproduce_figure, run_sweep, Engine, FigureId, SweepSpec, SweepVariable};
use hetnet_sim::{default_paper_scenario, load_config, validate, SystemParams};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SEED_ENV: &str = "HETNET_SIM_SEED";

#[derive(Parser)]
#[command(name = "hetnet-sim", version, about = "Offloading, coverage and energy of cooperative small-cell layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Mc,
    Analytic,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a scenario file and write results.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `variable=lo:hi:n` with variable one of density_ratio, bias, theta.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "both")]
        engine: EngineArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce one of the standard figures (CSV, metadata and SVG).
    Figure {
        /// overall-connection, coverage-per-layer, ... or result1..result6.
        id: String,
        #[arg(long)]
        out: PathBuf,
        /// Scenario file; the built-in default scenario when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a scenario file and list every violated constraint.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Invalid(m) => {
                eprintln!("validation failed:\n{m}");
                ExitCode::from(1)
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
        }
    }
}

fn load(path: &Path) -> Result<SystemParams, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    load_config(&text).map_err(|e| Failure::Invalid(e.to_string()))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Invalid(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Seed precedence: command line, then the environment, then the file.
fn resolve_seed(params: &mut SystemParams, flag: Option<u64>) -> Result<(), Failure> {
    if let Some(s) = flag.or(env_seed()?) {
        params.sim.seed = s;
    }
    Ok(())
}

fn check(params: &SystemParams) -> Result<(), Failure> {
    let report = validate(params);
    if report.is_pass() {
        Ok(())
    } else {
        Err(Failure::Invalid(report.to_string()))
    }
}

fn parse_sweep(text: &str) -> Result<(SweepVariable, Vec<f64>), Failure> {
    let bad = |m: String| Failure::Invalid(format!("--sweep `{text}`: {m}"));
    let (var, range) = text.split_once('=').ok_or_else(|| bad("expected variable=lo:hi:n".into()))?;
    let variable: SweepVariable = var.trim().parse().map_err(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad("expected lo:hi:n".into()));
    };
    let num = |s: &str| -> Result<f64, Failure> {
        if variable == SweepVariable::Theta {
            parse_threshold(s).map_err(bad)
        } else {
            s.trim().parse().map_err(|_| bad(format!("`{s}` is not a number")))
        }
    };
    let (lo, hi) = (num(lo)?, num(hi)?);
    let n: usize = n.trim().parse().map_err(|_| bad(format!("`{n}` is not a point count")))?;
    let values = match n {
        0 => return Err(bad("need at least one point".into())),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    };
    Ok((variable, values))
}

fn run(
    config: &Path,
    sweep: Option<&str>,
    trials: Option<u64>,
    seed: Option<u64>,
    engine: EngineArg,
    out: &Path,
) -> Result<(), Failure> {
    let mut params = load(config)?;
    resolve_seed(&mut params, seed)?;
    if let Some(t) = trials {
        params.sim.trials = t;
    }
    check(&params)?;
    let (variable, values) = match sweep {
        Some(s) => parse_sweep(s)?,
        None => (SweepVariable::Theta, vec![params.snr_threshold]),
    };
    for &v in &values {
        check(&params_at(&params, variable, v))?;
    }
    let mut spec = SweepSpec::new(variable, values, params);
    spec.engines = match engine {
        EngineArg::Mc => vec![Engine::MonteCarlo],
        EngineArg::Analytic => vec![Engine::Analytic],
        EngineArg::Both => vec![Engine::MonteCarlo, Engine::Analytic],
    };
    spec.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    let table = run_sweep(&spec).map_err(|e| Failure::Runtime(e.to_string()))?;
    table.save(out, "results").map_err(|e| Failure::Runtime(e.to_string()))?;
    for f in &table.metadata.failures {
        eprintln!(
            "warning: {} = {} ({}) {}: {}",
            variable,
            f.sweep_value,
            f.engine,
            f.metric.as_deref().unwrap_or("all metrics"),
            f.message
        );
    }
    let report = compare_engines(&table);
    for d in report.flagged() {
        eprintln!(
            "note: engines disagree on {} at {} = {}: mc {} vs analytic {} ({:.1} combined SE)",
            d.metric,
            variable,
            d.sweep_value,
            d.mc,
            d.analytic,
            d.abs_diff / d.combined_se
        );
    }
    println!("wrote {} rows to {}", table.rows.len(), out.join("results.csv").display());
    Ok(())
}

fn figure(id: &str, out: &Path, config: Option<&Path>, trials: Option<u64>, seed: Option<u64>) -> Result<(), Failure> {
    let id: FigureId = id.parse().map_err(Failure::Invalid)?;
    let mut params = match config {
        Some(c) => load(c)?,
        None => default_paper_scenario(),
    };
    resolve_seed(&mut params, seed)?;
    if let Some(t) = trials {
        params.sim.trials = t;
    }
    check(&params)?;
    let out = reproduce_figure(id, &params, params.sim.trials, params.sim.seed, out).map_err(|e| match e {
        hetnet_sim::harness::HarnessError::Spec(m) => Failure::Invalid(m),
        other => Failure::Runtime(other.to_string()),
    })?;
    println!("wrote {} and {}", out.csv.display(), out.svg.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            sweep,
            trials,
            seed,
            engine,
            out,
        } => run(config, sweep.as_deref(), *trials, *seed, *engine, out),
        Command::Figure {
            id,
            out,
            config,
            trials,
            seed,
        } => figure(id, out, config.as_deref(), *trials, *seed),
        Command::Validate { config } => load(config).and_then(|p| {
            check(&p)?;
            println!("ok");
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
