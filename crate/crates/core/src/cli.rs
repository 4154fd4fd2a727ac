//! Command line front end.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{Config, ConfigError, Scheme};
use crate::experiments::{self, ExperimentError, SweepOptions};
use crate::oseen_frank;
use crate::params::{estimate_coercivity, DEFAULT_COERCIVITY_SAMPLES};
use crate::solver::{self, FileSink, InitialOptions, SolverError, State, GENERATORS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the worker thread count (0 = automatic).
pub const THREADS_ENV: &str = "NEMATIC_FLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nematic-flow", version, about = "Ginzburg-Landau relaxed Ericksen-Leslie flow on periodic boxes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `key=value` applied after the file; repeatable.
    #[arg(long = "override", value_name = "K=V")]
    pub overrides: Vec<String>,
    /// Shorthand for `--override seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress progress and summary output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write diagnostics and snapshots.
    Run(Common),
    /// Run one trajectory per epsilon and compare consecutive runs.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Strictly decreasing, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        eps: Vec<f64>,
        /// Steps between samples.
        #[arg(long, default_value_t = 10)]
        sample_every: usize,
        /// Start time of the higher seminorm probes.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
    /// Check the coefficients and sample the elastic coercivity constant.
    Validate(Common),
    /// Compare the molecular field against finite differences of the energy.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Time-step refinement study on the configured initial data.
    OrderStudy {
        #[command(flatten)]
        common: Common,
        /// Halving sequence, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dt_list: Vec<f64>,
    },
    /// Print version, keys and generators; optionally the effective config.
    Info {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dump_config: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("--config is required for this command")]
    MissingConfig,
    #[error("gradient check failed: relative error {err:e} exceeds {tol:e}")]
    GradCheck { err: f64, tol: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingConfig => EXIT_VALIDATION,
            CliError::Solver(SolverError::Io(_)) => EXIT_IO,
            CliError::Solver(SolverError::UnknownGenerator(_)) => EXIT_VALIDATION,
            CliError::Solver(_) | CliError::GradCheck { .. } => EXIT_RUNTIME,
            CliError::Experiment(e) => match e {
                ExperimentError::Io(_) | ExperimentError::Solver(SolverError::Io(_)) => EXIT_IO,
                ExperimentError::Solver(_) => EXIT_RUNTIME,
                _ => EXIT_VALIDATION,
            },
            CliError::Read { .. } | CliError::Io(_) => EXIT_IO,
        }
    }
}

fn load(common: &Common, required: bool) -> Result<Config, CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?,
        None if required => return Err(CliError::MissingConfig),
        None => String::new(),
    };
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    Ok(Config::parse_with_overrides(&text, &overrides)?)
}

fn initial_state(cfg: &Config) -> Result<State, CliError> {
    let s = &cfg.sim;
    let opts = InitialOptions { amplitude: s.amplitude, v_amplitude: s.v_amplitude };
    Ok(solver::make_initial(&s.initial, &s.grid().map_err(SolverError::from)?, s.epsilon, s.seed, &opts)?)
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn cmd_run(common: &Common) -> Result<(), CliError> {
    let cfg = load(common, true)?;
    let s0 = initial_state(&cfg)?;
    let out = &cfg.sim.out_dir;
    let mut sink = FileSink::create(out, cfg.sim.snapshot_every)?;
    let summary = solver::run(s0, &cfg.model, &cfg.sim, &mut sink)?;
    let b = &summary.final_budget;
    say(common.quiet, format!("steps {} t {:e}", summary.steps, summary.final_state.t));
    say(
        common.quiet,
        format!("energy {:e} (kinetic {:e}, elastic {:e}, penalty {:e})", b.total, b.kinetic, b.elastic, b.penalty),
    );
    say(common.quiet, format!("max energy residual {:e}", summary.max_residual));
    say(common.quiet, format!("|u| range [{}, {}]", summary.umin, summary.umax));
    say(common.quiet, format!("max div ratio {:e}", summary.max_divergence_ratio));
    for e in &summary.events {
        say(
            common.quiet,
            format!("concentration event step {} t {:e} mass {:e} at {:?}", e.step, e.t, e.mass, e.center),
        );
    }
    say(common.quiet, format!("wrote {}", out.join("diagnostics.csv").display()));
    Ok(())
}

fn cmd_sweep(common: &Common, eps: &[f64], sample_every: usize, tau: f64) -> Result<(), CliError> {
    let cfg = load(common, true)?;
    if cfg.sim.scheme != Scheme::Imex {
        say(common.quiet, "note: sweeps normally use scheme = imex");
    }
    let s0 = initial_state(&cfg)?;
    let report = experiments::epsilon_sweep(&cfg.model, &cfg.sim, &s0, eps, &SweepOptions { sample_every, tau })?;
    report.write(&cfg.sim.out_dir)?;
    for t in &report.trajectories {
        match (&t.failure, t.final_penalty()) {
            (Some(f), _) => say(common.quiet, format!("eps {} failed: {f}", t.epsilon)),
            (None, Some(p)) => say(common.quiet, format!("eps {} final penalty {p:e}", t.epsilon)),
            _ => {}
        }
    }
    for p in report.pairs.iter().flatten() {
        say(
            common.quiet,
            format!("eps {} vs {}: |grad du| {:e}, |dv| {:e}", p.eps_a, p.eps_b, p.grad_u_linf_l2, p.v_linf_l2),
        );
    }
    say(common.quiet, format!("wrote {}", cfg.sim.out_dir.join("sweep_summary.csv").display()));
    Ok(())
}

fn cmd_validate(common: &Common) -> Result<(), CliError> {
    let cfg = load(common, true)?;
    let l = &cfg.model.leslie;
    let c =
        estimate_coercivity(&cfg.model.elastic, DEFAULT_COERCIVITY_SAMPLES, cfg.sim.seed).map_err(ConfigError::from)?;
    say(common.quiet, "strong Ericksen inequalities hold");
    say(
        common.quiet,
        format!("Leslie coefficients admissible: gamma1 {} gamma2 {} beta {}", l.gamma1(), l.gamma2(), l.beta()),
    );
    say(common.quiet, format!("sampled coercivity constant {c:e}"));
    Ok(())
}

fn cmd_gradcheck(common: &Common, trials: usize, step: f64, tol: f64) -> Result<(), CliError> {
    let cfg = load(common, false)?;
    let g = cfg.sim.grid().map_err(SolverError::from)?;
    let err = oseen_frank::gradient_check(&g, &cfg.model.elastic, cfg.sim.epsilon, trials, step, cfg.sim.seed);
    println!("max relative error {err:e}");
    if err > tol {
        return Err(CliError::GradCheck { err, tol });
    }
    Ok(())
}

fn cmd_order_study(common: &Common, dts: &[f64]) -> Result<(), CliError> {
    let cfg = load(common, true)?;
    let s0 = initial_state(&cfg)?;
    let study = experiments::dt_order_study(&cfg.model, &cfg.sim, &s0, dts)?;
    let csv = study.to_csv();
    let out: &Path = &cfg.sim.out_dir;
    fs::create_dir_all(out)?;
    fs::write(out.join("order_study.csv"), &csv)?;
    say(common.quiet, csv.trim_end());
    Ok(())
}

fn cmd_info(common: &Common, dump: bool) -> Result<(), CliError> {
    let cfg = load(common, false)?;
    if dump {
        print!("{}", cfg.dump());
        return Ok(());
    }
    println!("nematic-flow {}", env!("CARGO_PKG_VERSION"));
    println!("generators: {}", GENERATORS.join(", "));
    println!("config keys: {}", crate::config::KEYS.join(", "));
    println!("threads: {}", rayon::current_num_threads());
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep { common, eps, sample_every, tau } => cmd_sweep(common, eps, *sample_every, *tau),
        Command::Validate(c) => cmd_validate(c),
        Command::Gradcheck { common, trials, step, tol } => cmd_gradcheck(common, *trials, *step, *tol),
        Command::OrderStudy { common, dt_list } => cmd_order_study(common, dt_list),
        Command::Info { common, dump_config } => cmd_info(common, *dump_config),
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`].
pub fn init_threads() {
    let Ok(v) = std::env::var(THREADS_ENV) else { return };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Err(_) => eprintln!("warning: ignoring {THREADS_ENV}={v}"),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    init_threads();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
