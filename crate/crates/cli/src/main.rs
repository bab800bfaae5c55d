//! `cirdetect` command-line interface.
//!
//! Exit codes: 0 success, 1 user error (bad arguments, unreadable or invalid
//! input, degenerate data), 2 internal error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cirdetect::harness::{self, ExperimentConfig};
use cirdetect::{
    compute_functionals, estimate_change_point, lse_full, raw_score, run_test, simulate_change_path,
    simulate_path, test_trajectory, ChangeScenario, CirParams, Component, Direction, Parameter,
    RandomSource, SigmaSq, Side, Start, TestSpec,
};

#[derive(Parser)]
#[command(name = "cirdetect", version, about = "Change detection in the drift of a CIR process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a path (optionally with a single drift change) and write `t,x` CSV.
    Simulate(SimulateArgs),
    /// Least-squares drift estimate for a path.
    Estimate(EstimateArgs),
    /// Brownian-bridge change test on a path.
    Test(TestArgs),
    /// Locate the change point on a path.
    Changepoint(ChangepointArgs),
    /// Run a Monte Carlo experiment from a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    sigma: f64,
    /// Horizon T.
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Initial value; drawn from the stationary law when omitted.
    #[arg(long)]
    x0: Option<f64>,
    /// Post-change a (enables the change scenario).
    #[arg(long)]
    a_post: Option<f64>,
    /// Post-change b (enables the change scenario).
    #[arg(long)]
    b_post: Option<f64>,
    /// Change fraction ρ in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathArgs {
    /// Input path CSV with header `t,x`.
    #[arg(long)]
    path: PathBuf,
    /// Known σ²; estimated from realized quadratic variation when omitted.
    #[arg(long)]
    sigma_sq: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: PathArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    A,
    B,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleParamArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Up,
    Down,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: PathArgs,
    #[arg(long, value_enum, default_value = "a")]
    param: ParamArg,
    #[arg(long, value_enum, default_value = "two")]
    side: SideArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of trajectory intervals on [0, 1]; one per path step by default.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Also write the trajectory as `t,score_a,score_b` CSV.
    #[arg(long)]
    emit_trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct ChangepointArgs {
    #[command(flatten)]
    input: PathArgs,
    #[arg(long, value_enum)]
    param: SingleParamArg,
    #[arg(long, value_enum)]
    direction: DirectionArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (`.toml` or `.json`).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; overrides `output` from the config, stdout if neither.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replication CSV sidecar.
    #[arg(long)]
    per_replication_csv: Option<PathBuf>,
    /// Force sequential execution.
    #[arg(long)]
    sequential: bool,
}

enum CliError {
    User(String),
    Internal(String),
}

impl From<cirdetect::Error> for CliError {
    fn from(e: cirdetect::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::User(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn sigma_choice(sigma_sq: Option<f64>) -> SigmaSq {
    sigma_sq.map_or(SigmaSq::Auto, SigmaSq::Known)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let params = CirParams::new(args.a, args.b, args.sigma)?;
    let start = args.x0.map_or(Start::Stationary, Start::Fixed);
    let mut rng = RandomSource::new(args.seed);
    let path = if args.a_post.is_some() || args.b_post.is_some() {
        let scenario = ChangeScenario::new(
            [args.a, args.b],
            [args.a_post.unwrap_or(args.a), args.b_post.unwrap_or(args.b)],
            args.sigma,
            args.rho,
            args.t_end,
        )?;
        let cp = simulate_change_path(&scenario, start, args.dt, &mut rng)?;
        eprintln!("change at t = {} (grid index {})", cp.tau_grid, cp.change_index);
        cp.path
    } else {
        simulate_path(&params, start, args.t_end, args.dt, &mut rng)?
    };
    match args.out {
        Some(p) => harness::write_path_csv(&p, &path)?,
        None => harness::write_path(io::stdout().lock(), &path)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateOutput {
    a_hat: f64,
    b_hat: f64,
    sigma_sq_hat: f64,
    det_q: f64,
}

fn estimate(args: EstimateArgs) -> CliResult<()> {
    let path = harness::read_path_csv(&args.input.path)?;
    let fun = compute_functionals(&path, sigma_choice(args.input.sigma_sq))?;
    let th = lse_full(&fun)?;
    emit_json(
        &EstimateOutput {
            a_hat: th.a_hat,
            b_hat: th.b_hat,
            sigma_sq_hat: fun.sigma_sq(),
            det_q: th.det_q,
        },
        args.input.out.as_deref(),
    )
}

fn test(args: TestArgs) -> CliResult<()> {
    let path = harness::read_path_csv(&args.input.path)?;
    let fun = compute_functionals(&path, sigma_choice(args.input.sigma_sq))?;
    let traj = test_trajectory(&fun, args.grid_size)?;
    let test_spec = TestSpec::new(
        match args.param {
            ParamArg::A => Parameter::A,
            ParamArg::B => Parameter::B,
            ParamArg::Both => Parameter::Both,
        },
        match args.side {
            SideArg::Upper => Side::Upper,
            SideArg::Lower => Side::Lower,
            SideArg::Two => Side::TwoSided,
        },
        args.alpha,
    )?;
    let decisions = run_test(&traj, &test_spec)?;
    if let Some(p) = &args.emit_trajectory {
        harness::write_trajectory(io::BufWriter::new(fs::File::create(p)?), &traj)?;
    }
    emit_json(&decisions, args.input.out.as_deref())
}

fn changepoint(args: ChangepointArgs) -> CliResult<()> {
    let path = harness::read_path_csv(&args.input.path)?;
    let fun = compute_functionals(&path, sigma_choice(args.input.sigma_sq))?;
    let raw = raw_score(&fun, &lse_full(&fun)?);
    let component = match args.param {
        SingleParamArg::A => Component::A,
        SingleParamArg::B => Component::B,
    };
    let direction = match args.direction {
        DirectionArg::Up => Direction::Up,
        DirectionArg::Down => Direction::Down,
    };
    emit_json(
        &estimate_change_point(&raw, component, direction),
        args.input.out.as_deref(),
    )
}

fn load_config(p: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(p)?;
    let is_json = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::User(format!("{}: {e}", p.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::User(format!("{}: {e}", p.display())))
    }
}

fn experiment(args: ExperimentArgs) -> CliResult<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if args.per_replication_csv.is_some() {
        cfg.per_replication = true;
    }
    let exec = if args.sequential {
        harness::Execution::Sequential
    } else {
        harness::Execution::Parallel
    };
    let report = harness::run_experiment_with(&cfg, exec)?;
    if let (Some(p), Some(table)) = (&args.per_replication_csv, &report.per_replication) {
        harness::write_table(
            io::BufWriter::new(fs::File::create(p)?),
            &table.columns,
            &table.rows,
        )?;
    }
    let out = args.out.or_else(|| cfg.output.clone());
    emit_json(&report, out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let user_error = e.use_stderr();
            let _ = e.print();
            return if user_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Test(a) => test(a),
        Command::Changepoint(a) => changepoint(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
