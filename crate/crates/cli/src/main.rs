//! `kelly`: growth-optimal stakes for a single event with mutually
//! exclusive outcomes.
//!
//! Subcommands: `solve` prints the optimal allocation, `trace` shows the
//! accept/stop pass that found it, `simulate` estimates the growth rate by
//! seeded sampling, and `check` cross-checks the solver against an
//! independent maximizer. Exit codes: 0 success, 1 invariant or tolerance
//! failure, 2 usage or validation error.

mod input;
mod render;

use clap::{Args, Parser, Subcommand};

use kelly_core::market::Strategy;
use kelly_core::oracle::{
    check_solution_invariants, enumerate_supports_solve, grid_search_solve, projected_ascent_solve,
    OracleMethod, OracleReport,
};
use kelly_core::sim::simulate_growth;
use kelly_core::solver::greedy_solve;

use input::InputFormat;
use render::{CheckOutput, SolveOutput, TraceOutput};

/// Gradient steps per start for the ascent check.
const ASCENT_ITERATIONS: usize = 20_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad input or flags; exits 2.
    Usage(String),
    /// Solver invariant or oracle tolerance failure; exits 1.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Failed(message) => write!(f, "{message}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kelly",
    version,
    about = "Growth-optimal stakes for a single multi-outcome event"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Market file; '-' reads stdin
    #[arg(long, value_name = "PATH")]
    input: String,
    /// Input format; inferred from the file extension when omitted
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Interpret the price column as state prices q instead of decimal odds
    #[arg(long)]
    state_prices: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a market and print the optimal allocation
    Solve {
        #[command(flatten)]
        input: InputArgs,
        /// Emit machine-readable JSON
        #[arg(long)]
        json: bool,
    },
    /// Show the accept/stop pass over outcomes sorted by edge ratio
    Trace {
        #[command(flatten)]
        input: InputArgs,
        /// Emit machine-readable JSON
        #[arg(long)]
        json: bool,
    },
    /// Solve, then estimate the growth rate by seeded simulation
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        /// Number of event draws
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Seed for the outcome generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit machine-readable JSON
        #[arg(long)]
        json: bool,
    },
    /// Cross-check the solver against an independent maximizer
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// Which independent maximizer to run
        #[arg(long, value_enum, default_value_t = MethodArg::Enumeration)]
        method: MethodArg,
        /// Lattice step for the grid method
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        /// Seed for the ascent method's random starts
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit machine-readable JSON
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MethodArg {
    Enumeration,
    Grid,
    Ascent,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { input, json } => cmd_solve(&input, json),
        Command::Trace { input, json } => cmd_trace(&input, json),
        Command::Simulate {
            input,
            trials,
            seed,
            json,
        } => cmd_simulate(&input, trials, seed, json),
        Command::Check {
            input,
            method,
            grid_step,
            seed,
            json,
        } => cmd_check(&input, method, grid_step, seed, json),
    }
}

fn cmd_solve(args: &InputArgs, json: bool) -> Result<(), CliError> {
    let event = load(args)?;
    let solution = greedy_solve(&event);
    check_solution_invariants(&event, &solution).map_err(|violation| {
        CliError::Failed(format!("internal invariant violation: {violation}"))
    })?;
    if json {
        println!("{}", to_json(&SolveOutput::new(&event, &solution)));
    } else {
        render::print_solve_table(&event, &solution);
    }
    Ok(())
}

fn cmd_trace(args: &InputArgs, json: bool) -> Result<(), CliError> {
    let event = load(args)?;
    let solution = greedy_solve(&event);
    if json {
        println!("{}", to_json(&TraceOutput::new(&event, &solution)));
    } else {
        render::print_trace_table(&event, &solution);
    }
    Ok(())
}

fn cmd_simulate(args: &InputArgs, trials: u64, seed: u64, json: bool) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".to_string()));
    }
    let event = load(args)?;
    let solution = greedy_solve(&event);
    let strategy = Strategy::new(solution.cash, solution.stakes.clone())
        .map_err(|err| CliError::Failed(format!("internal invariant violation: {err}")))?;
    let result = simulate_growth(&event, &strategy, trials, seed)
        .map_err(|err| CliError::Failed(err.to_string()))?;
    if json {
        println!("{}", to_json(&result));
    } else {
        render::print_simulation(&result);
    }
    Ok(())
}

fn cmd_check(
    args: &InputArgs,
    method: MethodArg,
    grid_step: f64,
    seed: u64,
    json: bool,
) -> Result<(), CliError> {
    let event = load(args)?;
    let report: OracleReport = match method {
        MethodArg::Enumeration => {
            enumerate_supports_solve(&event).map_err(|err| CliError::Usage(err.to_string()))?
        }
        MethodArg::Grid => {
            grid_search_solve(&event, grid_step).map_err(|err| CliError::Usage(err.to_string()))?
        }
        MethodArg::Ascent => projected_ascent_solve(&event, ASCENT_ITERATIONS, seed),
    };

    // What "close enough" means per method: enumeration is exact and must
    // agree tightly on growth and wealth; the lattice bound scales with its
    // resolution; ascent converges within its validated tolerance. None may
    // beat the solver by more than summation noise.
    let (pass, tolerance) = match report.method {
        OracleMethod::Enumeration => (
            (report.best_growth - report.solver_growth).abs() <= 1e-9
                && report.max_wealth_deviation <= 1e-8,
            1e-9,
        ),
        OracleMethod::Grid => (
            report.best_growth <= report.solver_growth + 1e-12
                && report.best_growth >= report.solver_growth - grid_step / 2.0,
            grid_step / 2.0,
        ),
        OracleMethod::Ascent => (
            report.best_growth <= report.solver_growth + 1e-9
                && report.best_growth >= report.solver_growth - 1e-6,
            1e-6,
        ),
    };

    let output = CheckOutput::new(&report, tolerance, pass);
    if json {
        println!("{}", to_json(&output));
    } else {
        render::print_check(&output);
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} check failed: solver growth {}, oracle growth {}",
            report.method, report.solver_growth, report.best_growth
        )))
    }
}

fn load(args: &InputArgs) -> Result<kelly_core::market::MarketEvent, CliError> {
    let event = input::load_market(&args.input, args.format, args.state_prices)?;
    for warning in event.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(event)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output types serialize without error")
}
