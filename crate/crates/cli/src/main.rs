//! `tenscalc` command-line runner. Exit status: 0 when every check passes,
//! 1 when a check fails or a computation breaks down, 2 for usage and input
//! errors.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tenscalc::ode::Method;

use report::StampMode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<tenscalc::Error> for CliError {
    fn from(e: tenscalc::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tenscalc",
    version,
    about = "Tensor calculus checks, examples and reduced tensor ODE solves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Directory for reports, trajectories and tensors.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include timestamps and wall-clock timings in reports.
    #[arg(long, value_enum, default_value_t = StampMode::On)]
    pub stamp: StampMode,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Step size.
    #[arg(long)]
    pub step: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Integrator: euler, rk4 or exact.
    #[arg(long)]
    pub method: Option<Method>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run named property suites (`--suite all` for every suite).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = tenscalc::verify::DEFAULT_SEED)]
        seed: u64,
        /// Matrix A and candidate P (tensor files) to certify with the lyapunov suite.
        #[arg(long, num_args = 2, value_names = ["A", "P"])]
        pair: Option<Vec<PathBuf>>,
        /// List suites and exit.
        #[arg(long)]
        list: bool,
        /// Print passing checks too.
        #[arg(long, short)]
        verbose: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate the bundled cubic-polynomial example and compare with its printed values.
    #[command(visible_alias = "example21")]
    ExamplePoly {
        #[arg(long, short)]
        verbose: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Reduce and solve the planted 6-order 6-dimensional multi-time system.
    #[command(visible_alias = "example51")]
    ExampleReduce {
        #[arg(long, default_value_t = tenscalc::reduction::PlantConfig::default().seed)]
        seed: u64,
        /// Ranks for state modes 5 and 6.
        #[arg(long, value_delimiter = ',', default_value = "3,3")]
        ranks: Vec<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Integrate the full system of a problem file.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Partial Tucker decomposition of a tensor file.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        /// 1-based modes to decompose.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        /// Write core and factors as TNSR binary instead of JSON.
        #[arg(long)]
        binary: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Reduce a problem's generator on its trailing state modes and compare reduced and full trajectories.
    ReduceSolve {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ranks: Option<Vec<usize>>,
        /// Fail when the lifted-vs-full Frobenius error exceeds this bound.
        #[arg(long)]
        max_error: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            suite,
            seed,
            pair,
            list,
            verbose,
            output,
        } => commands::verify(&suite, seed, pair.as_deref(), list, verbose, &output),
        Command::ExamplePoly { verbose, output } => commands::example_poly(verbose, &output),
        Command::ExampleReduce {
            seed,
            ranks,
            solver,
            output,
        } => commands::example_reduce(seed, &ranks, &solver, &output),
        Command::Solve {
            problem,
            solver,
            output,
        } => commands::solve(&problem, &solver, &output),
        Command::Reduce {
            input,
            modes,
            ranks,
            binary,
            output,
        } => commands::reduce(&input, &modes, &ranks, binary, &output),
        Command::ReduceSolve {
            problem,
            ranks,
            max_error,
            solver,
            output,
        } => commands::reduce_solve(&problem, ranks.as_deref(), max_error, &solver, &output),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
