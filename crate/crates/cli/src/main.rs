//! `sscqp` — solve, generate, benchmark, and verify cone-projection QPs.
//!
//! Exit codes are a stable contract:
//! 0 success, 1 input error, 2 non-convergence, 3 property failure.

mod bench;
mod error;
mod generate_cmd;
mod records;
mod solve_cmd;
mod verify;
mod workers;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};


pub const EXIT_INPUT_ERROR: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_PROPERTY_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sscqp",
    version,
    about = "Semi-smooth Newton solver for convex QPs over simplicial cones",
    long_about = "Solves min ½yᵀQy + bᵀy + c over the cone {Av : v ≥ 0} through the\n\
                  equivalent nonsmooth equation [AᵀQA−I]x⁺ + x + Aᵀb = 0.\n\n\
                  Exit codes: 0 success, 1 input error, 2 non-convergence, 3 property failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file and print the run's report
    Solve(SolveArgs),
    /// Generate a suite of planted instances plus a manifest CSV
    Generate(GenerateArgs),
    /// Run a benchmark suite and emit per-record CSV and summaries
    Bench(BenchArgs),
    /// Run the cross-module invariant sweeps
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Semi-smooth Newton steps
    Newton,
    /// Fixed-point steps x ← −Mx⁺ − q (contractive for ‖M‖ < 1/2)
    FixedPoint,
}

impl MethodArg {
    pub fn to_method(self) -> sscqp::solver::Method {
        match self {
            MethodArg::Newton => sscqp::solver::Method::Newton,
            MethodArg::FixedPoint => sscqp::solver::Method::FixedPoint,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Human-readable summary tables
    Table,
    /// Per-record CSV on stdout
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    /// Iteration/time totals per tolerance over one instance set
    Table1,
    /// Starting-point robustness: many random starts per problem
    Table2,
    /// Solved counts per ‖M‖ band, including bands far beyond 1
    Table3,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Problem file (see README for the format)
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
    pub method: MethodArg,
    /// Known-solution stop: ‖u−x‖ < tol_x·(1+‖u‖); used when the file
    /// carries a `u` section
    #[arg(long, default_value_t = 1e-6)]
    pub tol_x: f64,
    /// Residual stop: ‖F(x)‖ ≤ tol_res·(1+‖q‖)
    #[arg(long, default_value_t = 1e-12)]
    pub tol_res: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Print one line per recorded iterate
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Problem dimension
    #[arg(long)]
    pub n: usize,
    /// Number of instances
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Lower bound of the planted ‖M‖ range
    #[arg(long, default_value_t = 0.0)]
    pub beta_lb: f64,
    /// Upper bound (exclusive) of the planted ‖M‖ range
    #[arg(long, default_value_t = 0.5)]
    pub beta_ub: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output directory; receives the instance files and manifest.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Magnitude of planted-solution and starting-point entries
    #[arg(long, default_value_t = 1e6)]
    pub value_scale: f64,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    /// Problem dimension (default: 100 for table1/table2, 50 for table3)
    #[arg(long)]
    pub n: Option<usize>,
    /// Instances per group (default: 100 / 50 / 200 by suite)
    #[arg(long)]
    pub count: Option<usize>,
    /// Override the instance ‖M‖ range lower bound
    #[arg(long)]
    pub beta_lb: Option<f64>,
    /// Override the instance ‖M‖ range upper bound (table3: replaces the
    /// built-in band list with the single [lb, ub) band)
    #[arg(long)]
    pub beta_ub: Option<f64>,
    #[arg(long, default_value_t = 20260822)]
    pub seed: u64,
    /// Run a single tolerance instead of the 1e-6 / 1e-8 / 1e-10 ladder
    #[arg(long)]
    pub tol_x: Option<f64>,
    /// Enable the residual stop (default: off — runs stop on the
    /// known-solution distance test, and only such stops count as solved)
    #[arg(long)]
    pub tol_res: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
    pub method: MethodArg,
    /// Timed repeats per record (odd); runtime is their median
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Write the per-record CSV to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    /// Magnitude of planted-solution and starting-point entries
    #[arg(long, default_value_t = 1e6)]
    pub value_scale: f64,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Sweep dimension; capped at 20 because the oracle suites enumerate
    /// all 2ⁿ sign patterns
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Instances per property suite
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 20260822)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve_cmd::run(&args),
        Command::Generate(args) => generate_cmd::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Verify(args) => verify::run(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
