use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levelsaddle::app::{error_exit_code, run_report, run_solve, Algorithm, RunConfig};
use levelsaddle::trace::TraceFormat;

#[derive(Parser)]
#[command(name = "levelsaddle", version, about = "Saddle points through level-set min-max problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on a named problem.
    Solve(SolveArgs),
    /// Print the convergence table of a saved trace.
    Report {
        trace: PathBuf,
        /// Known critical value to measure level gaps against.
        #[arg(long, allow_hyphen_values = true)]
        true_value: Option<f64>,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    /// `quadratic-diag:a1,..,an`, `four-lines`, `failure-3d`, `cubic-saddle` or `cubic-saddle-3d`.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    morse_index: Option<usize>,
    /// `bisection`, `fast-local` or `both`.
    #[arg(long, default_value = "bisection")]
    algorithm: Algorithm,
    /// Comma-separated trust-region center; defaults to the origin.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// `csv` or `json`; defaults from the trace file extension.
    #[arg(long)]
    format: Option<TraceFormat>,
    /// Use the outer problem's subspace directly instead of estimating the negative eigenspace.
    #[arg(long)]
    naive_subspace: bool,
    /// Gradient norm at which bisection counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Solve(a) => {
            let cfg = RunConfig {
                problem: a.problem,
                morse_index: a.morse_index,
                algorithm: a.algorithm,
                center: a.center,
                radius: a.radius,
                lower: a.lower,
                upper: a.upper,
                tol: a.tol,
                max_iter: a.max_iter,
                seed: a.seed,
                trace_out: a.trace_out,
                format: a.format,
                naive_subspace: a.naive_subspace,
                grad_tol: a.grad_tol,
            };
            run_solve(&cfg, &mut stdout).map(|o| o.status.exit_code())
        }
        Command::Report { trace, true_value } => run_report(&trace, true_value, &mut stdout).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
