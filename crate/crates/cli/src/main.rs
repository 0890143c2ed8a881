use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vopt::SolveCommand;
use vopt_core::engine::Algorithm;

#[derive(Parser)]
#[command(
    name = "vopt",
    about = "Solver for bounded convex vector optimization problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and export the solution set.
    Solve {
        /// Problem file (JSON).
        input: PathBuf,
        /// Algorithm: movs, monmo or adena.
        #[arg(long, default_value = "movs")]
        algorithm: Algorithm,
        /// Stopping tolerance of the scaled termination test.
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        /// Iteration limit.
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Worker threads for batched subproblem solves.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Subproblem instances generated per iteration; defaults to the
        /// thread count.
        #[arg(long)]
        batch_size: Option<usize>,
        /// Ordering cone override as generator rays, e.g. "1,2;2,1".
        #[arg(long)]
        cone_rays: Option<String>,
        /// Output directory for solutions.csv and result.json.
        #[arg(long, default_value = ".")]
        output: PathBuf,
        /// Also write front.svg (2 or 3 objectives).
        #[arg(long)]
        plot: bool,
        /// Also write bounds.json with the local bound sets (adena).
        #[arg(long)]
        emit_bounds: bool,
        /// Duality-gap tolerance for the subproblem backend.
        #[arg(long)]
        backend_tol: Option<f64>,
        /// Trace the barrier solver on stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Parse a problem file and check the convexity certificate.
    Validate { input: PathBuf },
    /// Write the bundled example problems.
    Examples {
        /// Target directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve {
            input,
            algorithm,
            eps,
            max_iter,
            threads,
            batch_size,
            cone_rays,
            output,
            plot,
            emit_bounds,
            backend_tol,
            verbose,
        } => vopt::run_solve(&SolveCommand {
            input,
            algorithm,
            eps,
            max_iter,
            threads,
            batch_size,
            cone_rays,
            output,
            plot,
            emit_bounds,
            backend_tol,
            verbose,
        }),
        Command::Validate { input } => vopt::run_validate(&input),
        Command::Examples { output } => vopt::run_examples(&output),
    };
    ExitCode::from(code as u8)
}
