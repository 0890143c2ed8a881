//! Command-line front end for the vector optimization solvers: problem
//! ingestion, algorithm selection, result export and static plots.

pub mod export;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use vopt_core::engine::{self, Algorithm, EngineError, SolveOptions, SolverStatus};
use vopt_core::model::{self, VectorProblem};
use vopt_core::{fixtures, OrderingCone};

/// Exit codes: 0 solved or iteration limit, 1 partial failure or internal
/// error, 2 infeasible, 3 unbounded, 4 validation error, 5 export error.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const PARTIAL: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const UNBOUNDED: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, Clone)]
pub struct SolveCommand {
    pub input: PathBuf,
    pub algorithm: Algorithm,
    pub eps: f64,
    pub max_iter: usize,
    pub threads: usize,
    pub batch_size: Option<usize>,
    pub cone_rays: Option<String>,
    pub output: PathBuf,
    pub plot: bool,
    pub emit_bounds: bool,
    pub backend_tol: Option<f64>,
    pub verbose: bool,
}

impl SolveCommand {
    pub fn options(&self) -> SolveOptions {
        let mut opts = SolveOptions {
            algorithm: self.algorithm,
            eps_opt: self.eps,
            max_iter: self.max_iter,
            thread_count: self.threads.max(1),
            // Batches default to the thread count.
            batch_size: self.batch_size.unwrap_or(self.threads).max(1),
            ..Default::default()
        };
        if let Some(tol) = self.backend_tol {
            opts.scalarization.tolerance = tol;
            opts.vertex_selection.tolerance = tol;
        }
        opts.scalarization.verbose = self.verbose;
        opts
    }
}

fn load_problem(path: &Path) -> Result<VectorProblem, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    model::parse_problem(&text).map_err(|e| e.to_string())
}

/// Parses a cone override of the form "a,b;c,d" (rows separated by
/// semicolons).
pub fn parse_cone_rays(text: &str) -> Result<Vec<DVector<f64>>, String> {
    text.split(';')
        .map(|row| {
            let vals: Result<Vec<f64>, _> =
                row.split(',').map(|c| c.trim().parse::<f64>()).collect();
            vals.map(DVector::from_vec)
                .map_err(|e| format!("bad cone ray '{row}': {e}"))
        })
        .collect()
}

pub fn run_solve(cmd: &SolveCommand) -> i32 {
    let mut problem = match load_problem(&cmd.input) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit_code::VALIDATION;
        }
    };
    if let Some(rays_arg) = &cmd.cone_rays {
        let rays = match parse_cone_rays(rays_arg) {
            Ok(r) => r,
            Err(msg) => {
                eprintln!("error: {msg}");
                return exit_code::VALIDATION;
            }
        };
        let cone = match OrderingCone::from_rays(&rays) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: invalid cone: {e}");
                return exit_code::VALIDATION;
            }
        };
        problem = match VectorProblem::new(
            problem.name.clone(),
            problem.n,
            problem.objectives.clone(),
            problem.constraints.clone(),
            cone,
        ) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code::VALIDATION;
            }
        };
    }

    let opts = cmd.options();
    let started = Instant::now();
    let result = match engine::solve(&problem, &opts) {
        Ok(r) => r,
        Err(EngineError::Model(e)) => {
            eprintln!("error: {e}");
            return exit_code::VALIDATION;
        }
        Err(EngineError::ConeNotSupported) => {
            eprintln!("error: {}", EngineError::ConeNotSupported);
            return exit_code::VALIDATION;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code::PARTIAL;
        }
    };
    let wall = started.elapsed().as_secs_f64();

    eprintln!(
        "{}: {} with {} solutions after {} subproblems ({} failed) in {:.3}s",
        problem.name,
        result.status,
        result.solutions.len(),
        result.subproblem_count,
        result.failed_parameter_count,
        wall
    );

    if let Err(e) = export::write_all(
        &cmd.output,
        &problem,
        &opts,
        &result,
        Some(wall),
        cmd.emit_bounds,
    ) {
        eprintln!("error: cannot write results: {e}");
        return exit_code::IO;
    }

    if cmd.plot {
        match plot::render_svg(&result, problem.num_objectives()) {
            Ok(svg) => {
                if let Err(e) = fs::write(cmd.output.join("front.svg"), svg) {
                    eprintln!("error: cannot write plot: {e}");
                    return exit_code::IO;
                }
            }
            Err(e) => eprintln!("warning: plot skipped: {e}"),
        }
    }

    match result.status {
        SolverStatus::Solved | SolverStatus::MaxIterReached => exit_code::OK,
        SolverStatus::Infeasible => exit_code::INFEASIBLE,
        SolverStatus::Unbounded => exit_code::UNBOUNDED,
        SolverStatus::PartialFailure => exit_code::PARTIAL,
    }
}

/// Parses and validates a problem file, printing the convexity certificate.
pub fn run_validate(path: &Path) -> i32 {
    let problem = match load_problem(path) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit_code::VALIDATION;
        }
    };
    match problem.convexity_certificate() {
        Ok(cert) => {
            println!(
                "{}: valid ({} variables, {} objectives, {} constraints)",
                problem.name,
                problem.n,
                problem.num_objectives(),
                problem.constraints.len()
            );
            for (ray, eig) in cert.dual_rays.iter().zip(&cert.min_eigenvalues) {
                println!(
                    "  dual ray {:?}: min eigenvalue {eig:.3e}",
                    ray.iter()
                        .map(|v| (v * 1e6).round() / 1e6)
                        .collect::<Vec<f64>>()
                );
            }
            exit_code::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code::VALIDATION
        }
    }
}

/// Writes the bundled example problem files into `dir`.
pub fn run_examples(dir: &Path) -> i32 {
    let examples = [
        ("disc.json", fixtures::disc()),
        ("ellipsoid.json", fixtures::ellipsoid()),
        ("tri_objective.json", fixtures::tri_objective()),
        ("portfolio.json", fixtures::portfolio()),
    ];
    if let Err(e) = fs::create_dir_all(dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return exit_code::IO;
    }
    for (name, problem) in examples {
        let path = dir.join(name);
        let mut text =
            serde_json::to_string_pretty(&problem.to_json()).expect("fixtures serialize");
        text.push('\n');
        if let Err(e) = fs::write(&path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return exit_code::IO;
        }
        println!("wrote {}", path.display());
    }
    exit_code::OK
}
