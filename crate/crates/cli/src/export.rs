//! Result export: solutions.csv, result.json and bounds.json.

use std::fs;
use std::io;
use std::path::Path;

use serde_json::json;
use vopt_core::engine::{SolveOptions, SolveResult};
use vopt_core::VectorProblem;

/// Formats a float with 17 significant digits, enough to round-trip a
/// double exactly.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per solution: decision variables, objective values, weight.
pub fn solutions_csv(problem: &VectorProblem, result: &SolveResult) -> String {
    let n = problem.n;
    let q = problem.num_objectives();
    let mut out = String::new();
    let mut header: Vec<String> = Vec::with_capacity(n + 2 * q);
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=q).map(|i| format!("f{i}")));
    header.extend((1..=q).map(|i| format!("w{i}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for ((x, f), w) in result
        .solutions
        .iter()
        .zip(&result.images)
        .zip(&result.weights)
    {
        let row: Vec<String> = x
            .iter()
            .chain(f.iter())
            .chain(w.iter())
            .map(|v| fmt17(*v))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Full result record: status, traces, diagnostics and an echo of every
/// effective option, so a run can be reproduced from the file alone.
/// `wall_time` is optional so reproducibility checks can omit it.
pub fn result_json(
    problem: &VectorProblem,
    opts: &SolveOptions,
    result: &SolveResult,
    wall_time_s: Option<f64>,
) -> serde_json::Value {
    let mut value = json!({
        "problem": problem.name,
        "status": result.status.name(),
        "solution_count": result.solutions.len(),
        "metric_trace": result.metric_trace,
        "subproblem_count": result.subproblem_count,
        "failed_parameter_count": result.failed_parameter_count,
        "options": {
            "algorithm": opts.algorithm.name(),
            "eps_opt": opts.eps_opt,
            "max_iter": opts.max_iter,
            "batch_size": opts.batch_size,
            "thread_count": opts.thread_count,
            "scalarization": {
                "tolerance": opts.scalarization.tolerance,
                "max_iterations": opts.scalarization.max_iterations,
            },
            "vertex_selection": {
                "tolerance": opts.vertex_selection.tolerance,
                "max_iterations": opts.vertex_selection.max_iterations,
            },
        },
    });
    if let Some(t) = wall_time_s {
        value["wall_time_s"] = json!(t);
    }
    value
}

/// Local bound sets of an enclosure run, as plain arrays.
pub fn bounds_json(result: &SolveResult) -> Option<serde_json::Value> {
    let enc = result.enclosure.as_ref()?;
    let rows = |set: &[nalgebra::DVector<f64>]| -> Vec<Vec<f64>> {
        set.iter().map(|v| v.iter().copied().collect()).collect()
    };
    Some(json!({
        "zone": {
            "low": enc.zone_low.iter().copied().collect::<Vec<f64>>(),
            "high": enc.zone_high.iter().copied().collect::<Vec<f64>>(),
        },
        "L": rows(&enc.lower),
        "U": rows(&enc.upper),
        "stable": rows(&enc.stable),
    }))
}

/// Writes solutions.csv, result.json and optionally bounds.json into `dir`.
pub fn write_all(
    dir: &Path,
    problem: &VectorProblem,
    opts: &SolveOptions,
    result: &SolveResult,
    wall_time_s: Option<f64>,
    emit_bounds: bool,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("solutions.csv"), solutions_csv(problem, result))?;
    let json = result_json(problem, opts, result, wall_time_s);
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    fs::write(dir.join("result.json"), text)?;
    if emit_bounds {
        if let Some(bounds) = bounds_json(result) {
            let mut text = serde_json::to_string_pretty(&bounds)?;
            text.push('\n');
            fs::write(dir.join("bounds.json"), text)?;
        }
    }
    Ok(())
}

/// Parses a solutions.csv back into rows of floats; used by tests to verify
/// the round trip.
pub fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|cell| cell.parse::<f64>().expect("malformed float cell"))
                .collect()
        })
        .collect()
}
