//! Deterministic parallel execution of independent subproblem batches.
//!
//! Workers receive disjoint slices of the batch and solve them without any
//! shared mutable state; results are collected by input index, so the output
//! order never depends on thread completion order. Runs with identical
//! inputs produce bit-identical outputs.

use crate::backend::{BackendOptions, ScalarBackend, ScalarProblem, ScalarSolution};

pub(crate) fn solve_batch(
    backend: &dyn ScalarBackend,
    problems: &[ScalarProblem],
    opts: &BackendOptions,
    threads: usize,
) -> Vec<ScalarSolution> {
    if threads <= 1 || problems.len() <= 1 {
        return problems.iter().map(|p| backend.solve(p, opts)).collect();
    }
    let workers = threads.min(problems.len());
    let chunk = problems.len().div_ceil(workers);
    let mut results: Vec<Option<ScalarSolution>> = vec![None; problems.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for (w, slice) in problems.chunks(chunk).enumerate() {
            let offset = w * chunk;
            handles.push(scope.spawn(move || {
                slice
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (offset + i, backend.solve(p, opts)))
                    .collect::<Vec<_>>()
            }));
        }
        for handle in handles {
            for (idx, sol) in handle.join().expect("batch worker panicked") {
                results[idx] = Some(sol);
            }
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every batch index is solved exactly once"))
        .collect()
}
