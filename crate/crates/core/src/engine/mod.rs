//! Solver drivers: vertex-selection outer approximation (MOVS), norm-min
//! outer approximation (MONMO) and enclosure refinement (AdEnA), plus the
//! scaled stopping test, failure handling and the deterministic batch
//! executor.
//!
//! All drivers share the weighted-sum initialization: one subproblem per
//! extreme ray of the dual cone. Infeasibility and unboundedness are
//! detected there, before any main loop runs. Failed parameter combinations
//! are remembered and never submitted to the backend twice.

mod adena;
mod batch;
mod outer;

use std::collections::HashSet;
use std::fmt;

use nalgebra::DVector;

use crate::backend::{
    BackendOptions, ReferenceBackend, ScalarBackend, SolveStatus, SubproblemKind,
};
use crate::model::{ModelError, VectorProblem};
use crate::polytope::Halfspace;
use crate::scalarize::{FailureCache, ParamKey, ScalarizeError, Scalarizer};
use crate::UNBOUNDED_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Movs,
    Monmo,
    Adena,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Movs => "movs",
            Algorithm::Monmo => "monmo",
            Algorithm::Adena => "adena",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "movs" => Ok(Algorithm::Movs),
            "monmo" => Ok(Algorithm::Monmo),
            "adena" => Ok(Algorithm::Adena),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    /// Stopping tolerance ε of the scaled test `metric ≤ ε·max(1, initial)`.
    pub eps_opt: f64,
    pub max_iter: usize,
    /// Backend options for scalarization subproblems.
    pub scalarization: BackendOptions,
    /// Backend options for vertex-selection (projection) subproblems.
    pub vertex_selection: BackendOptions,
    /// Subproblem instances generated per iteration (MOVS/MONMO).
    pub batch_size: usize,
    pub thread_count: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            algorithm: Algorithm::Movs,
            eps_opt: 1e-2,
            max_iter: 500,
            scalarization: BackendOptions::default(),
            vertex_selection: BackendOptions::default(),
            batch_size: 1,
            thread_count: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Solved,
    MaxIterReached,
    Infeasible,
    Unbounded,
    PartialFailure,
}

impl SolverStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolverStatus::Solved => "solved",
            SolverStatus::MaxIterReached => "max_iter_reached",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::PartialFailure => "partial_failure",
        }
    }
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Snapshot of the AdEnA enclosure at termination.
#[derive(Debug, Clone)]
pub struct EnclosureSnapshot {
    pub lower: Vec<DVector<f64>>,
    pub upper: Vec<DVector<f64>>,
    pub stable: Vec<DVector<f64>>,
    pub zone_low: DVector<f64>,
    pub zone_high: DVector<f64>,
}

/// Outcome of a solve: the finite weak ε-solution set with images, one
/// weight vector per solution, the stopping-metric trace and diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolverStatus,
    pub solutions: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
    pub weights: Vec<DVector<f64>>,
    pub metric_trace: Vec<f64>,
    pub subproblem_count: usize,
    pub failed_parameter_count: usize,
    /// Final outer approximation (empty for AdEnA).
    pub outer_halfspaces: Vec<(DVector<f64>, f64)>,
    /// Final enclosure (AdEnA only).
    pub enclosure: Option<EnclosureSnapshot>,
}

impl SolveResult {
    fn terminal(status: SolverStatus) -> Self {
        SolveResult {
            status,
            solutions: Vec::new(),
            images: Vec::new(),
            weights: Vec::new(),
            metric_trace: Vec::new(),
            subproblem_count: 0,
            failed_parameter_count: 0,
            outer_halfspaces: Vec::new(),
            enclosure: None,
        }
    }
}

#[derive(Debug)]
pub enum EngineError {
    Model(ModelError),
    Scalarize(ScalarizeError),
    /// AdEnA requires the natural ordering cone.
    ConeNotSupported,
    /// The weighted-sum initialization failed for a reason other than
    /// infeasibility or unboundedness.
    InitializationFailed(String),
    Internal(String),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Model(e) => write!(f, "{e}"),
            EngineError::Scalarize(e) => write!(f, "{e}"),
            EngineError::ConeNotSupported => {
                write!(f, "enclosure refinement requires the natural ordering cone")
            }
            EngineError::InitializationFailed(s) => write!(f, "initialization failed: {s}"),
            EngineError::Internal(s) => write!(f, "internal error: {s}"),
        }
    }
}

impl std::error::Error for EngineError {}

impl From<ModelError> for EngineError {
    fn from(e: ModelError) -> Self {
        EngineError::Model(e)
    }
}

impl From<ScalarizeError> for EngineError {
    fn from(e: ScalarizeError) -> Self {
        EngineError::Scalarize(e)
    }
}

/// Scaled stopping test `metric_now ≤ eps_opt · max(1, metric_initial)`.
/// The factor of one guards against near-zero initial metrics.
pub fn check_stopping(metric_now: f64, metric_initial: f64, eps_opt: f64) -> bool {
    metric_now <= eps_opt * metric_initial.max(1.0)
}

/// Solves with the built-in barrier backend.
pub fn solve(problem: &VectorProblem, opts: &SolveOptions) -> Result<SolveResult, EngineError> {
    solve_with_backend(problem, opts, &ReferenceBackend)
}

/// Solves with a caller-supplied backend. The convexity certificate is
/// recomputed first; no algorithm runs on a problem without it.
pub fn solve_with_backend(
    problem: &VectorProblem,
    opts: &SolveOptions,
    backend: &dyn ScalarBackend,
) -> Result<SolveResult, EngineError> {
    problem.convexity_certificate()?;
    let mut ctx = Context::new(problem, opts, backend);
    match opts.algorithm {
        Algorithm::Movs => outer::run(&mut ctx, outer::OuterKind::Movs),
        Algorithm::Monmo => outer::run(&mut ctx, outer::OuterKind::Monmo),
        Algorithm::Adena => adena::run(&mut ctx),
    }
}

/// Shared driver state: scalarization templates, failure memory and
/// submission bookkeeping.
pub(crate) struct Context<'a> {
    pub problem: &'a VectorProblem,
    pub opts: &'a SolveOptions,
    pub backend: &'a dyn ScalarBackend,
    pub scalarizer: Scalarizer,
    pub cache: FailureCache,
    submitted: HashSet<ParamKey>,
    pub subproblem_count: usize,
}

impl<'a> Context<'a> {
    fn new(
        problem: &'a VectorProblem,
        opts: &'a SolveOptions,
        backend: &'a dyn ScalarBackend,
    ) -> Self {
        Context {
            problem,
            opts,
            backend,
            scalarizer: Scalarizer::new(problem),
            cache: FailureCache::new(),
            submitted: HashSet::new(),
            subproblem_count: 0,
        }
    }

    /// True when this key must not be submitted: it either failed before or
    /// has already been solved once.
    pub fn seen(&self, key: &ParamKey) -> bool {
        self.cache.contains(key) || self.submitted.contains(key)
    }

    pub fn mark_submitted(&mut self, key: ParamKey) {
        self.submitted.insert(key);
    }
}

/// Result of the weighted-sum initialization phase.
pub(crate) enum InitOutcome {
    Ready(InitData),
    Infeasible,
    Unbounded,
}

pub(crate) struct InitData {
    pub solutions: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
    /// Dual ray used as the weight for each initial solution.
    pub weights: Vec<DVector<f64>>,
    /// Supporting halfspaces `{z : w·z ≥ w·f(x_w)}` of the initial outer
    /// approximation.
    pub halfspaces: Vec<Halfspace>,
    /// Optimal weighted-sum values per dual ray (the ideal point for the
    /// natural ordering).
    pub ws_values: Vec<f64>,
}

/// Solves one weighted-sum subproblem per dual extreme ray. Detects
/// infeasibility and unboundedness before any main loop.
pub(crate) fn initialize(ctx: &mut Context) -> Result<InitOutcome, EngineError> {
    let rays: Vec<DVector<f64>> = ctx.scalarizer.dual_rays().to_vec();
    let mut data = InitData {
        solutions: Vec::new(),
        images: Vec::new(),
        weights: Vec::new(),
        halfspaces: Vec::new(),
        ws_values: Vec::new(),
    };
    for w in &rays {
        let params: Vec<f64> = w.iter().copied().collect();
        let key = ParamKey::new(SubproblemKind::WeightedSum, &params);
        if ctx.seen(&key) {
            continue;
        }
        ctx.mark_submitted(key.clone());
        let sp = ctx.scalarizer.ws(w)?;
        let sol = ctx.backend.solve(&sp, &ctx.opts.scalarization);
        ctx.subproblem_count += 1;
        match sol.status {
            SolveStatus::Optimal => {
                if sol.objective_value.abs() > UNBOUNDED_THRESHOLD {
                    return Ok(InitOutcome::Unbounded);
                }
                let image = ctx.problem.evaluate_objectives(&sol.x)?;
                if image.amax() > UNBOUNDED_THRESHOLD {
                    return Ok(InitOutcome::Unbounded);
                }
                data.halfspaces.push(
                    Halfspace::new(w.clone(), w.dot(&image))
                        .map_err(|e| EngineError::Internal(e.to_string()))?,
                );
                data.ws_values.push(sol.objective_value);
                data.solutions.push(sol.x);
                data.images.push(image);
                data.weights.push(w.clone());
            }
            SolveStatus::Infeasible => return Ok(InitOutcome::Infeasible),
            SolveStatus::Unbounded => return Ok(InitOutcome::Unbounded),
            SolveStatus::NumericalFailure => {
                return Err(EngineError::InitializationFailed(format!(
                    "weighted-sum subproblem failed for dual ray {:?}",
                    w.as_slice()
                )));
            }
        }
    }
    if data.halfspaces.is_empty() {
        return Err(EngineError::InitializationFailed(
            "no weighted-sum subproblem succeeded".to_string(),
        ));
    }
    Ok(InitOutcome::Ready(data))
}

/// Rounded-point key used to deduplicate reported solutions and memoize
/// per-vertex results.
pub(crate) fn image_key(image: &DVector<f64>) -> Vec<i64> {
    crate::scalarize::rounded_digits(image.as_slice())
}
