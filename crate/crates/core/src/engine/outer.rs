//! Outer-approximation drivers.
//!
//! Both drivers maintain an outer polyhedral approximation of the upper
//! image, refined each iteration by supporting halfspaces built from
//! subproblem duals. The MOVS variant also maintains an inner approximation
//! `conv(f(X)) + C` and picks the outer vertices farthest from it (a
//! projection subproblem), then solves one Pascoletti–Serafini scalarization
//! per selected vertex; the stopping metric is the vertex-wise Hausdorff
//! distance between the approximations. The MONMO variant solves a norm-min
//! scalarization per unresolved vertex, whose optimal value is exactly the
//! vertex's distance to the upper image; the maximum over the current
//! vertices is the metric.
//!
//! The outer approximation is reduced and re-enumerated every iteration.
//! Incremental vertex updates would avoid rework; at desk scale the full
//! re-enumeration is the simpler correct choice.
//!
//! Batches larger than one solve several subproblems per iteration (distinct
//! vertices) and apply all resulting cuts in a fixed vertex order, so runs
//! are reproducible regardless of thread scheduling.

use std::collections::{HashMap, HashSet};

use nalgebra::DVector;

use super::batch::solve_batch;
use super::{
    check_stopping, image_key, initialize, Context, EngineError, InitOutcome, SolveResult,
    SolverStatus,
};
use crate::backend::{SolveStatus, SubproblemKind};
use crate::polytope::{distance_point_to_polyhedron, Halfspace, Polyhedron, PolytopeError};
use crate::scalarize::ParamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum OuterKind {
    Movs,
    Monmo,
}

pub(super) fn run(ctx: &mut Context<'_>, kind: OuterKind) -> Result<SolveResult, EngineError> {
    let init = match initialize(ctx)? {
        InitOutcome::Ready(data) => data,
        InitOutcome::Infeasible => return Ok(SolveResult::terminal(SolverStatus::Infeasible)),
        InitOutcome::Unbounded => return Ok(SolveResult::terminal(SolverStatus::Unbounded)),
    };

    let cone_rays = ctx.problem.cone.generator_rays().to_vec();
    let outer = Polyhedron::from_halfspaces(init.halfspaces.clone());
    let mut state = OuterState {
        ctx,
        outer,
        cone_rays,
        inner_points: Vec::new(),
        solutions: Vec::new(),
        images: Vec::new(),
        weights: Vec::new(),
        seen_images: HashSet::new(),
        prev_distance: HashMap::new(),
        nm_values: HashMap::new(),
        nm_failed: HashSet::new(),
        pending_cuts: Vec::new(),
        trace: Vec::new(),
    };
    for ((x, image), w) in init
        .solutions
        .into_iter()
        .zip(init.images)
        .zip(init.weights)
    {
        state.add_solution(x, image, w);
    }

    let status = state.run_loop(kind)?;
    Ok(state.into_result(status))
}

struct OuterState<'c, 'p> {
    ctx: &'c mut Context<'p>,
    outer: Polyhedron,
    cone_rays: Vec<DVector<f64>>,
    /// Generator points of the inner approximation (MOVS).
    inner_points: Vec<DVector<f64>>,
    solutions: Vec<DVector<f64>>,
    images: Vec<DVector<f64>>,
    weights: Vec<DVector<f64>>,
    seen_images: HashSet<Vec<i64>>,
    /// Vertex distances from previous iterations; the inner approximation
    /// only grows, so these stay valid as upper bounds (MOVS).
    prev_distance: HashMap<Vec<i64>, f64>,
    /// Norm-min value per resolved vertex (MONMO); the upper image is fixed,
    /// so values stay valid forever.
    nm_values: HashMap<Vec<i64>, f64>,
    nm_failed: HashSet<Vec<i64>>,
    /// Cuts staged by the MONMO value pass, applied after the stopping check.
    pending_cuts: Vec<(DVector<f64>, f64, Halfspace)>,
    trace: Vec<f64>,
}

enum ValueOutcome {
    Values(Vec<(usize, f64)>),
    Unbounded,
}

impl OuterState<'_, '_> {
    fn add_solution(&mut self, x: DVector<f64>, image: DVector<f64>, weight: DVector<f64>) {
        self.insert_inner_point(image.clone());
        let key = image_key(&image);
        if self.seen_images.insert(key) {
            self.solutions.push(x);
            self.images.push(image);
            self.weights.push(weight);
        }
    }

    /// Inserts an image into the inner approximation generators, dropping
    /// cone-dominated ones (they do not change `conv(points) + C`).
    fn insert_inner_point(&mut self, y: DVector<f64>) {
        let cone = &self.ctx.problem.cone;
        if self
            .inner_points
            .iter()
            .any(|p| cone.leq(p, &y).unwrap_or(false))
        {
            return;
        }
        self.inner_points
            .retain(|p| !cone.leq(&y, p).unwrap_or(false));
        self.inner_points.push(y);
    }

    fn run_loop(&mut self, kind: OuterKind) -> Result<SolverStatus, EngineError> {
        // Vertices far beyond the image scale are floating-point artifacts of
        // nearly parallel supporting cuts: their coordinates exceed what the
        // bounded upper image can produce, their geometry duplicates the
        // shadow information of moderate vertices, and their membership tests
        // drown in relative round-off. They stay in the polyhedron but are
        // excluded from the metric and the vertex selection.
        let image_scale = self.images.iter().map(|y| y.amax()).fold(1.0_f64, f64::max);
        let vertex_cap = 1e3 * image_scale;
        let mut metric_initial = f64::NAN;
        for iter in 0..=self.ctx.opts.max_iter {
            self.outer = match self.outer.reduce_for_refinement() {
                Ok(p) => p,
                Err(e) => return Err(EngineError::Internal(e.to_string())),
            };
            let vertices: Vec<DVector<f64>> = self
                .outer
                .vertices()
                .iter()
                .filter(|v| v.amax() <= vertex_cap)
                .cloned()
                .collect();

            let per_vertex = match kind {
                OuterKind::Movs => self.movs_vertex_distances(&vertices)?,
                OuterKind::Monmo => match self.monmo_vertex_values(&vertices)? {
                    ValueOutcome::Values(v) => v,
                    ValueOutcome::Unbounded => return Ok(SolverStatus::Unbounded),
                },
            };
            if per_vertex.is_empty() {
                return Ok(SolverStatus::PartialFailure);
            }
            let metric = per_vertex
                .iter()
                .map(|(_, d)| *d)
                .fold(f64::NEG_INFINITY, f64::max);
            if std::env::var_os("VOPT_TRACE").is_some() {
                let argmax = per_vertex
                    .iter()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| &vertices[*i]);
                eprintln!(
                    "iter={iter} hs={} verts={} metric={metric:.6} argmax={:?}",
                    self.outer.halfspaces().len(),
                    vertices.len(),
                    argmax.map(|v| v.as_slice().to_vec())
                );
            }
            if iter == 0 {
                metric_initial = metric;
            }
            self.trace.push(metric);

            if check_stopping(metric, metric_initial, self.ctx.opts.eps_opt) {
                return Ok(SolverStatus::Solved);
            }
            if iter >= self.ctx.opts.max_iter {
                return Ok(SolverStatus::MaxIterReached);
            }

            // Vertices within the scaled stopping tolerance are resolved: no
            // cut is needed there for the termination certificate, and
            // cutting them anyway would grow the outer approximation far past
            // the ε-approximation scale.
            let resolve_tol = self.ctx.opts.eps_opt * metric_initial.max(1.0);
            let progressed = match kind {
                OuterKind::Movs => {
                    // Batches beyond the selected farthest vertex may reach
                    // below the stopping threshold; those scalarizations
                    // densify the solution set without delaying termination.
                    let select_tol = if self.ctx.opts.batch_size <= 1 {
                        resolve_tol
                    } else {
                        1e-6 * metric_initial.max(1.0)
                    };
                    let batch = self.select_movs_batch(&vertices, &per_vertex, select_tol);
                    if batch.is_empty() {
                        false
                    } else {
                        match self.solve_movs_batch(&vertices, batch)? {
                            Some(terminal) => return Ok(terminal),
                            None => true,
                        }
                    }
                }
                OuterKind::Monmo => self.apply_pending_cuts(resolve_tol) > 0,
            };
            if !progressed {
                return Ok(SolverStatus::PartialFailure);
            }
        }
        Ok(SolverStatus::MaxIterReached)
    }

    /// Distances from outer vertices to the inner approximation. Projection
    /// subproblems are solved exactly only while an upper bound says the
    /// vertex can still matter for the metric or the batch; the rest are
    /// skipped.
    fn movs_vertex_distances(
        &mut self,
        vertices: &[DVector<f64>],
    ) -> Result<Vec<(usize, f64)>, EngineError> {
        let inner = Polyhedron::from_generators(self.inner_points.clone(), self.cone_rays.clone());
        let mut order: Vec<(usize, f64)> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let key = image_key(v);
                let prev = self
                    .prev_distance
                    .get(&key)
                    .copied()
                    .unwrap_or(f64::INFINITY);
                let point_bound = self
                    .inner_points
                    .iter()
                    .map(|y| (v - y).norm())
                    .fold(f64::INFINITY, f64::min);
                (i, prev.min(point_bound))
            })
            .collect();
        order.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| lex_cmp(&vertices[a.0], &vertices[b.0]))
        });

        let want = self.ctx.opts.batch_size.max(1);
        let seen: Vec<bool> = vertices
            .iter()
            .map(|v| self.ctx.seen(&self.ps_key(v)))
            .collect();
        let mut unseen_ahead = order.iter().filter(|(i, _)| !seen[*i]).count();
        let mut exact: Vec<(usize, f64)> = Vec::new();
        let mut unseen_exact: Vec<(usize, f64)> = Vec::new();
        for (i, ub) in order {
            // The loop may stop once no skipped vertex can change the metric
            // (bounded by the largest exact distance) or the batch (bounded
            // by the want-th largest distance among vertices not yet
            // submitted for scalarization).
            let metric_cut = exact
                .iter()
                .map(|(_, d)| *d)
                .fold(f64::NEG_INFINITY, f64::max);
            let batch_done = unseen_ahead == 0
                || (unseen_exact.len() >= want && ub <= kth_largest(&unseen_exact, want));
            if ub <= metric_cut && batch_done {
                break;
            }
            if !seen[i] {
                unseen_ahead -= 1;
            }
            self.ctx.subproblem_count += 1;
            match distance_point_to_polyhedron(
                &vertices[i],
                &inner,
                self.ctx.backend,
                &self.ctx.opts.vertex_selection,
            ) {
                Ok((d, _)) => {
                    self.prev_distance.insert(image_key(&vertices[i]), d);
                    exact.push((i, d));
                    if !seen[i] {
                        unseen_exact.push((i, d));
                    }
                }
                Err(PolytopeError::BackendFailure(_)) => {}
                Err(e) => return Err(EngineError::Internal(e.to_string())),
            }
        }
        Ok(exact)
    }

    /// Norm-min values per vertex: memoized where seen before, solved (in
    /// batches) for new vertices. Solutions are recorded immediately; cuts
    /// are staged for application after the stopping check.
    fn monmo_vertex_values(
        &mut self,
        vertices: &[DVector<f64>],
    ) -> Result<ValueOutcome, EngineError> {
        let mut unresolved: Vec<usize> = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            let vkey = image_key(v);
            if self.nm_values.contains_key(&vkey) || self.nm_failed.contains(&vkey) {
                continue;
            }
            let key = ParamKey::new(SubproblemKind::NormMin, v.as_slice());
            if self.ctx.seen(&key) {
                self.nm_failed.insert(vkey);
                continue;
            }
            unresolved.push(i);
        }
        unresolved.sort_by(|&a, &b| lex_cmp(&vertices[a], &vertices[b]));

        let chunk = self.ctx.opts.batch_size.max(1);
        let n = self.ctx.problem.n;
        for group in unresolved.chunks(chunk) {
            let mut problems = Vec::with_capacity(group.len());
            for &i in group {
                self.ctx.mark_submitted(ParamKey::new(
                    SubproblemKind::NormMin,
                    vertices[i].as_slice(),
                ));
                problems.push(self.ctx.scalarizer.nm(&vertices[i])?);
            }
            let sols = solve_batch(
                self.ctx.backend,
                &problems,
                &self.ctx.opts.scalarization,
                self.ctx.opts.thread_count,
            );
            self.ctx.subproblem_count += problems.len();
            for (&i, sol) in group.iter().zip(sols) {
                let vkey = image_key(&vertices[i]);
                match sol.status {
                    SolveStatus::Optimal => {
                        let value = sol.objective_value.max(0.0);
                        let x = sol.x.rows(0, n).into_owned();
                        let image = self.ctx.problem.evaluate_objectives(&x)?;
                        let duals = &sol.duals[..self.ctx.scalarizer.cone_rows()];
                        self.nm_values.insert(vkey, value);
                        match self.ctx.scalarizer.cut_normal(duals) {
                            Some(w) => {
                                let h = Halfspace::new(w.clone(), w.dot(&image))
                                    .map_err(|e| EngineError::Internal(e.to_string()))?;
                                self.pending_cuts.push((vertices[i].clone(), value, h));
                                self.add_solution(x, image, w);
                            }
                            None => {
                                let w = self.ctx.problem.cone.interior_direction();
                                self.add_solution(x, image, w);
                            }
                        }
                    }
                    SolveStatus::Unbounded => return Ok(ValueOutcome::Unbounded),
                    _ => {
                        self.ctx.cache.record(ParamKey::new(
                            SubproblemKind::NormMin,
                            vertices[i].as_slice(),
                        ));
                        self.nm_failed.insert(vkey);
                    }
                }
            }
        }

        Ok(ValueOutcome::Values(
            vertices
                .iter()
                .enumerate()
                .filter_map(|(i, v)| self.nm_values.get(&image_key(v)).map(|d| (i, *d)))
                .collect(),
        ))
    }

    /// Applies staged MONMO cuts for vertices above the resolution tolerance,
    /// in lexicographic vertex order. Returns how many cuts were applied.
    fn apply_pending_cuts(&mut self, resolve_tol: f64) -> usize {
        let mut cuts = std::mem::take(&mut self.pending_cuts);
        cuts.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut applied = 0;
        for (_, value, h) in cuts {
            if value > resolve_tol {
                self.outer = self.outer.add_halfspace(h);
                applied += 1;
            }
        }
        applied
    }

    /// Vertices for this iteration's Pascoletti–Serafini solves: decreasing
    /// distance, ties by vertex order, capped at the batch size.
    fn select_movs_batch(
        &self,
        vertices: &[DVector<f64>],
        per_vertex: &[(usize, f64)],
        resolve_tol: f64,
    ) -> Vec<usize> {
        let mut ranked: Vec<(usize, f64)> = per_vertex.to_vec();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| lex_cmp(&vertices[a.0], &vertices[b.0]))
        });
        let want = self.ctx.opts.batch_size.max(1);
        let mut batch = Vec::new();
        for (i, d) in ranked {
            if batch.len() >= want || d <= resolve_tol {
                break;
            }
            if !self.ctx.seen(&self.ps_key(&vertices[i])) {
                batch.push(i);
            }
        }
        batch
    }

    fn ps_key(&self, vertex: &DVector<f64>) -> ParamKey {
        let dir = self.ctx.scalarizer.default_direction();
        let params: Vec<f64> = vertex.iter().chain(dir.iter()).copied().collect();
        ParamKey::new(SubproblemKind::PascolettiSerafini, &params)
    }

    /// Solves the selected Pascoletti–Serafini subproblems and applies all
    /// resulting cuts and solutions in vertex order.
    fn solve_movs_batch(
        &mut self,
        vertices: &[DVector<f64>],
        mut batch: Vec<usize>,
    ) -> Result<Option<SolverStatus>, EngineError> {
        batch.sort_by(|&a, &b| lex_cmp(&vertices[a], &vertices[b]));
        let dir = self.ctx.scalarizer.default_direction().clone();
        let mut problems = Vec::with_capacity(batch.len());
        for &i in &batch {
            self.ctx.mark_submitted(self.ps_key(&vertices[i]));
            problems.push(self.ctx.scalarizer.ps(&vertices[i], &dir)?);
        }
        let sols = solve_batch(
            self.ctx.backend,
            &problems,
            &self.ctx.opts.scalarization,
            self.ctx.opts.thread_count,
        );
        self.ctx.subproblem_count += problems.len();
        let n = self.ctx.problem.n;
        for (&i, sol) in batch.iter().zip(sols) {
            match sol.status {
                SolveStatus::Optimal => {
                    let x = sol.x.rows(0, n).into_owned();
                    let image = self.ctx.problem.evaluate_objectives(&x)?;
                    let duals = &sol.duals[..self.ctx.scalarizer.cone_rows()];
                    match self.ctx.scalarizer.cut_normal(duals) {
                        Some(w) => {
                            let h = Halfspace::new(w.clone(), w.dot(&image))
                                .map_err(|e| EngineError::Internal(e.to_string()))?;
                            self.outer = self.outer.add_halfspace(h);
                            self.add_solution(x, image, w);
                        }
                        None => {
                            let w = self.ctx.problem.cone.interior_direction();
                            self.add_solution(x, image, w);
                        }
                    }
                }
                SolveStatus::Unbounded => return Ok(Some(SolverStatus::Unbounded)),
                _ => {
                    self.ctx.cache.record(self.ps_key(&vertices[i]));
                }
            }
        }
        Ok(None)
    }

    fn into_result(self, status: SolverStatus) -> SolveResult {
        SolveResult {
            status,
            solutions: self.solutions,
            images: self.images,
            weights: self.weights,
            metric_trace: self.trace,
            subproblem_count: self.ctx.subproblem_count,
            failed_parameter_count: self.ctx.cache.len(),
            outer_halfspaces: self
                .outer
                .halfspaces()
                .iter()
                .map(|h| (h.normal().clone(), h.offset()))
                .collect(),
            enclosure: None,
        }
    }
}

fn kth_largest(exact: &[(usize, f64)], k: usize) -> f64 {
    let mut vals: Vec<f64> = exact.iter().map(|(_, d)| *d).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals[k - 1]
}

pub(super) fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}
