//! Single-objective convex subproblem solving behind a pluggable contract.
//!
//! The engine only sees [`ScalarBackend::solve`]; alternative backends can
//! wrap external conic solvers. The built-in [`ReferenceBackend`] is a primal
//! log-barrier interior-point method: linear equalities are eliminated into
//! the null space, a phase-1 slack minimization finds a strictly feasible
//! point, and damped Newton steps follow the central path with the barrier
//! parameter divided by ten per outer iteration. Second-order cone
//! constraints use the barrier `−log((cᵀx+d)² − ‖Ax+b‖²)`.
//!
//! Status semantics: `Optimal` implies primal feasibility within the
//! feasibility tolerance and a stationarity residual below the KKT tolerance;
//! `Unbounded` is reported when the objective drops below `−10¹³`;
//! `NumericalFailure` covers everything the method could not certify. Callers
//! treat failures as a bad parameter combination and move on.

use nalgebra::{DMatrix, DVector};

use crate::model::{Constraint, QuadraticFunction};
use crate::{TOL_FEAS, TOL_KKT, UNBOUNDED_THRESHOLD};

/// Identifies which scalarization produced a subproblem; used for failure
/// bookkeeping and test instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubproblemKind {
    WeightedSum,
    PascolettiSerafini,
    NormMin,
    Projection,
}

/// Scalarization kind plus the parameter vector that instantiated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemTag {
    pub kind: SubproblemKind,
    pub params: Vec<f64>,
}

/// Single-objective convex subproblem in the supported constraint class.
#[derive(Debug, Clone)]
pub struct ScalarProblem {
    pub n_vars: usize,
    pub objective: QuadraticFunction,
    pub constraints: Vec<Constraint>,
    pub warm_start: Option<DVector<f64>>,
    pub tag: Option<SubproblemTag>,
}

impl ScalarProblem {
    pub fn new(n_vars: usize, objective: QuadraticFunction, constraints: Vec<Constraint>) -> Self {
        ScalarProblem {
            n_vars,
            objective,
            constraints,
            warm_start: None,
            tag: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Optimal => write!(f, "optimal"),
            SolveStatus::Infeasible => write!(f, "infeasible"),
            SolveStatus::Unbounded => write!(f, "unbounded"),
            SolveStatus::NumericalFailure => write!(f, "numerical_failure"),
        }
    }
}

/// Solution report. `duals` has one entry per constraint in problem order;
/// equality constraints get zero.
#[derive(Debug, Clone)]
pub struct ScalarSolution {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub objective_value: f64,
    pub duals: Vec<f64>,
    /// Scaled stationarity residual of the returned point.
    pub kkt_residual: f64,
}

impl ScalarSolution {
    fn failed(n: usize, status: SolveStatus) -> Self {
        ScalarSolution {
            status,
            x: DVector::zeros(n),
            objective_value: f64::NAN,
            duals: Vec::new(),
            kkt_residual: f64::NAN,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackendOptions {
    /// Target duality gap; the barrier parameter is driven below
    /// `tolerance / constraint count`.
    pub tolerance: f64,
    /// Maximum outer (centering) iterations.
    pub max_iterations: usize,
    pub verbose: bool,
}

impl Default for BackendOptions {
    fn default() -> Self {
        BackendOptions {
            tolerance: 1e-7,
            max_iterations: 50,
            verbose: false,
        }
    }
}

/// Contract between the drivers and any single-objective solver.
///
/// `solve` must be reentrant: implementations may be called concurrently on
/// disjoint problem instances.
pub trait ScalarBackend: Send + Sync {
    fn solve(&self, problem: &ScalarProblem, opts: &BackendOptions) -> ScalarSolution;
}

/// Built-in primal log-barrier interior-point solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceBackend;

impl ScalarBackend for ReferenceBackend {
    fn solve(&self, problem: &ScalarProblem, opts: &BackendOptions) -> ScalarSolution {
        solve_scalar(problem, opts)
    }
}

/// Newton decrement² below which an inner solve counts as centered.
const NEWTON_TOL: f64 = 1e-16;
/// Decrement² above which steps are damped by an Armijo search. Below it the
/// iterate is inside the quadratic-convergence region of the self-concordant
/// barrier, where full steps converge and the merit difference would drown in
/// the cancellation noise of near-active slacks anyway.
const DAMPED_THRESHOLD: f64 = 1e-2;
const MAX_INNER: usize = 100;
const MU_SHRINK: f64 = 0.1;
const STRICT_MARGIN: f64 = 1e-8;

/// Inequality constraint reduced to the null space of the equalities,
/// in the form `g(y) ≤ 0`.
enum Ineq {
    Lin {
        c: DVector<f64>,
        d: f64,
    },
    Quad {
        q: DMatrix<f64>,
        c: DVector<f64>,
        d: f64,
    },
    Soc {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: f64,
        ata: DMatrix<f64>,
        cct: DMatrix<f64>,
    },
}

impl Ineq {
    fn soc(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64) -> Self {
        let ata = a.transpose() * &a;
        let cct = &c * c.transpose();
        Ineq::Soc {
            a,
            b,
            c,
            d,
            ata,
            cct,
        }
    }

    /// Scalar-form value `g(y)`; feasible iff ≤ 0.
    fn value(&self, y: &DVector<f64>) -> f64 {
        match self {
            Ineq::Lin { c, d } => c.dot(y) + d,
            Ineq::Quad { q, c, d } => 0.5 * (q * y).dot(y) + c.dot(y) + d,
            Ineq::Soc { a, b, c, d, .. } => (a * y + b).norm() - (c.dot(y) + d),
        }
    }

    /// Strict interior test for the barrier domain.
    fn strictly_feasible(&self, y: &DVector<f64>, margin: f64) -> bool {
        match self {
            Ineq::Lin { .. } | Ineq::Quad { .. } => self.value(y) < -margin,
            Ineq::Soc { a, b, c, d, .. } => {
                let u = c.dot(y) + d;
                u > margin && u * u - (a * y + b).norm_squared() > margin * margin
            }
        }
    }

    /// Adds the barrier gradient and Hessian contribution at `y`.
    /// Returns false when `y` left the domain.
    fn add_barrier(
        &self,
        y: &DVector<f64>,
        grad: &mut DVector<f64>,
        hess: &mut DMatrix<f64>,
    ) -> bool {
        match self {
            Ineq::Lin { c, d } => {
                let h = -(c.dot(y) + d);
                if h <= 0.0 {
                    return false;
                }
                *grad += c / h;
                hess.ger(1.0 / (h * h), c, c, 1.0);
                true
            }
            Ineq::Quad { q, c, d } => {
                let g = 0.5 * (q * y).dot(y) + c.dot(y) + d;
                let h = -g;
                if h <= 0.0 {
                    return false;
                }
                let gg = q * y + c;
                *grad += &gg / h;
                *hess += q / h;
                hess.ger(1.0 / (h * h), &gg, &gg, 1.0);
                true
            }
            Ineq::Soc {
                a,
                b,
                c,
                d,
                ata,
                cct,
            } => {
                let u = c.dot(y) + d;
                let v = a * y + b;
                let psi = u * u - v.norm_squared();
                if u <= 0.0 || psi <= 0.0 {
                    return false;
                }
                let gpsi = c * (2.0 * u) - a.transpose() * (2.0 * v);
                *grad -= &gpsi / psi;
                *hess += (ata * 2.0 - cct * 2.0) / psi;
                hess.ger(1.0 / (psi * psi), &gpsi, &gpsi, 1.0);
                true
            }
        }
    }

    /// Barrier log term at `y`, or +∞ outside the domain.
    fn barrier_value(&self, y: &DVector<f64>) -> f64 {
        match self {
            Ineq::Lin { .. } | Ineq::Quad { .. } => {
                let h = -self.value(y);
                if h <= 0.0 {
                    f64::INFINITY
                } else {
                    -h.ln()
                }
            }
            Ineq::Soc { a, b, c, d, .. } => {
                let u = c.dot(y) + d;
                let psi = u * u - (a * y + b).norm_squared();
                if u <= 0.0 || psi <= 0.0 {
                    f64::INFINITY
                } else {
                    -psi.ln()
                }
            }
        }
    }

    /// Barrier degree for the duality gap bound.
    fn degree(&self) -> f64 {
        match self {
            Ineq::Lin { .. } | Ineq::Quad { .. } => 1.0,
            Ineq::Soc { .. } => 2.0,
        }
    }

    /// Dual multiplier estimate at barrier parameter `mu`.
    fn dual(&self, y: &DVector<f64>, mu: f64) -> f64 {
        let slack = -self.value(y);
        if slack <= 0.0 {
            0.0
        } else {
            mu / slack
        }
    }

    /// Dual contribution `λ·∇g` to the stationarity residual at barrier
    /// parameter `mu`. For second-order cones the barrier-form gradient is
    /// used; the scalar form is nonsmooth at the cone tip while the barrier
    /// gradient encodes the conic dual pair exactly.
    fn dual_gradient(&self, y: &DVector<f64>, mu: f64) -> DVector<f64> {
        match self {
            Ineq::Lin { c, .. } => c * self.dual(y, mu),
            Ineq::Quad { q, c, .. } => (q * y + c) * self.dual(y, mu),
            Ineq::Soc { a, b, c, d, .. } => {
                let u = c.dot(y) + d;
                let v = a * y + b;
                let psi = u * u - v.norm_squared();
                if psi <= 0.0 {
                    return DVector::zeros(y.len());
                }
                (a.transpose() * (2.0 * v) - c * (2.0 * u)) * (mu / psi)
            }
        }
    }

    /// Gradient of the scalar form `g`, used by the dual polish.
    fn scalar_gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Ineq::Lin { c, .. } => c.clone(),
            Ineq::Quad { q, c, .. } => q * y + c,
            Ineq::Soc { a, b, c, .. } => {
                let v = a * y + b;
                let n = v.norm();
                if n <= 1e-14 {
                    -c
                } else {
                    a.transpose() * (v / n) - c
                }
            }
        }
    }
}

struct Reduced {
    /// Particular solution of the equalities.
    x0: DVector<f64>,
    /// Orthonormal null-space basis (n × k).
    basis: DMatrix<f64>,
    objective: QuadraticFunction,
    ineqs: Vec<Ineq>,
    /// Original constraint index per inequality.
    index_map: Vec<usize>,
}

/// Solves a convex subproblem with the built-in barrier method.
pub fn solve_scalar(sp: &ScalarProblem, opts: &BackendOptions) -> ScalarSolution {
    let n = sp.n_vars;
    let reduced = match reduce(sp) {
        Ok(r) => r,
        Err(status) => return ScalarSolution::failed(n, status),
    };
    let k = reduced.basis.ncols();

    // Unique point after elimination: feasibility decides everything.
    if k == 0 {
        let x = reduced.x0.clone();
        let zero = DVector::zeros(0);
        let worst = reduced
            .ineqs
            .iter()
            .map(|c| c.value(&zero))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > TOL_FEAS {
            return ScalarSolution::failed(n, SolveStatus::Infeasible);
        }
        let value = sp.objective.value(&x);
        return ScalarSolution {
            status: SolveStatus::Optimal,
            x,
            objective_value: value,
            duals: vec![0.0; sp.constraints.len()],
            kkt_residual: 0.0,
        };
    }

    // No inequalities: plain (equality-constrained) QP.
    if reduced.ineqs.is_empty() {
        return solve_unconstrained(sp, &reduced);
    }

    let y0 = match find_interior(sp, &reduced, opts) {
        Ok(y) => y,
        Err(status) => return ScalarSolution::failed(n, status),
    };

    match barrier_minimize(&reduced.objective, &reduced.ineqs, y0, opts, None) {
        BarrierOutcome::Converged { y, mu } => finish(sp, &reduced, &y, mu),
        BarrierOutcome::Unbounded => ScalarSolution::failed(n, SolveStatus::Unbounded),
        BarrierOutcome::Stalled => ScalarSolution::failed(n, SolveStatus::NumericalFailure),
    }
}

fn reduce(sp: &ScalarProblem) -> Result<Reduced, SolveStatus> {
    let n = sp.n_vars;
    let mut eq_rows: Vec<DVector<f64>> = Vec::new();
    let mut eq_rhs: Vec<f64> = Vec::new();
    for c in &sp.constraints {
        if let Constraint::LinearEq { a, b } = c {
            eq_rows.push(a.clone());
            eq_rhs.push(*b);
        }
    }

    let (x0, basis) = if eq_rows.is_empty() {
        (DVector::zeros(n), DMatrix::identity(n, n))
    } else {
        let m = eq_rows.len();
        let a = DMatrix::from_fn(m, n, |i, j| eq_rows[i][j]);
        let b = DVector::from_vec(eq_rhs);
        let svd = a.clone().svd(true, true);
        let x0 = svd
            .solve(&b, 1e-12)
            .map_err(|_| SolveStatus::NumericalFailure)?;
        let residual = (&a * &x0 - &b).amax();
        if residual > TOL_FEAS * (1.0 + b.amax()) {
            return Err(SolveStatus::Infeasible);
        }
        // Null space of A from the eigenvectors of AᵀA: orthonormal columns
        // with (numerically) zero eigenvalue.
        let eig = nalgebra::SymmetricEigen::new(a.transpose() * &a);
        let lam_max = eig.eigenvalues.amax().max(1.0);
        let null_cols: Vec<usize> = (0..n)
            .filter(|&i| eig.eigenvalues[i] <= 1e-10 * lam_max)
            .collect();
        let mut basis = DMatrix::zeros(n, null_cols.len());
        for (j, &i) in null_cols.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(i));
        }
        (x0, basis)
    };

    let bt = basis.transpose();
    let obj = reduce_quadratic(&sp.objective, &x0, &basis, &bt);

    let mut ineqs = Vec::new();
    let mut index_map = Vec::new();
    for (idx, c) in sp.constraints.iter().enumerate() {
        match c {
            Constraint::LinearEq { .. } => {}
            Constraint::LinearIneq { a, b } => {
                ineqs.push(Ineq::Lin {
                    c: &bt * a,
                    d: a.dot(&x0) - b,
                });
                index_map.push(idx);
            }
            Constraint::QuadraticIneq { g } => {
                if g.q.amax() == 0.0 {
                    ineqs.push(Ineq::Lin {
                        c: &bt * &g.c,
                        d: g.value(&x0),
                    });
                } else {
                    let r = reduce_quadratic(g, &x0, &basis, &bt);
                    ineqs.push(Ineq::Quad {
                        q: r.q,
                        c: r.c,
                        d: r.d,
                    });
                }
                index_map.push(idx);
            }
            Constraint::SecondOrderCone { a, b, c, d } => {
                ineqs.push(Ineq::soc(a * &basis, a * &x0 + b, &bt * c, c.dot(&x0) + d));
                index_map.push(idx);
            }
        }
    }

    Ok(Reduced {
        x0,
        basis,
        objective: obj,
        ineqs,
        index_map,
    })
}

fn reduce_quadratic(
    f: &QuadraticFunction,
    x0: &DVector<f64>,
    basis: &DMatrix<f64>,
    bt: &DMatrix<f64>,
) -> QuadraticFunction {
    let q = bt * &f.q * basis;
    let q = (&q + q.transpose()) * 0.5;
    let c = bt * (&f.q * x0 + &f.c);
    let d = f.value(x0);
    QuadraticFunction { q, c, d }
}

fn solve_unconstrained(sp: &ScalarProblem, reduced: &Reduced) -> ScalarSolution {
    let f = &reduced.objective;
    let solved =
        f.q.clone()
            .cholesky()
            .map(|ch| ch.solve(&(-&f.c)))
            .or_else(|| f.q.clone().svd(true, true).solve(&(-&f.c), 1e-12).ok());
    match solved {
        Some(y) if (&f.q * &y + &f.c).amax() <= 1e-8 * (1.0 + f.c.amax()) => {
            let x = &reduced.x0 + &reduced.basis * &y;
            ScalarSolution {
                status: SolveStatus::Optimal,
                objective_value: sp.objective.value(&x),
                x,
                duals: vec![0.0; sp.constraints.len()],
                kkt_residual: 0.0,
            }
        }
        // Gradient has a component outside the range of the Hessian: the
        // objective decreases without bound along it.
        _ => ScalarSolution::failed(sp.n_vars, SolveStatus::Unbounded),
    }
}

fn strictly_feasible_all(ineqs: &[Ineq], y: &DVector<f64>, margin: f64) -> bool {
    ineqs.iter().all(|c| c.strictly_feasible(y, margin))
}

/// Finds a strictly feasible point: warm start, origin, then phase-1 slack
/// minimization.
fn find_interior(
    sp: &ScalarProblem,
    reduced: &Reduced,
    opts: &BackendOptions,
) -> Result<DVector<f64>, SolveStatus> {
    let k = reduced.basis.ncols();
    if let Some(w) = &sp.warm_start {
        if w.len() == sp.n_vars {
            let y = reduced.basis.transpose() * (w - &reduced.x0);
            if strictly_feasible_all(&reduced.ineqs, &y, STRICT_MARGIN) {
                return Ok(y);
            }
        }
    }
    let origin = DVector::zeros(k);
    if strictly_feasible_all(&reduced.ineqs, &origin, STRICT_MARGIN) {
        return Ok(origin);
    }

    // Phase 1 over (y, s): minimize s subject to every constraint relaxed by
    // s, with the safeguard s ≥ −1 keeping the problem bounded.
    let mut init_s = 1.0_f64;
    for c in &reduced.ineqs {
        match c {
            Ineq::Lin { d, .. } | Ineq::Quad { d, .. } => init_s = init_s.max(d + 1.0),
            Ineq::Soc { b, d, .. } => init_s = init_s.max(b.norm() - d + 1.0),
        }
    }
    let extend = |c: &DVector<f64>, last: f64| -> DVector<f64> {
        let mut ce = DVector::zeros(k + 1);
        ce.rows_mut(0, k).copy_from(c);
        ce[k] = last;
        ce
    };
    let mut ext_ineqs: Vec<Ineq> = Vec::with_capacity(reduced.ineqs.len() + 1);
    for c in &reduced.ineqs {
        ext_ineqs.push(match c {
            Ineq::Lin { c, d } => Ineq::Lin {
                c: extend(c, -1.0),
                d: *d,
            },
            Ineq::Quad { q, c, d } => {
                let mut qe = DMatrix::zeros(k + 1, k + 1);
                qe.view_mut((0, 0), (k, k)).copy_from(q);
                Ineq::Quad {
                    q: qe,
                    c: extend(c, -1.0),
                    d: *d,
                }
            }
            Ineq::Soc { a, b, c, d, .. } => {
                let mut ae = DMatrix::zeros(a.nrows(), k + 1);
                ae.view_mut((0, 0), (a.nrows(), k)).copy_from(a);
                Ineq::soc(ae, b.clone(), extend(c, 1.0), *d)
            }
        });
    }
    ext_ineqs.push(Ineq::Lin {
        c: extend(&DVector::zeros(k), -1.0),
        d: -1.0,
    });

    // A small proximal term keeps the phase-1 minimizer bounded: without it
    // the barrier pulls the free directions to infinity because growing
    // slacks only lower the merit.
    let phase1_obj = QuadraticFunction::new(
        DMatrix::identity(k + 1, k + 1) * 1e-8,
        extend(&DVector::zeros(k), 1.0),
        0.0,
    );
    let mut start = DVector::zeros(k + 1);
    start[k] = init_s;

    match barrier_minimize(&phase1_obj, &ext_ineqs, start, opts, Some(-1e-6)) {
        BarrierOutcome::Converged { y, .. } => {
            let s = y[k];
            let point = y.rows(0, k).into_owned();
            if s < -1e-7 && strictly_feasible_all(&reduced.ineqs, &point, 0.0) {
                Ok(point)
            } else if s > TOL_FEAS {
                Err(SolveStatus::Infeasible)
            } else {
                // Interior could not be certified: a failed parameter
                // combination from the caller's point of view.
                Err(SolveStatus::NumericalFailure)
            }
        }
        _ => Err(SolveStatus::NumericalFailure),
    }
}

enum BarrierOutcome {
    Converged { y: DVector<f64>, mu: f64 },
    Unbounded,
    Stalled,
}

/// Path following with μ ← μ/10 per outer iteration, starting at μ = 1.
/// `early_exit` stops as soon as the objective falls below the threshold
/// (used by phase 1).
fn barrier_minimize(
    objective: &QuadraticFunction,
    ineqs: &[Ineq],
    start: DVector<f64>,
    opts: &BackendOptions,
    early_exit: Option<f64>,
) -> BarrierOutcome {
    let degree: f64 = ineqs.iter().map(|c| c.degree()).sum();
    let mut y = start;
    let mut mu = 1.0;
    // Slacks at the central point scale with μ; keep them comfortably above
    // the cancellation noise of the slack evaluation. Quadratic constraints
    // cancel at the square of the data scale and need a higher floor.
    let has_quadratic = ineqs.iter().any(|c| matches!(c, Ineq::Quad { .. }));
    let noise_floor = if has_quadratic { 3e-9 } else { 1e-11 };
    let mu_floor = (opts.tolerance / degree.max(1.0)).max(noise_floor);

    for _outer in 0..opts.max_iterations {
        let t = 1.0 / mu;
        let mut prev_decrement = f64::INFINITY;
        for _inner in 0..MAX_INNER {
            let obj_now = objective.value(&y);
            if let Some(exit) = early_exit {
                if obj_now < exit {
                    return BarrierOutcome::Converged { y, mu };
                }
            }
            if obj_now < -UNBOUNDED_THRESHOLD {
                return BarrierOutcome::Unbounded;
            }
            if !obj_now.is_finite() || y.amax() > 1e18 {
                return BarrierOutcome::Stalled;
            }
            let mut grad = (&objective.q * &y + &objective.c) * t;
            let mut hess = &objective.q * t;
            let mut in_domain = true;
            for c in ineqs {
                if !c.add_barrier(&y, &mut grad, &mut hess) {
                    in_domain = false;
                    break;
                }
            }
            if !in_domain {
                return BarrierOutcome::Stalled;
            }
            let Some(step) = newton_step(&hess, &grad) else {
                return BarrierOutcome::Stalled;
            };
            let decrement = -grad.dot(&step);
            if opts.verbose {
                eprintln!("barrier: mu={mu:.2e} inner={_inner} decrement={decrement:.3e}");
            }
            if decrement <= NEWTON_TOL {
                break;
            }
            // Inside the quadratic region the decrement roughly squares per
            // step; a stagnating decrement means the slack-evaluation noise
            // floor has been reached and further steps only jitter.
            if decrement < DAMPED_THRESHOLD && decrement > 0.25 * prev_decrement {
                break;
            }
            prev_decrement = decrement;
            // Feasibility first.
            let mut alpha = 1.0;
            let mut feasible = false;
            for _ in 0..70 {
                let trial = &y + &step * alpha;
                if strictly_feasible_all(ineqs, &trial, 0.0) {
                    feasible = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !feasible {
                if opts.verbose {
                    eprintln!("barrier: no feasible step");
                }
                break;
            }
            if decrement > DAMPED_THRESHOLD {
                // Armijo on the barrier merit, with the objective shifted by
                // its current value so the test is not drowned by t·f(y).
                let f_y = objective.value(&y);
                let merit = |p: &DVector<f64>| -> f64 {
                    t * (objective.value(p) - f_y)
                        + ineqs.iter().map(|c| c.barrier_value(p)).sum::<f64>()
                };
                let m0 = merit(&y);
                let slope = grad.dot(&step);
                let mut accepted = false;
                for _ in 0..70 {
                    let trial = &y + &step * alpha;
                    if merit(&trial) <= m0 + 0.25 * alpha * slope {
                        y = trial;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    if opts.verbose {
                        eprintln!("barrier: line search failed at alpha={alpha:.2e}");
                    }
                    break;
                }
            } else {
                // Quadratic-convergence region: the merit difference is below
                // float resolution, but the full (feasible) step converges.
                y += &step * alpha;
            }
            if (&step * alpha).amax() <= 1e-16 * (1.0 + y.amax()) {
                break;
            }
        }
        if mu <= mu_floor {
            return BarrierOutcome::Converged { y, mu };
        }
        mu *= MU_SHRINK;
    }
    BarrierOutcome::Converged { y, mu }
}

fn newton_step(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let k = hess.nrows();
    let scale = hess.diagonal().amax().max(1.0);
    let mut jitter = 0.0;
    for _ in 0..8 {
        let mut h = hess.clone();
        if jitter > 0.0 {
            for i in 0..k {
                h[(i, i)] += jitter;
            }
        }
        if let Some(ch) = h.cholesky() {
            return Some(ch.solve(&(-grad)));
        }
        jitter = if jitter == 0.0 {
            1e-12 * scale
        } else {
            jitter * 100.0
        };
    }
    hess.clone().full_piv_lu().solve(&(-grad))
}

/// Maps the reduced solution back, estimates duals and the stationarity
/// residual, and re-checks primal feasibility before reporting optimality.
///
/// The barrier estimates `λ_i = μ / slack_i` inherit the cancellation noise
/// of near-active slack evaluations, which can leave a stationarity residual
/// around 1e−6. A least-squares refit of the multipliers on the active set
/// (identified by the barrier duals themselves) removes that error; the
/// refit is kept only when it lowers the residual and respects
/// complementarity.
fn finish(sp: &ScalarProblem, reduced: &Reduced, y: &DVector<f64>, mu: f64) -> ScalarSolution {
    let x = &reduced.x0 + &reduced.basis * y;
    let value = sp.objective.value(&x);

    let grad_f = reduced.objective.gradient(y);

    // The residual is scaled by the magnitude of the stationarity terms:
    // multipliers on constraints with large gradients amplify the primal
    // round-off into the residual, and an absolute test would reject
    // perfectly centered solutions of badly scaled problems.
    let ineq_gradients: Vec<DVector<f64>> =
        reduced.ineqs.iter().map(|c| c.scalar_gradient(y)).collect();
    let kkt_scale = |duals: &[f64]| -> f64 {
        1.0 + grad_f.amax()
            + duals
                .iter()
                .zip(&ineq_gradients)
                .map(|(l, g)| l.abs() * g.amax())
                .fold(0.0, f64::max)
    };

    // Barrier estimates.
    let barrier_duals: Vec<f64> = reduced.ineqs.iter().map(|c| c.dual(y, mu)).collect();
    let mut barrier_residual = grad_f.clone();
    for c in &reduced.ineqs {
        barrier_residual += c.dual_gradient(y, mu);
    }
    let slacks: Vec<f64> = reduced.ineqs.iter().map(|c| -c.value(y)).collect();

    let mut chosen = barrier_duals.clone();
    let mut kkt = barrier_residual.amax() / kkt_scale(&barrier_duals);

    if let Some((polished, residual)) =
        polish_duals(&barrier_duals, &ineq_gradients, &slacks, &grad_f)
    {
        let polished_kkt = residual / kkt_scale(&polished);
        if polished_kkt < kkt {
            chosen = polished;
            kkt = polished_kkt;
        }
    }

    let mut duals = vec![0.0; sp.constraints.len()];
    for (&idx, lambda) in reduced.index_map.iter().zip(&chosen) {
        duals[idx] = *lambda;
    }

    let feas_scale = 1.0 + x.amax();
    let worst = sp
        .constraints
        .iter()
        .map(|c| c.violation(&x))
        .fold(f64::NEG_INFINITY, f64::max);

    let status = if worst > TOL_FEAS * feas_scale || kkt > TOL_KKT {
        SolveStatus::NumericalFailure
    } else {
        SolveStatus::Optimal
    };
    ScalarSolution {
        status,
        x,
        objective_value: value,
        duals,
        kkt_residual: kkt,
    }
}

/// Least-squares refit of the multipliers on the active set: minimize
/// `‖∇f + Σ λ_i ∇g_i‖` over `λ ≥ 0` with inactive constraints pinned at
/// zero and complementarity products capped at 1e−6. Activity is read off
/// the barrier duals, which separate active from inactive constraints by
/// orders of magnitude at the central point. Columns with a negative
/// multiplier or an oversized product are dropped one at a time. Returns the
/// full multiplier vector and the achieved residual norm.
fn polish_duals(
    barrier_duals: &[f64],
    gradients: &[DVector<f64>],
    slacks: &[f64],
    grad_f: &DVector<f64>,
) -> Option<(Vec<f64>, f64)> {
    let dual_max = barrier_duals.iter().fold(0.0_f64, |a, l| a.max(*l));
    let mut current: Vec<usize> = (0..barrier_duals.len())
        .filter(|&i| barrier_duals[i] >= 1e-5 * dual_max.max(1e-300))
        .collect();
    let k = grad_f.len();
    for _ in 0..barrier_duals.len() + 1 {
        if current.is_empty() {
            return Some((vec![0.0; barrier_duals.len()], grad_f.amax()));
        }
        let a = current.len();
        // Least squares by SVD: the active gradients are often rank
        // deficient (more near-active constraints than dimensions), and the
        // minimum-norm solution keeps the refit well conditioned.
        let m = DMatrix::from_fn(k, a, |i, j| gradients[current[j]][i]);
        let svd = m.svd(true, true);
        let lambda = svd.solve(&(-grad_f), 1e-12).ok()?;
        let worst_neg = (0..a).min_by(|&i, &j| lambda[i].total_cmp(&lambda[j]))?;
        if lambda[worst_neg] < -1e-12 {
            current.remove(worst_neg);
            continue;
        }
        let worst_product = (0..a).max_by(|&i, &j| {
            (lambda[i] * slacks[current[i]]).total_cmp(&(lambda[j] * slacks[current[j]]))
        })?;
        if lambda[worst_product] * slacks[current[worst_product]] > 1e-6 {
            current.remove(worst_product);
            continue;
        }
        let mut residual = grad_f.clone();
        for (j, &idx) in current.iter().enumerate() {
            residual += &gradients[idx] * lambda[j];
        }
        let mut full = vec![0.0; barrier_duals.len()];
        for (j, &idx) in current.iter().enumerate() {
            full[idx] = lambda[j].max(0.0);
        }
        return Some((full, residual.amax()));
    }
    None
}
