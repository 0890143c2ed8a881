//! Solver library for bounded convex vector optimization problems ordered by a
//! pointed, solid, non-trivial polyhedral cone.
//!
//! The library computes finite weak ε-solution sets of
//!
//! ```text
//!     min f(x)  over x ∈ X,  with respect to ≤_C
//! ```
//!
//! where `f` is a vector of convex quadratics, `X` is described by linear,
//! convex-quadratic and second-order-cone constraints, and `C` is a polyhedral
//! ordering cone. Three drivers are provided:
//!
//! - **MOVS** — vertex-selection outer approximation driven by
//!   Pascoletti–Serafini scalarizations (default),
//! - **MONMO** — outer approximation driven by norm-minimizing scalarizations,
//! - **AdEnA** — enclosure refinement via local lower/upper bound sets
//!   (natural ordering only).
//!
//! The supporting machinery is exposed as modules: polyhedral cones
//! ([`cone`]), a floating-point polyhedral computation kernel ([`polytope`]),
//! the problem model and its JSON schema ([`model`]), a pluggable
//! single-objective backend with a built-in barrier solver ([`backend`]),
//! scalarization templates ([`scalarize`]), local bound sets ([`bounds`]) and
//! the drivers themselves ([`engine`]).

pub mod backend;
pub mod bounds;
pub mod cone;
pub mod engine;
pub mod fixtures;
pub mod model;
pub mod polytope;
pub mod scalarize;

pub use backend::{BackendOptions, ReferenceBackend, ScalarBackend, ScalarSolution, SolveStatus};
pub use cone::OrderingCone;
pub use engine::{Algorithm, SolveOptions, SolveResult, SolverStatus};
pub use model::VectorProblem;
pub use polytope::Polyhedron;

/// Absolute comparison tolerance on normalized data.
pub const TOL_CMP: f64 = 1e-9;

/// Feasibility tolerance, one order looser than [`TOL_CMP`] to absorb
/// accumulated conversion error.
pub const TOL_FEAS: f64 = 1e-7;

/// Slack allowed on the minimum eigenvalue in positive-semidefiniteness checks.
pub const TOL_PSD: f64 = 1e-8;

/// Maximum stationarity residual for a subproblem solution reported optimal.
pub const TOL_KKT: f64 = 1e-7;

/// Objective values beyond this magnitude are treated as infinite and the
/// problem is flagged unbounded.
pub const UNBOUNDED_THRESHOLD: f64 = 1e13;
