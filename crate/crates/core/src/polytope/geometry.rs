//! Distances to polyhedra, solved as convex projection subproblems through
//! the scalar backend.

use nalgebra::{DMatrix, DVector};

use super::{Polyhedron, PolytopeError};
use crate::backend::{
    BackendOptions, ScalarBackend, ScalarProblem, SolveStatus, SubproblemKind, SubproblemTag,
};
use crate::model::{Constraint, QuadraticFunction};
use crate::TOL_FEAS;

/// Euclidean distance from `z` to `p` and the nearest point of `p`.
///
/// Works on either representation: with an H-representation the projection is
/// a QP over the halfspaces; with only generators it is a QP over the convex
/// and conic combination weights. Points inside the polyhedron (within the
/// feasibility tolerance) report distance exactly zero.
pub fn distance_point_to_polyhedron(
    z: &DVector<f64>,
    p: &Polyhedron,
    backend: &dyn ScalarBackend,
    opts: &BackendOptions,
) -> Result<(f64, DVector<f64>), PolytopeError> {
    if !p.halfspaces().is_empty() {
        if p.contains(z, TOL_FEAS) {
            return Ok((0.0, z.clone()));
        }
        let q = z.len();
        let constraints: Vec<Constraint> = p
            .halfspaces()
            .iter()
            .map(|h| Constraint::LinearIneq {
                a: -h.normal(),
                b: -h.offset(),
            })
            .collect();
        let mut sp = ScalarProblem::new(
            q,
            QuadraticFunction::new(DMatrix::identity(q, q) * 2.0, z * -2.0, z.dot(z)),
            constraints,
        );
        sp.tag = Some(SubproblemTag {
            kind: SubproblemKind::Projection,
            params: z.iter().copied().collect(),
        });
        sp.warm_start = Some(z.clone());
        let sol = backend.solve(&sp, opts);
        return match sol.status {
            SolveStatus::Optimal => Ok((sol.objective_value.max(0.0).sqrt(), sol.x)),
            SolveStatus::Infeasible => Err(PolytopeError::EmptyPolyhedron),
            other => Err(PolytopeError::BackendFailure(other.to_string())),
        };
    }

    if !p.vrep_valid() || p.vertices().is_empty() {
        return Err(PolytopeError::EmptyPolyhedron);
    }
    let points = p.vertices();
    let rays = p.rays();
    let q = z.len();
    // Support-function dual of the projection:
    //
    //     d(z, P) = max { g·z − s : g·y ≤ s ∀y, g·r ≤ 0 ∀rays, ‖g‖ ≤ 1 }
    //
    // stated as minimization of s − g·z over (g, s). The variable count stays
    // q+1 however many generators the polyhedron has, which keeps the
    // per-vertex cost flat as the inner approximation grows.
    let nv = q + 1;
    let mut constraints: Vec<Constraint> = Vec::with_capacity(points.len() + rays.len() + 1);
    for y in points {
        let mut a = DVector::zeros(nv);
        a.rows_mut(0, q).copy_from(y);
        a[q] = -1.0;
        constraints.push(Constraint::LinearIneq { a, b: 0.0 });
    }
    for r in rays {
        let mut a = DVector::zeros(nv);
        a.rows_mut(0, q).copy_from(r);
        constraints.push(Constraint::LinearIneq { a, b: 0.0 });
    }
    let mut soc_a = DMatrix::zeros(q, nv);
    for i in 0..q {
        soc_a[(i, i)] = 1.0;
    }
    constraints.push(Constraint::SecondOrderCone {
        a: soc_a,
        b: DVector::zeros(q),
        c: DVector::zeros(nv),
        d: 1.0,
    });
    let mut objective_c = DVector::zeros(nv);
    objective_c.rows_mut(0, q).copy_from(&(-z));
    objective_c[q] = 1.0;
    let mut sp = ScalarProblem::new(nv, QuadraticFunction::linear(objective_c, 0.0), constraints);
    // A strictly feasible start: pull g slightly into the interior of the
    // polar of the recession cone, with s above every support value.
    let mut g0 = DVector::zeros(q);
    for r in rays {
        g0 -= r;
    }
    let norm = g0.norm();
    if norm > 0.0 {
        g0 *= 1e-3 / norm;
    }
    let mut s0 = 1.0_f64;
    for y in points {
        s0 = s0.max(g0.dot(y) + 1.0);
    }
    let mut start = DVector::zeros(nv);
    start.rows_mut(0, q).copy_from(&g0);
    start[q] = s0;
    sp.warm_start = Some(start);
    sp.tag = Some(SubproblemTag {
        kind: SubproblemKind::Projection,
        params: z.iter().copied().collect(),
    });
    let mut sol = backend.solve(&sp, opts);
    if sol.status == SolveStatus::NumericalFailure {
        // The two interior paths end at slightly different centering
        // accuracy; a cold start often lands inside the optimality gate when
        // the warm one stops marginally outside it.
        sp.warm_start = None;
        sol = backend.solve(&sp, opts);
    }
    match sol.status {
        SolveStatus::Optimal => {
            let distance = (-sol.objective_value).max(0.0);
            let g = sol.x.rows(0, q).into_owned();
            let projection = z - g * distance;
            Ok((distance, projection))
        }
        SolveStatus::Infeasible => Err(PolytopeError::EmptyPolyhedron),
        other => Err(PolytopeError::BackendFailure(other.to_string())),
    }
}

/// Hausdorff distance between nested upper sets, computed vertex-wise: for
/// `inner ⊆ outer` sharing a recession cone the supremum is attained at the
/// vertices of the outer set, and the opposite supremum is zero.
pub fn hausdorff_nested(
    outer: &Polyhedron,
    inner: &Polyhedron,
    backend: &dyn ScalarBackend,
    opts: &BackendOptions,
) -> Result<f64, PolytopeError> {
    if !outer.vrep_valid() {
        return Err(PolytopeError::NumericalFailure(
            "outer polyhedron needs an enumerated generator form".to_string(),
        ));
    }
    if !outer.halfspaces().is_empty() {
        let mut worst = 0.0_f64;
        for y in inner.vertices() {
            let scale = 1.0 + y.amax();
            for h in outer.halfspaces() {
                let slack = h.slack(y);
                if slack < -TOL_FEAS * scale {
                    worst = worst.max(-slack);
                }
            }
        }
        if worst > 0.0 {
            return Err(PolytopeError::NotNested(worst));
        }
    }
    let mut max_dist = 0.0_f64;
    for v in outer.vertices() {
        let (dist, _) = distance_point_to_polyhedron(v, inner, backend, opts)?;
        max_dist = max_dist.max(dist);
    }
    Ok(max_dist)
}
