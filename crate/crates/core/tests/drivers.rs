//! End-to-end driver runs on the bundled fixtures.

use nalgebra::DVector;
use vopt_core::engine::{self, Algorithm, SolveOptions, SolverStatus};
use vopt_core::fixtures;

fn options(algorithm: Algorithm) -> SolveOptions {
    SolveOptions {
        algorithm,
        ..Default::default()
    }
}

/// Images of the disc problem must lie on the arc `(f₁−1)² + (f₂−1)² = 1`
/// inside the unit square.
fn assert_on_disc_arc(images: &[DVector<f64>], tol: f64) {
    assert!(!images.is_empty());
    for f in images {
        let residual = ((f[0] - 1.0).powi(2) + (f[1] - 1.0).powi(2) - 1.0).abs();
        assert!(
            residual <= tol,
            "image {:?} off the arc by {residual:.2e}",
            f.as_slice()
        );
        assert!(f[0] >= -1e-6 && f[0] <= 1.0 + 1e-6);
        assert!(f[1] >= -1e-6 && f[1] <= 1.0 + 1e-6);
    }
}

#[test]
fn movs_solves_disc() {
    let p = fixtures::disc();
    let r = engine::solve(&p, &options(Algorithm::Movs)).unwrap();
    assert_eq!(
        r.status,
        SolverStatus::Solved,
        "trace: {:?}",
        r.metric_trace
    );
    assert_on_disc_arc(&r.images, 1e-3);
    let initial = r.metric_trace[0];
    let last = *r.metric_trace.last().unwrap();
    assert!(engine::check_stopping(last, initial, 1e-2));
    assert!(r.solutions.len() >= 3);
}

#[test]
fn monmo_solves_disc() {
    let p = fixtures::disc();
    let r = engine::solve(&p, &options(Algorithm::Monmo)).unwrap();
    assert_eq!(
        r.status,
        SolverStatus::Solved,
        "trace: {:?}",
        r.metric_trace
    );
    assert_on_disc_arc(&r.images, 1e-3);
    // The metric trace is nonincreasing for the norm-min driver.
    for pair in r.metric_trace.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-9,
            "trace grew: {:?}",
            r.metric_trace
        );
    }
}

#[test]
fn adena_solves_disc() {
    let p = fixtures::disc();
    let r = engine::solve(&p, &options(Algorithm::Adena)).unwrap();
    assert_eq!(
        r.status,
        SolverStatus::Solved,
        "trace: {:?}",
        r.metric_trace
    );
    assert_on_disc_arc(&r.images, 1e-3);
    // Width trace is nonincreasing.
    for pair in r.metric_trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }
    let snapshot = r.enclosure.expect("enclosure reported");
    assert!(!snapshot.lower.is_empty() && !snapshot.upper.is_empty());
}

#[test]
fn movs_zero_iterations_returns_initialization() {
    let p = fixtures::disc();
    let mut opts = options(Algorithm::Movs);
    opts.max_iter = 0;
    let r = engine::solve(&p, &opts).unwrap();
    assert_eq!(r.status, SolverStatus::MaxIterReached);
    assert_eq!(r.solutions.len(), 2);
}

#[test]
fn infeasible_and_unbounded_flags() {
    let r = engine::solve(&fixtures::infeasible_problem(), &options(Algorithm::Movs)).unwrap();
    assert_eq!(r.status, SolverStatus::Infeasible);
    let r = engine::solve(&fixtures::unbounded_problem(), &options(Algorithm::Monmo)).unwrap();
    assert_eq!(r.status, SolverStatus::Unbounded);
    let r = engine::solve(&fixtures::unbounded_problem(), &options(Algorithm::Adena)).unwrap();
    assert_eq!(r.status, SolverStatus::Unbounded);
}

#[test]
fn adena_refuses_general_cone() {
    let p = fixtures::disc_with_cone_c1();
    match engine::solve(&p, &options(Algorithm::Adena)) {
        Err(engine::EngineError::ConeNotSupported) => {}
        other => panic!("expected ConeNotSupported, got {other:?}"),
    }
}

#[test]
fn movs_handles_skewed_cone() {
    let p = fixtures::disc_with_cone_c1();
    let r = engine::solve(&p, &options(Algorithm::Movs)).unwrap();
    assert_eq!(
        r.status,
        SolverStatus::Solved,
        "trace: {:?}",
        r.metric_trace
    );
    // Weakly C₁-minimal points still sit on the circle, but the subarc
    // extends past the unit square: the extreme trade-offs reach the
    // supporting points of the skewed dual rays.
    for f in &r.images {
        let residual = ((f[0] - 1.0).powi(2) + (f[1] - 1.0).powi(2) - 1.0).abs();
        assert!(residual <= 2e-3, "image {f:?} off the circle");
        assert!(f[0] >= -1e-6 && f[0] <= 1.5);
        assert!(f[1] >= -1e-6 && f[1] <= 1.5);
    }
    // Weights lie in the dual cone.
    for w in &r.weights {
        assert!(p.cone.dual_contains(w, 1e-9), "weight {w:?} outside C+");
    }
}

#[test]
fn returned_images_weakly_nondominated_on_grid() {
    // Dense grid oracle: no feasible sample interior-dominates a returned
    // image by more than 1e-4.
    let p = fixtures::disc();
    let mut grid = Vec::new();
    let res = 300;
    for i in 0..=res {
        for j in 0..=res {
            let x = DVector::from_row_slice(&[i as f64 / res as f64, j as f64 / res as f64]);
            if p.max_violation(&x) <= 1e-12 {
                grid.push(p.evaluate_objectives(&x).unwrap());
            }
        }
    }
    for algorithm in [Algorithm::Movs, Algorithm::Monmo, Algorithm::Adena] {
        let r = engine::solve(&p, &options(algorithm)).unwrap();
        assert_eq!(r.status, SolverStatus::Solved);
        for y in &r.images {
            let dominated = grid
                .iter()
                .any(|g| (0..2).all(|i| g[i] + 1e-4 <= y[i]));
            assert!(
                !dominated,
                "{algorithm:?}: image {:?} interior-dominated on the grid",
                y.as_slice()
            );
        }
    }
}

#[test]
fn movs_ellipsoid_images_on_boundary() {
    let p = fixtures::ellipsoid();
    let r = engine::solve(&p, &options(Algorithm::Movs)).unwrap();
    assert_eq!(
        r.status,
        SolverStatus::Solved,
        "trace: {:?}",
        r.metric_trace
    );
    // Identity objectives: images equal the decision vectors, which must sit
    // on the ellipsoid surface.
    for f in &r.images {
        let lhs =
            (f[0] - 1.0).powi(2) + ((f[1] - 1.0) / 7.0).powi(2) + ((f[2] - 1.0) / 5.0).powi(2);
        assert!(
            (lhs - 1.0).abs() <= 1e-3,
            "image {:?} not on the ellipsoid (residual {:.2e})",
            f.as_slice(),
            (lhs - 1.0).abs()
        );
    }
}

#[test]
fn outer_sandwich_invariant() {
    // Every image satisfies every final outer halfspace.
    let p = fixtures::disc();
    let r = engine::solve(&p, &options(Algorithm::Monmo)).unwrap();
    for f in &r.images {
        for (normal, offset) in &r.outer_halfspaces {
            assert!(
                normal.dot(f) >= offset - 1e-6,
                "image violates outer halfspace"
            );
        }
    }
}
