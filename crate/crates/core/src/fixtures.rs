//! Bundled example problems, used by the CLI `examples` subcommand and by the
//! test suites.

use nalgebra::{DMatrix, DVector};

use crate::cone::OrderingCone;
use crate::model::{Constraint, QuadraticFunction, VectorProblem};

fn v(data: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(data)
}

/// Biobjective disc problem: minimize `(x₁, x₂)` over the unit disc centered
/// at `(1,1)` intersected with the nonnegative orthant. The nondominated set
/// is the lower-left quarter arc of the circle.
pub fn disc() -> VectorProblem {
    VectorProblem::new(
        "disc",
        2,
        vec![
            QuadraticFunction::linear(v(&[1.0, 0.0]), 0.0),
            QuadraticFunction::linear(v(&[0.0, 1.0]), 0.0),
        ],
        disc_constraints(),
        OrderingCone::natural(2),
    )
    .expect("disc fixture is valid")
}

/// The disc problem ordered by `C₁ = cone{(1,2), (2,1)}`.
pub fn disc_with_cone_c1() -> VectorProblem {
    let cone = OrderingCone::from_rays(&[v(&[1.0, 2.0]), v(&[2.0, 1.0])])
        .expect("C1 is pointed and solid");
    VectorProblem::new(
        "disc-c1",
        2,
        vec![
            QuadraticFunction::linear(v(&[1.0, 0.0]), 0.0),
            QuadraticFunction::linear(v(&[0.0, 1.0]), 0.0),
        ],
        disc_constraints(),
        cone,
    )
    .expect("disc-c1 fixture is valid")
}

fn disc_constraints() -> Vec<Constraint> {
    vec![
        // (x₁−1)² + (x₂−1)² ≤ 1
        Constraint::QuadraticIneq {
            g: QuadraticFunction::new(DMatrix::identity(2, 2) * 2.0, v(&[-2.0, -2.0]), 1.0),
        },
        Constraint::LinearIneq {
            a: v(&[-1.0, 0.0]),
            b: 0.0,
        },
        Constraint::LinearIneq {
            a: v(&[0.0, -1.0]),
            b: 0.0,
        },
    ]
}

/// Tri-objective distance problem: minimize the squared distances to three
/// anchor points over a box with a diagonal cut.
pub fn tri_objective() -> VectorProblem {
    let anchors = [v(&[1.0, 1.0]), v(&[2.0, 3.0]), v(&[4.0, 2.0])];
    let objectives = anchors
        .iter()
        .map(|a| QuadraticFunction::new(DMatrix::identity(2, 2) * 2.0, a * -2.0, a.dot(a)))
        .collect();
    VectorProblem::new(
        "tri-objective",
        2,
        objectives,
        vec![
            Constraint::LinearIneq {
                a: v(&[1.0, 1.0]),
                b: 10.0,
            },
            Constraint::LinearIneq {
                a: v(&[-1.0, 0.0]),
                b: 0.0,
            },
            Constraint::LinearIneq {
                a: v(&[1.0, 0.0]),
                b: 10.0,
            },
            Constraint::LinearIneq {
                a: v(&[0.0, -1.0]),
                b: 0.0,
            },
            Constraint::LinearIneq {
                a: v(&[0.0, 1.0]),
                b: 4.0,
            },
        ],
        OrderingCone::natural(3),
    )
    .expect("tri-objective fixture is valid")
}

/// Three-objective ellipsoid problem: minimize `x` over an axis-stretched
/// ellipsoid around `(1,1,1)`.
pub fn ellipsoid() -> VectorProblem {
    let objectives = (0..3)
        .map(|i| {
            let mut c = DVector::zeros(3);
            c[i] = 1.0;
            QuadraticFunction::linear(c, 0.0)
        })
        .collect();
    // (x₁−1)² + ((x₂−1)/7)² + ((x₃−1)/5)² ≤ 1
    let scales = [1.0, 49.0, 25.0];
    let quad = DMatrix::from_diagonal(&v(&[2.0 / scales[0], 2.0 / scales[1], 2.0 / scales[2]]));
    let lin = v(&[-2.0 / scales[0], -2.0 / scales[1], -2.0 / scales[2]]);
    let constant = 1.0 / scales[0] + 1.0 / scales[1] + 1.0 / scales[2] - 1.0;
    VectorProblem::new(
        "ellipsoid",
        3,
        objectives,
        vec![Constraint::QuadraticIneq {
            g: QuadraticFunction::new(quad, lin, constant),
        }],
        OrderingCone::natural(3),
    )
    .expect("ellipsoid fixture is valid")
}

/// Number of assets in the bundled portfolio problem.
pub const PORTFOLIO_ASSETS: usize = 10;

/// Expected yearly returns in percent for the synthetic asset universe.
/// Returns grow with risk so the efficient frontier sweeps all assets.
pub const PORTFOLIO_RETURNS: [f64; PORTFOLIO_ASSETS] =
    [4.8, 7.2, 9.1, 10.8, 12.4, 14.1, 15.9, 17.8, 20.1, 22.5];

/// Three-factor loadings per asset; the covariance is `B Bᵀ + diag(idio)`.
/// The common factors are deliberately weak so idiosyncratic risk dominates
/// and the frontier has many corner portfolios.
const PORTFOLIO_LOADINGS: [[f64; 3]; PORTFOLIO_ASSETS] = [
    [0.5, 0.3, -0.2],
    [0.6, -0.4, 0.3],
    [0.8, 0.4, -0.3],
    [0.9, -0.3, 0.4],
    [1.1, 0.4, 0.2],
    [1.2, -0.4, -0.3],
    [1.3, 0.3, 0.4],
    [1.5, -0.4, -0.4],
    [1.6, 0.4, 0.3],
    [1.8, -0.3, 0.5],
];

const PORTFOLIO_IDIO: [f64; PORTFOLIO_ASSETS] =
    [1.5, 3.4, 6.1, 9.3, 13.2, 17.8, 23.4, 29.7, 37.1, 45.3];

/// Synthetic covariance matrix of asset returns (positive definite).
pub fn portfolio_covariance() -> DMatrix<f64> {
    let d = PORTFOLIO_ASSETS;
    let b = DMatrix::from_fn(d, 3, |i, j| PORTFOLIO_LOADINGS[i][j]);
    let mut q = &b * b.transpose();
    for i in 0..d {
        q[(i, i)] += PORTFOLIO_IDIO[i];
    }
    q
}

/// Portfolio allocation: maximize expected return and minimize variance over
/// the budget simplex. Stated as minimization of `(−rᵀx, xᵀQx)`.
pub fn portfolio() -> VectorProblem {
    let d = PORTFOLIO_ASSETS;
    let r = DVector::from_row_slice(&PORTFOLIO_RETURNS);
    let q = portfolio_covariance();
    let mut constraints = vec![Constraint::LinearEq {
        a: DVector::from_element(d, 1.0),
        b: 1.0,
    }];
    for i in 0..d {
        let mut a = DVector::zeros(d);
        a[i] = -1.0;
        constraints.push(Constraint::LinearIneq { a, b: 0.0 });
    }
    VectorProblem::new(
        "portfolio",
        d,
        vec![
            QuadraticFunction::linear(-r, 0.0),
            QuadraticFunction::new(q * 2.0, DVector::zeros(d), 0.0),
        ],
        constraints,
        OrderingCone::natural(2),
    )
    .expect("portfolio fixture is valid")
}

/// A problem whose second objective is unbounded below on the feasible set.
pub fn unbounded_problem() -> VectorProblem {
    VectorProblem::new(
        "unbounded",
        2,
        vec![
            QuadraticFunction::linear(v(&[1.0, 0.0]), 0.0),
            QuadraticFunction::linear(v(&[0.0, 1.0]), 0.0),
        ],
        vec![Constraint::LinearIneq {
            a: v(&[-1.0, 0.0]),
            b: 0.0,
        }],
        OrderingCone::natural(2),
    )
    .expect("unbounded fixture is valid")
}

/// A problem with an empty feasible set.
pub fn infeasible_problem() -> VectorProblem {
    VectorProblem::new(
        "infeasible",
        2,
        vec![
            QuadraticFunction::linear(v(&[1.0, 0.0]), 0.0),
            QuadraticFunction::linear(v(&[0.0, 1.0]), 0.0),
        ],
        vec![
            Constraint::LinearIneq {
                a: v(&[1.0, 0.0]),
                b: -1.0,
            },
            Constraint::LinearIneq {
                a: v(&[-1.0, 0.0]),
                b: 0.0,
            },
        ],
        OrderingCone::natural(2),
    )
    .expect("infeasible fixture is valid")
}
