//! Problem representation, convexity validation and problem-file ingestion.
//!
//! A [`VectorProblem`] holds `q ≥ 2` convex-quadratic objectives, a constraint
//! list (linear equalities/inequalities, convex-quadratic inequalities,
//! second-order cones) and an ordering cone. This class is closed under all
//! scalarizations used by the drivers, so every subproblem stays solvable by
//! the same backend.
//!
//! Problems are read from JSON; see [`parse_problem`] for the schema. A parsed
//! problem is validated eagerly: dimensions, PSD requirements, and the
//! cone-convexity certificate (for every dual extreme ray `w` of the ordering
//! cone, `Σ w_i Q_i` must be positive semidefinite).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{ConeError, OrderingCone};
use crate::TOL_PSD;

#[derive(Debug, Clone)]
pub enum ModelError {
    Parse(String),
    Validation(String),
    /// The problem is not convex with respect to the ordering cone; the
    /// payload is the offending dual ray and the minimum eigenvalue found.
    NotCConvex {
        dual_ray: Vec<f64>,
        min_eigenvalue: f64,
    },
    DimensionMismatch(String),
    Cone(ConeError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Parse(s) => write!(f, "parse error: {s}"),
            ModelError::Validation(s) => write!(f, "validation error: {s}"),
            ModelError::NotCConvex {
                dual_ray,
                min_eigenvalue,
            } => write!(
                f,
                "problem is not cone-convex: dual ray {dual_ray:?} gives minimum eigenvalue {min_eigenvalue:.3e}"
            ),
            ModelError::DimensionMismatch(s) => write!(f, "dimension mismatch: {s}"),
            ModelError::Cone(e) => write!(f, "invalid ordering cone: {e}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<ConeError> for ModelError {
    fn from(e: ConeError) -> Self {
        ModelError::Cone(e)
    }
}

/// Quadratic function `x ↦ ½ xᵀQx + cᵀx + d` with symmetric `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: f64,
}

impl QuadraticFunction {
    pub fn new(q: DMatrix<f64>, c: DVector<f64>, d: f64) -> Self {
        QuadraticFunction { q, c, d }
    }

    /// Linear function `cᵀx + d`.
    pub fn linear(c: DVector<f64>, d: f64) -> Self {
        let n = c.len();
        QuadraticFunction {
            q: DMatrix::zeros(n, n),
            c,
            d,
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (&self.q * x).dot(x) + self.c.dot(x) + self.d
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x + &self.c
    }

    pub fn is_linear(&self) -> bool {
        self.q.iter().all(|v| *v == 0.0)
    }

    /// Minimum eigenvalue of `Q` (symmetrized).
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.q)
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// One constraint of the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `a·x = b`
    LinearEq { a: DVector<f64>, b: f64 },
    /// `a·x ≤ b`
    LinearIneq { a: DVector<f64>, b: f64 },
    /// `g(x) ≤ 0` with PSD quadratic part
    QuadraticIneq { g: QuadraticFunction },
    /// `‖Ax + b‖ ≤ c·x + d`
    SecondOrderCone {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: f64,
    },
}

impl Constraint {
    pub fn dim(&self) -> usize {
        match self {
            Constraint::LinearEq { a, .. } | Constraint::LinearIneq { a, .. } => a.len(),
            Constraint::QuadraticIneq { g } => g.dim(),
            Constraint::SecondOrderCone { a, .. } => a.ncols(),
        }
    }

    /// Violation measure: positive means infeasible at `x`.
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        match self {
            Constraint::LinearEq { a, b } => (a.dot(x) - b).abs(),
            Constraint::LinearIneq { a, b } => a.dot(x) - b,
            Constraint::QuadraticIneq { g } => g.value(x),
            Constraint::SecondOrderCone { a, b, c, d } => (a * x + b).norm() - (c.dot(x) + d),
        }
    }
}

/// Convex vector optimization problem `min f(x) over X with respect to ≤_C`.
#[derive(Debug, Clone)]
pub struct VectorProblem {
    pub name: String,
    pub n: usize,
    pub objectives: Vec<QuadraticFunction>,
    pub constraints: Vec<Constraint>,
    pub cone: OrderingCone,
}

/// Convexity certificate: the dual rays checked and the minimum eigenvalue of
/// the aggregated quadratic form for each of them.
#[derive(Debug, Clone)]
pub struct ConvexityCertificate {
    pub dual_rays: Vec<DVector<f64>>,
    pub min_eigenvalues: Vec<f64>,
}

impl VectorProblem {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        objectives: Vec<QuadraticFunction>,
        constraints: Vec<Constraint>,
        cone: OrderingCone,
    ) -> Result<Self, ModelError> {
        let p = VectorProblem {
            name: name.into(),
            n,
            objectives,
            constraints,
            cone,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.objectives.len() < 2 {
            return Err(ModelError::Validation(format!(
                "need at least two objectives, got {}",
                self.objectives.len()
            )));
        }
        if self.cone.dim() != self.objectives.len() {
            return Err(ModelError::Validation(format!(
                "cone dimension {} does not match objective count {}",
                self.cone.dim(),
                self.objectives.len()
            )));
        }
        for (i, f) in self.objectives.iter().enumerate() {
            if f.dim() != self.n || f.q.nrows() != self.n || f.q.ncols() != self.n {
                return Err(ModelError::DimensionMismatch(format!(
                    "objective {i} has dimension {} but n = {}",
                    f.dim(),
                    self.n
                )));
            }
            if !symmetric(&f.q) {
                return Err(ModelError::Validation(format!(
                    "objective {i} has a non-symmetric quadratic part"
                )));
            }
            if f.q.iter().any(|v| !v.is_finite())
                || f.c.iter().any(|v| !v.is_finite())
                || !f.d.is_finite()
            {
                return Err(ModelError::Validation(format!(
                    "objective {i} contains non-finite entries"
                )));
            }
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if con.dim() != self.n {
                return Err(ModelError::DimensionMismatch(format!(
                    "constraint {i} has dimension {} but n = {}",
                    con.dim(),
                    self.n
                )));
            }
            if let Constraint::QuadraticIneq { g } = con {
                if !symmetric(&g.q) {
                    return Err(ModelError::Validation(format!(
                        "constraint {i} has a non-symmetric quadratic part"
                    )));
                }
                let min_eig = g.min_eigenvalue();
                if min_eig < -TOL_PSD {
                    return Err(ModelError::Validation(format!(
                        "constraint {i} is not convex: minimum eigenvalue {min_eig:.3e}"
                    )));
                }
            }
        }
        self.convexity_certificate()?;
        Ok(())
    }

    /// Cone-convexity check on the dual extreme rays: `Σ w_i Q_i` must be PSD
    /// for every dual ray `w`. Sufficient for `w·f` convex for every
    /// `w ∈ C⁺` since the aggregated quadratic is linear in `w`.
    pub fn convexity_certificate(&self) -> Result<ConvexityCertificate, ModelError> {
        let mut rays = Vec::new();
        let mut eigs = Vec::new();
        for w in self.cone.dual_rays() {
            let mut combined = DMatrix::zeros(self.n, self.n);
            for (wi, f) in w.iter().zip(&self.objectives) {
                combined += &f.q * *wi;
            }
            let min_eig = min_eigenvalue(&combined);
            if min_eig < -TOL_PSD {
                return Err(ModelError::NotCConvex {
                    dual_ray: w.iter().copied().collect(),
                    min_eigenvalue: min_eig,
                });
            }
            rays.push(w.clone());
            eigs.push(min_eig);
        }
        Ok(ConvexityCertificate {
            dual_rays: rays,
            min_eigenvalues: eigs,
        })
    }

    /// Componentwise objective evaluation `f(x)`.
    pub fn evaluate_objectives(&self, x: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
        if x.len() != self.n {
            return Err(ModelError::DimensionMismatch(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.n
            )));
        }
        Ok(DVector::from_iterator(
            self.objectives.len(),
            self.objectives.iter().map(|f| f.value(x)),
        ))
    }

    /// Largest constraint violation at `x`; nonpositive means feasible.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Serializes back to the problem-file schema.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProblemFile::from(self)).expect("schema serialization cannot fail")
    }
}

fn symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| {
        (i + 1..n).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * m[(i, j)].abs().max(1.0))
    })
}

// --- problem file schema -------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ProblemFile {
    #[serde(default)]
    name: String,
    n: usize,
    objectives: Vec<ObjectiveFile>,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<ConeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectiveFile {
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<Vec<f64>>>,
    c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
enum ConstraintFile {
    #[serde(rename = "linear_eq")]
    LinearEq { a: Vec<f64>, b: f64 },
    #[serde(rename = "linear_ineq")]
    LinearIneq { a: Vec<f64>, b: f64 },
    #[serde(rename = "quadratic_ineq")]
    QuadraticIneq {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        d: f64,
    },
    #[serde(rename = "soc")]
    Soc {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        d: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct ConeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rays: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<Vec<f64>>>,
}

impl From<&VectorProblem> for ProblemFile {
    fn from(p: &VectorProblem) -> Self {
        ProblemFile {
            name: p.name.clone(),
            n: p.n,
            objectives: p
                .objectives
                .iter()
                .map(|f| ObjectiveFile {
                    q: if f.is_linear() {
                        None
                    } else {
                        Some(matrix_to_rows(&f.q))
                    },
                    c: f.c.iter().copied().collect(),
                    d: if f.d == 0.0 { None } else { Some(f.d) },
                })
                .collect(),
            constraints: p
                .constraints
                .iter()
                .map(|c| match c {
                    Constraint::LinearEq { a, b } => ConstraintFile::LinearEq {
                        a: a.iter().copied().collect(),
                        b: *b,
                    },
                    Constraint::LinearIneq { a, b } => ConstraintFile::LinearIneq {
                        a: a.iter().copied().collect(),
                        b: *b,
                    },
                    Constraint::QuadraticIneq { g } => ConstraintFile::QuadraticIneq {
                        q: matrix_to_rows(&g.q),
                        c: g.c.iter().copied().collect(),
                        d: g.d,
                    },
                    Constraint::SecondOrderCone { a, b, c, d } => ConstraintFile::Soc {
                        a: matrix_to_rows(a),
                        b: b.iter().copied().collect(),
                        c: c.iter().copied().collect(),
                        d: *d,
                    },
                })
                .collect(),
            cone: if p.cone.is_natural() {
                None
            } else {
                Some(ConeFile {
                    rays: Some(
                        p.cone
                            .generator_rays()
                            .iter()
                            .map(|r| r.iter().copied().collect())
                            .collect(),
                    ),
                    halfspaces: None,
                })
            },
        }
    }
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<f64>], context: &str) -> Result<DMatrix<f64>, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::Parse(format!("{context}: empty matrix")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ModelError::Parse(format!("{context}: ragged matrix rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows_to_vectors(rows: &[Vec<f64>], context: &str) -> Result<Vec<DVector<f64>>, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::Parse(format!("{context}: empty matrix")));
    }
    let len = rows[0].len();
    if rows.iter().any(|r| r.len() != len) {
        return Err(ModelError::Parse(format!("{context}: ragged matrix rows")));
    }
    Ok(rows.iter().map(|r| DVector::from_row_slice(r)).collect())
}

/// Parses and validates a problem file. The cone defaults to the natural
/// ordering when absent.
pub fn parse_problem(text: &str) -> Result<VectorProblem, ModelError> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let n = file.n;
    let q_count = file.objectives.len();

    let objectives: Vec<QuadraticFunction> = file
        .objectives
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let q = match &o.q {
                Some(rows) => rows_to_matrix(rows, &format!("objective {i} Q"))?,
                None => DMatrix::zeros(n, n),
            };
            Ok(QuadraticFunction {
                q,
                c: DVector::from_row_slice(&o.c),
                d: o.d.unwrap_or(0.0),
            })
        })
        .collect::<Result<_, ModelError>>()?;

    let constraints: Vec<Constraint> = file
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            ConstraintFile::LinearEq { a, b } => Ok(Constraint::LinearEq {
                a: DVector::from_row_slice(a),
                b: *b,
            }),
            ConstraintFile::LinearIneq { a, b } => Ok(Constraint::LinearIneq {
                a: DVector::from_row_slice(a),
                b: *b,
            }),
            ConstraintFile::QuadraticIneq { q, c, d } => Ok(Constraint::QuadraticIneq {
                g: QuadraticFunction {
                    q: rows_to_matrix(q, &format!("constraint {i} Q"))?,
                    c: DVector::from_row_slice(c),
                    d: *d,
                },
            }),
            ConstraintFile::Soc { a, b, c, d } => Ok(Constraint::SecondOrderCone {
                a: rows_to_matrix(a, &format!("constraint {i} A"))?,
                b: DVector::from_row_slice(b),
                c: DVector::from_row_slice(c),
                d: *d,
            }),
        })
        .collect::<Result<_, ModelError>>()?;

    let cone = match &file.cone {
        None => OrderingCone::natural(q_count),
        Some(cf) => match (&cf.rays, &cf.halfspaces) {
            (Some(rays), _) => OrderingCone::from_rays(&rows_to_vectors(rays, "cone rays")?)?,
            (None, Some(hs)) => {
                OrderingCone::from_halfspaces(&rows_to_vectors(hs, "cone halfspaces")?)?
            }
            (None, None) => OrderingCone::natural(q_count),
        },
    };

    VectorProblem::new(file.name, n, objectives, constraints, cone)
}
