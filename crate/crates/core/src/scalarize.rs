//! Parameterized scalarization subproblems: weighted sum, Pascoletti–Serafini
//! and norm minimization.
//!
//! A [`Scalarizer`] prebuilds everything that does not depend on the
//! parameters: the aggregated quadratic `(w^j)ᵀ f(x)` per cone halfspace
//! normal, and the base constraints lifted into the extended variable
//! spaces. Instantiating a subproblem only fills in coefficient values, so
//! the constraint structure is identical across calls and results are
//! bit-reproducible.
//!
//! Variable layouts of the instantiated problems:
//!
//! - WS: `x` (n vars), objective `wᵀf(x)`.
//! - PS: `(x, t)` (n+1 vars), objective `t`, cone rows
//!   `(w^j)ᵀf(x) − t·(w^j)ᵀd ≤ (w^j)ᵀv`.
//! - NM: `(x, z, s)` (n+q+1 vars), objective `s`, epigraph `‖z‖ ≤ s`, cone
//!   rows `(w^j)ᵀf(x) − (w^j)ᵀz ≤ (w^j)ᵀv`.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::backend::{ScalarProblem, SubproblemKind, SubproblemTag};
use crate::model::{Constraint, QuadraticFunction, VectorProblem};
use crate::TOL_CMP;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarizeError {
    /// WS weight outside the dual cone (or zero).
    WeightNotInDualCone,
    /// PS direction not in the cone interior.
    DirectionNotInterior,
    DimensionMismatch,
}

impl fmt::Display for ScalarizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarizeError::WeightNotInDualCone => {
                write!(f, "weight is not in the dual cone")
            }
            ScalarizeError::DirectionNotInterior => {
                write!(f, "direction is not in the cone interior")
            }
            ScalarizeError::DimensionMismatch => write!(f, "parameter dimension mismatch"),
        }
    }
}

impl std::error::Error for ScalarizeError {}

/// Aggregated quadratic `(w^j)ᵀ f(x)` for one cone halfspace normal.
struct ConeRow {
    normal: DVector<f64>,
    q: DMatrix<f64>,
    c: DVector<f64>,
    d: f64,
    linear: bool,
}

/// Prebuilt scalarization templates for one problem.
pub struct Scalarizer {
    n: usize,
    q: usize,
    objectives: Vec<QuadraticFunction>,
    rows: Vec<ConeRow>,
    base: Vec<Constraint>,
    /// Base constraints lifted to (x, t).
    base_ps: Vec<Constraint>,
    /// Base constraints lifted to (x, z, s).
    base_nm: Vec<Constraint>,
    dual_rays: Vec<DVector<f64>>,
    generator_rays: Vec<DVector<f64>>,
    interior_direction: DVector<f64>,
}

impl Scalarizer {
    pub fn new(problem: &VectorProblem) -> Self {
        let n = problem.n;
        let q = problem.num_objectives();
        let rows = problem
            .cone
            .halfspace_normals()
            .iter()
            .map(|w| {
                let mut quad = DMatrix::zeros(n, n);
                let mut lin = DVector::zeros(n);
                let mut constant = 0.0;
                for (wi, f) in w.iter().zip(&problem.objectives) {
                    quad += &f.q * *wi;
                    lin += &f.c * *wi;
                    constant += f.d * *wi;
                }
                let linear = quad.amax() == 0.0;
                ConeRow {
                    normal: w.clone(),
                    q: quad,
                    c: lin,
                    d: constant,
                    linear,
                }
            })
            .collect();
        let base = problem.constraints.clone();
        let base_ps = base.iter().map(|c| lift(c, n, 1)).collect();
        let base_nm = base.iter().map(|c| lift(c, n, q + 1)).collect();
        Scalarizer {
            n,
            q,
            objectives: problem.objectives.clone(),
            rows,
            base,
            base_ps,
            base_nm,
            dual_rays: problem.cone.dual_rays().to_vec(),
            generator_rays: problem.cone.generator_rays().to_vec(),
            interior_direction: problem.cone.interior_direction(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_objectives(&self) -> usize {
        self.q
    }

    /// Number of cone rows; PS/NM instantiations place them first in the
    /// constraint list, so duals `0..cone_rows()` are the cut multipliers.
    pub fn cone_rows(&self) -> usize {
        self.rows.len()
    }

    /// Canonical interior direction used when the caller supplies none.
    pub fn default_direction(&self) -> &DVector<f64> {
        &self.interior_direction
    }

    /// Weighted-sum subproblem `min wᵀf(x)` over the base constraints.
    pub fn ws(&self, w: &DVector<f64>) -> Result<ScalarProblem, ScalarizeError> {
        if w.len() != self.q {
            return Err(ScalarizeError::DimensionMismatch);
        }
        if w.norm() <= TOL_CMP
            || !self
                .generator_rays
                .iter()
                .all(|d| d.dot(w) >= -TOL_CMP * w.norm())
        {
            return Err(ScalarizeError::WeightNotInDualCone);
        }
        let mut quad = DMatrix::zeros(self.n, self.n);
        let mut lin = DVector::zeros(self.n);
        let mut constant = 0.0;
        for (wi, f) in w.iter().zip(&self.objectives) {
            quad += &f.q * *wi;
            lin += &f.c * *wi;
            constant += f.d * *wi;
        }
        let mut sp = ScalarProblem::new(
            self.n,
            QuadraticFunction::new(quad, lin, constant),
            self.base.clone(),
        );
        sp.tag = Some(SubproblemTag {
            kind: SubproblemKind::WeightedSum,
            params: w.iter().copied().collect(),
        });
        Ok(sp)
    }

    /// Pascoletti–Serafini subproblem `min t s.t. f(x) ≤_C v + t d`.
    pub fn ps(&self, v: &DVector<f64>, d: &DVector<f64>) -> Result<ScalarProblem, ScalarizeError> {
        if v.len() != self.q || d.len() != self.q {
            return Err(ScalarizeError::DimensionMismatch);
        }
        if !self.rows.iter().all(|row| row.normal.dot(d) > TOL_CMP) {
            return Err(ScalarizeError::DirectionNotInterior);
        }
        let nv = self.n + 1;
        let mut constraints = Vec::with_capacity(self.rows.len() + self.base_ps.len());
        for row in &self.rows {
            let wd = row.normal.dot(d);
            let wv = row.normal.dot(v);
            if row.linear {
                let mut a = DVector::zeros(nv);
                a.rows_mut(0, self.n).copy_from(&row.c);
                a[self.n] = -wd;
                constraints.push(Constraint::LinearIneq { a, b: wv - row.d });
            } else {
                let mut quad = DMatrix::zeros(nv, nv);
                quad.view_mut((0, 0), (self.n, self.n)).copy_from(&row.q);
                let mut lin = DVector::zeros(nv);
                lin.rows_mut(0, self.n).copy_from(&row.c);
                lin[self.n] = -wd;
                constraints.push(Constraint::QuadraticIneq {
                    g: QuadraticFunction::new(quad, lin, row.d - wv),
                });
            }
        }
        constraints.extend(self.base_ps.iter().cloned());
        let mut objective_c = DVector::zeros(nv);
        objective_c[self.n] = 1.0;
        let mut sp =
            ScalarProblem::new(nv, QuadraticFunction::linear(objective_c, 0.0), constraints);
        sp.tag = Some(SubproblemTag {
            kind: SubproblemKind::PascolettiSerafini,
            params: v.iter().chain(d.iter()).copied().collect(),
        });
        Ok(sp)
    }

    /// Pascoletti–Serafini subproblem additionally restricted to images below
    /// `upper` componentwise; used by enclosure refinement inside a box.
    /// Infeasibility then certifies that no image lies below `upper`.
    pub fn ps_boxed(
        &self,
        v: &DVector<f64>,
        d: &DVector<f64>,
        upper: &DVector<f64>,
    ) -> Result<ScalarProblem, ScalarizeError> {
        if upper.len() != self.q {
            return Err(ScalarizeError::DimensionMismatch);
        }
        let mut sp = self.ps(v, d)?;
        let nv = self.n + 1;
        for (i, f) in self.objectives.iter().enumerate() {
            if f.is_linear() {
                sp.constraints.push(Constraint::LinearIneq {
                    a: pad(&f.c, nv),
                    b: upper[i] - f.d,
                });
            } else {
                let mut quad = DMatrix::zeros(nv, nv);
                quad.view_mut((0, 0), (self.n, self.n)).copy_from(&f.q);
                sp.constraints.push(Constraint::QuadraticIneq {
                    g: QuadraticFunction::new(quad, pad(&f.c, nv), f.d - upper[i]),
                });
            }
        }
        sp.tag = Some(SubproblemTag {
            kind: SubproblemKind::PascolettiSerafini,
            params: v
                .iter()
                .chain(d.iter())
                .chain(upper.iter())
                .copied()
                .collect(),
        });
        Ok(sp)
    }

    /// Norm-minimizing subproblem `min ‖z‖ s.t. f(x) ≤_C z + v`, as the
    /// epigraph form `min s s.t. ‖z‖ ≤ s`.
    pub fn nm(&self, v: &DVector<f64>) -> Result<ScalarProblem, ScalarizeError> {
        if v.len() != self.q {
            return Err(ScalarizeError::DimensionMismatch);
        }
        let nv = self.n + self.q + 1;
        let mut constraints = Vec::with_capacity(self.rows.len() + self.base_nm.len() + 1);
        for row in &self.rows {
            let wv = row.normal.dot(v);
            if row.linear {
                let mut a = DVector::zeros(nv);
                a.rows_mut(0, self.n).copy_from(&row.c);
                for j in 0..self.q {
                    a[self.n + j] = -row.normal[j];
                }
                constraints.push(Constraint::LinearIneq { a, b: wv - row.d });
            } else {
                let mut quad = DMatrix::zeros(nv, nv);
                quad.view_mut((0, 0), (self.n, self.n)).copy_from(&row.q);
                let mut lin = DVector::zeros(nv);
                lin.rows_mut(0, self.n).copy_from(&row.c);
                for j in 0..self.q {
                    lin[self.n + j] = -row.normal[j];
                }
                constraints.push(Constraint::QuadraticIneq {
                    g: QuadraticFunction::new(quad, lin, row.d - wv),
                });
            }
        }
        constraints.extend(self.base_nm.iter().cloned());
        // ‖z‖ ≤ s
        let mut soc_a = DMatrix::zeros(self.q, nv);
        for j in 0..self.q {
            soc_a[(j, self.n + j)] = 1.0;
        }
        let mut soc_c = DVector::zeros(nv);
        soc_c[nv - 1] = 1.0;
        constraints.push(Constraint::SecondOrderCone {
            a: soc_a,
            b: DVector::zeros(self.q),
            c: soc_c,
            d: 0.0,
        });
        let mut objective_c = DVector::zeros(nv);
        objective_c[nv - 1] = 1.0;
        let mut sp =
            ScalarProblem::new(nv, QuadraticFunction::linear(objective_c, 0.0), constraints);
        sp.tag = Some(SubproblemTag {
            kind: SubproblemKind::NormMin,
            params: v.iter().copied().collect(),
        });
        Ok(sp)
    }

    /// Supporting-halfspace normal from the multipliers of the cone rows:
    /// `w = Σ λ_j w^j`, normalized. Returns `None` when the multipliers are
    /// numerically zero (the target already supports the upper image).
    pub fn cut_normal(&self, cone_row_duals: &[f64]) -> Option<DVector<f64>> {
        let mut w = DVector::zeros(self.q);
        for (lambda, row) in cone_row_duals.iter().zip(&self.rows) {
            if *lambda > 0.0 {
                w += &row.normal * *lambda;
            }
        }
        let norm = w.norm();
        if norm <= 1e-12 {
            None
        } else {
            Some(w / norm)
        }
    }

    pub fn dual_rays(&self) -> &[DVector<f64>] {
        &self.dual_rays
    }
}

/// Lifts a constraint on `x` to `(x, extras)` by zero-padding.
fn lift(c: &Constraint, n: usize, extras: usize) -> Constraint {
    let nv = n + extras;
    match c {
        Constraint::LinearEq { a, b } => Constraint::LinearEq {
            a: pad(a, nv),
            b: *b,
        },
        Constraint::LinearIneq { a, b } => Constraint::LinearIneq {
            a: pad(a, nv),
            b: *b,
        },
        Constraint::QuadraticIneq { g } => {
            let mut quad = DMatrix::zeros(nv, nv);
            quad.view_mut((0, 0), (n, n)).copy_from(&g.q);
            Constraint::QuadraticIneq {
                g: QuadraticFunction::new(quad, pad(&g.c, nv), g.d),
            }
        }
        Constraint::SecondOrderCone { a, b, c, d } => {
            let mut ae = DMatrix::zeros(a.nrows(), nv);
            ae.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
            Constraint::SecondOrderCone {
                a: ae,
                b: b.clone(),
                c: pad(c, nv),
                d: *d,
            }
        }
    }
}

fn pad(v: &DVector<f64>, nv: usize) -> DVector<f64> {
    let mut out = DVector::zeros(nv);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

// --- failure cache --------------------------------------------------------

/// Number of decimal digits kept when rounding parameter keys.
const KEY_DIGITS: f64 = 1e9;

/// Rounds a vector to nine decimal digits relative to each component's own
/// magnitude. Every component contributes a power-of-two scale bucket and
/// the rounded mantissa digits, so components of very different sizes keep
/// their full resolution while perturbations far below it map to the same
/// key.
pub(crate) fn rounded_digits(values: &[f64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(values.len() * 2);
    for p in values {
        let a = p.abs();
        // The small shift keeps values that sit exactly on a power of two in
        // the same bucket as their round-off neighbors.
        let bucket = if a <= 1.0 {
            0
        } else {
            (a.log2() - 1e-9).ceil().max(0.0) as i32
        };
        let scale = 2.0_f64.powi(bucket);
        out.push(bucket as i64);
        out.push((p / scale * KEY_DIGITS).round() as i64);
    }
    out
}

/// Parameter key: subproblem kind plus the parameter vector normalized to
/// unit scale per component and rounded to nine decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamKey {
    kind: u8,
    digits: Vec<i64>,
}

impl ParamKey {
    pub fn new(kind: SubproblemKind, params: &[f64]) -> Self {
        let digits = rounded_digits(params);
        let kind = match kind {
            SubproblemKind::WeightedSum => 0,
            SubproblemKind::PascolettiSerafini => 1,
            SubproblemKind::NormMin => 2,
            SubproblemKind::Projection => 3,
        };
        ParamKey { kind, digits }
    }

    pub fn from_tag(tag: &SubproblemTag) -> Self {
        ParamKey::new(tag.kind, &tag.params)
    }
}

/// Remembers parameter combinations whose subproblem failed, so they are
/// never submitted twice. Callers query before solving and record on
/// failure. Not synchronized: single writer, per the engine's coordinator
/// design.
#[derive(Debug, Default)]
pub struct FailureCache {
    keys: HashSet<ParamKey>,
}

impl FailureCache {
    pub fn new() -> Self {
        FailureCache::default()
    }

    /// True when this parameter combination already failed (skip it).
    pub fn contains(&self, key: &ParamKey) -> bool {
        self.keys.contains(key)
    }

    pub fn record(&mut self, key: ParamKey) {
        self.keys.insert(key);
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}
