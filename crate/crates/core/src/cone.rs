//! Polyhedral ordering cones and their duals.
//!
//! An ordering cone is stored in both representations: halfspace normals
//! `W` with `C = {z : W z ≥ 0}` (rows are the extreme rays of the dual cone
//! `C⁺`) and generator rays `D` with `C = cone(rows of D)`. Both are reduced
//! to irredundant, unit-norm sets on construction, so comparisons are
//! scale-invariant. Construction rejects cones that are not pointed, not
//! solid, or trivial; the partial order those cones induce would be
//! degenerate.

use std::fmt;

use nalgebra::DVector;

use crate::polytope::dd;
use crate::TOL_CMP;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeError {
    /// `−C ∩ C ≠ {0}`: the halfspace normals do not have full rank.
    NotPointed,
    /// The cone has empty interior.
    NotSolid,
    /// `C = {0}` or `C = R^q`.
    Trivial,
    /// A zero ray or normal was supplied, or fewer than two dimensions.
    Degenerate,
    DimensionMismatch,
}

impl fmt::Display for ConeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeError::NotPointed => write!(f, "cone is not pointed"),
            ConeError::NotSolid => write!(f, "cone has empty interior"),
            ConeError::Trivial => write!(f, "cone is trivial"),
            ConeError::Degenerate => write!(f, "cone description is degenerate"),
            ConeError::DimensionMismatch => {
                write!(f, "vector length does not match cone dimension")
            }
        }
    }
}

impl std::error::Error for ConeError {}

/// Pointed, solid, non-trivial polyhedral ordering cone.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCone {
    dim: usize,
    halfspace_normals: Vec<DVector<f64>>,
    generator_rays: Vec<DVector<f64>>,
}

impl OrderingCone {
    /// The natural ordering cone `R^q₊`.
    pub fn natural(dim: usize) -> Self {
        let basis: Vec<DVector<f64>> = (0..dim)
            .map(|i| {
                let mut e = DVector::zeros(dim);
                e[i] = 1.0;
                e
            })
            .collect();
        OrderingCone {
            dim,
            halfspace_normals: basis.clone(),
            generator_rays: basis,
        }
    }

    /// Builds the cone spanned by the given rays. The stored generator rays
    /// are the irredundant subset; the halfspace normals are computed by
    /// double description, so callers may pass any spanning set.
    pub fn from_rays(rays: &[DVector<f64>]) -> Result<Self, ConeError> {
        check_rows(rays)?;
        let dim = rays[0].len();
        // Extreme rays of C⁺ = {w : d_j·w ≥ 0} are the halfspace normals of C.
        let dual = dd::extreme_rays(rays, dim, TOL_CMP);
        if dual.rays.is_empty() && dual.lineality.is_empty() {
            // C⁺ = {0} means C = R^q.
            return Err(ConeError::Trivial);
        }
        let mut span = dual.rays.clone();
        span.extend(dual.lineality.iter().cloned());
        if dd::rank_of_rows(&span, 1e-7) < dim {
            // C⁺ not solid: C contains a line.
            return Err(ConeError::NotPointed);
        }
        if !dual.lineality.is_empty() {
            // C⁺ not pointed: C lies in a hyperplane.
            return Err(ConeError::NotSolid);
        }
        Self::from_reduced_normals(dual.rays, dim)
    }

    /// Builds the cone `{z : n_j · z ≥ 0}`. Generator rays are recovered by
    /// double description and the supplied normals are reduced to the
    /// irredundant subset.
    pub fn from_halfspaces(normals: &[DVector<f64>]) -> Result<Self, ConeError> {
        check_rows(normals)?;
        let dim = normals[0].len();
        if dd::rank_of_rows(normals, 1e-7) < dim {
            return Err(ConeError::NotPointed);
        }
        let gen = dd::extreme_rays(normals, dim, TOL_CMP);
        if gen.rays.is_empty() {
            return Err(ConeError::Trivial);
        }
        if dd::rank_of_rows(&gen.rays, 1e-7) < dim {
            return Err(ConeError::NotSolid);
        }
        let reduced = dd::extreme_rays(&gen.rays, dim, TOL_CMP).rays;
        Self::from_reduced_normals(reduced, dim)
    }

    fn from_reduced_normals(normals: Vec<DVector<f64>>, dim: usize) -> Result<Self, ConeError> {
        if dd::rank_of_rows(&normals, 1e-7) < dim {
            return Err(ConeError::NotPointed);
        }
        // Irredundant generator rays of {z : W z ≥ 0}.
        let gen = dd::extreme_rays(&normals, dim, TOL_CMP);
        if gen.rays.is_empty() {
            return Err(ConeError::Trivial);
        }
        if dd::rank_of_rows(&gen.rays, 1e-7) < dim {
            return Err(ConeError::NotSolid);
        }
        Ok(OrderingCone {
            dim,
            halfspace_normals: normals,
            generator_rays: gen.rays,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rows `w^j` of `W` with `C = {z : W z ≥ 0}`, unit norm.
    pub fn halfspace_normals(&self) -> &[DVector<f64>] {
        &self.halfspace_normals
    }

    /// Extreme rays `d^j` spanning the cone, unit norm.
    pub fn generator_rays(&self) -> &[DVector<f64>] {
        &self.generator_rays
    }

    /// Extreme rays of the dual cone `C⁺`; these are exactly the halfspace
    /// normals of `C`.
    pub fn dual_rays(&self) -> &[DVector<f64>] {
        &self.halfspace_normals
    }

    /// The dual cone, obtained by swapping the two representations.
    pub fn dual(&self) -> OrderingCone {
        OrderingCone {
            dim: self.dim,
            halfspace_normals: self.generator_rays.clone(),
            generator_rays: self.halfspace_normals.clone(),
        }
    }

    /// Partial order test `z1 ≤_C z2`, i.e. `W (z2 − z1) ≥ 0` componentwise
    /// within the comparison tolerance.
    pub fn leq(&self, z1: &DVector<f64>, z2: &DVector<f64>) -> Result<bool, ConeError> {
        if z1.len() != self.dim || z2.len() != self.dim {
            return Err(ConeError::DimensionMismatch);
        }
        let diff = z2 - z1;
        Ok(self
            .halfspace_normals
            .iter()
            .all(|w| w.dot(&diff) >= -TOL_CMP))
    }

    /// Cone membership within `tol`.
    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.halfspace_normals.iter().all(|w| w.dot(z) >= -tol)
    }

    /// Membership of `w` in the dual cone `C⁺`, i.e. `d_j · w ≥ −tol` for all
    /// generator rays.
    pub fn dual_contains(&self, w: &DVector<f64>, tol: f64) -> bool {
        self.generator_rays.iter().all(|d| d.dot(w) >= -tol)
    }

    /// Strict interior test `W z > 0`.
    pub fn interior_contains(&self, z: &DVector<f64>) -> bool {
        self.halfspace_normals.iter().all(|w| w.dot(z) > TOL_CMP)
    }

    /// Canonical interior direction: the normalized sum of the generator
    /// rays. Interior because the cone is solid.
    pub fn interior_direction(&self) -> DVector<f64> {
        let mut sum = DVector::zeros(self.dim);
        for d in &self.generator_rays {
            sum += d;
        }
        let n = sum.norm();
        debug_assert!(n > TOL_CMP);
        sum / n
    }

    /// True when this is the natural ordering cone `R^q₊` (up to tolerance).
    pub fn is_natural(&self) -> bool {
        if self.halfspace_normals.len() != self.dim {
            return false;
        }
        (0..self.dim).all(|i| {
            self.halfspace_normals.iter().any(|w| {
                (0..self.dim).all(|j| {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    (w[j] - expect).abs() <= 1e-9
                })
            })
        })
    }
}

fn check_rows(rows: &[DVector<f64>]) -> Result<(), ConeError> {
    if rows.is_empty() {
        return Err(ConeError::Degenerate);
    }
    let dim = rows[0].len();
    if dim < 2 || rows.iter().any(|r| r.len() != dim) {
        return Err(ConeError::Degenerate);
    }
    if rows.iter().any(|r| r.norm() <= TOL_CMP) {
        return Err(ConeError::Degenerate);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(data)
    }

    fn unit(data: &[f64]) -> DVector<f64> {
        let x = v(data);
        let n = x.norm();
        x / n
    }

    fn has_direction(rows: &[DVector<f64>], d: &[f64]) -> bool {
        let u = unit(d);
        rows.iter().any(|r| (r - &u).amax() < 1e-8)
    }

    #[test]
    fn natural_cone_is_self_dual() {
        let c = OrderingCone::from_rays(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!(has_direction(c.halfspace_normals(), &[1.0, 0.0]));
        assert!(has_direction(c.halfspace_normals(), &[0.0, 1.0]));
        assert!(c.is_natural());
        assert!(c.dual().is_natural());
    }

    #[test]
    fn skewed_cone_normals_match_dual_rays() {
        let c = OrderingCone::from_rays(&[v(&[1.0, 2.0]), v(&[2.0, 1.0])]).unwrap();
        assert_eq!(c.halfspace_normals().len(), 2);
        assert!(has_direction(c.halfspace_normals(), &[2.0, -1.0]));
        assert!(has_direction(c.halfspace_normals(), &[-1.0, 2.0]));
        // W^T (1,2) = (0, 3) ≥ 0: the ray lies on the boundary.
        assert!(c.contains(&v(&[1.0, 2.0]), 1e-9));
        assert!(!c.interior_contains(&v(&[1.0, 2.0])));
    }

    #[test]
    fn opposite_rays_not_pointed() {
        assert_eq!(
            OrderingCone::from_rays(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap_err(),
            ConeError::NotPointed
        );
    }

    #[test]
    fn single_ray_not_solid() {
        assert_eq!(
            OrderingCone::from_rays(&[v(&[1.0, 0.0])]).unwrap_err(),
            ConeError::NotSolid
        );
    }

    #[test]
    fn halfplane_not_pointed() {
        assert_eq!(
            OrderingCone::from_halfspaces(&[v(&[1.0, 0.0])]).unwrap_err(),
            ConeError::NotPointed
        );
    }

    #[test]
    fn halfspaces_recover_rays() {
        let c = OrderingCone::from_halfspaces(&[v(&[2.0, -1.0]), v(&[-1.0, 2.0])]).unwrap();
        assert!(has_direction(c.generator_rays(), &[1.0, 2.0]));
        assert!(has_direction(c.generator_rays(), &[2.0, 1.0]));
    }

    #[test]
    fn fullspace_trivial() {
        assert_eq!(
            OrderingCone::from_rays(&[
                v(&[1.0, 0.0]),
                v(&[-1.0, 0.0]),
                v(&[0.0, 1.0]),
                v(&[0.0, -1.0])
            ])
            .unwrap_err(),
            ConeError::Trivial
        );
    }

    #[test]
    fn zero_ray_degenerate() {
        assert_eq!(
            OrderingCone::from_rays(&[v(&[0.0, 0.0]), v(&[1.0, 0.0])]).unwrap_err(),
            ConeError::Degenerate
        );
    }

    #[test]
    fn leq_examples() {
        let natural = OrderingCone::natural(2);
        assert!(natural.leq(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap());
        assert!(!natural.leq(&v(&[0.0, 2.0]), &v(&[1.0, 1.0])).unwrap());
        let c1 = OrderingCone::from_rays(&[v(&[1.0, 2.0]), v(&[2.0, 1.0])]).unwrap();
        assert!(c1.leq(&v(&[0.0, 0.0]), &v(&[1.0, 2.0])).unwrap());
        assert_eq!(
            c1.leq(&v(&[0.0, 0.0]), &v(&[1.0, 2.0, 3.0])).unwrap_err(),
            ConeError::DimensionMismatch
        );
    }

    #[test]
    fn dual_involution() {
        let c = OrderingCone::from_rays(&[v(&[1.0, 2.0]), v(&[2.0, 1.0])]).unwrap();
        let dd = c.dual().dual();
        for r in c.generator_rays() {
            assert!(has_direction(dd.generator_rays(), r.as_slice()));
        }
    }

    #[test]
    fn generator_rays_on_boundary() {
        let c = OrderingCone::from_rays(&[v(&[1.0, 2.0]), v(&[2.0, 1.0]), v(&[1.0, 1.0])]).unwrap();
        // The interior ray (1,1) must have been dropped.
        assert_eq!(c.generator_rays().len(), 2);
        for d in c.generator_rays() {
            let min_slack = c
                .halfspace_normals()
                .iter()
                .map(|w| w.dot(d))
                .fold(f64::INFINITY, f64::min);
            assert!(min_slack.abs() <= 1e-9);
        }
    }
}
