//! Polyhedral computation kernel.
//!
//! Convex polyhedra are kept in halfspace form `{z : n_i · z ≥ c_i}` with unit
//! normals, with a lazily computed generator form (vertices plus recession
//! rays). Conversion runs the floating-point double description method on the
//! homogenization; there is no exact-arithmetic fallback. Redundancy removal
//! first merges halfspaces that are numerically too close to tell apart, then
//! drops every halfspace that does not support a facet.
//!
//! Distances to a polyhedron are convex projection subproblems and are routed
//! through the scalar backend; see [`distance_point_to_polyhedron`].

pub(crate) mod dd;
mod geometry;

pub use geometry::{distance_point_to_polyhedron, hausdorff_nested};

use std::fmt;

use nalgebra::DVector;
use serde_json::json;

use crate::TOL_CMP;
use crate::TOL_FEAS;

/// Angle below which two halfspace normals count as the same direction.
pub const DUP_ANGLE: f64 = 1e-6;

/// Offset difference below which two same-direction halfspaces are merged.
pub const DUP_OFFSET: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeError {
    /// The halfspace system has no feasible point.
    EmptyPolyhedron,
    /// An operation that needs an H-representation got a polyhedron without one.
    NoHalfspaces,
    /// A halfspace normal was zero (or numerically zero).
    ZeroNormal,
    /// `hausdorff_nested` was called on a pair that is not nested; the payload
    /// is the largest constraint violation found.
    NotNested(f64),
    /// The projection subproblem could not be solved.
    BackendFailure(String),
    /// Vertex enumeration lost too much precision to continue.
    NumericalFailure(String),
}

impl fmt::Display for PolytopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolytopeError::EmptyPolyhedron => write!(f, "polyhedron is empty"),
            PolytopeError::NoHalfspaces => write!(f, "polyhedron has no H-representation"),
            PolytopeError::ZeroNormal => write!(f, "halfspace normal is zero"),
            PolytopeError::NotNested(v) => {
                write!(f, "inner polyhedron leaves the outer one by {v:.3e}")
            }
            PolytopeError::BackendFailure(s) => write!(f, "projection subproblem failed: {s}"),
            PolytopeError::NumericalFailure(s) => write!(f, "vertex enumeration failed: {s}"),
        }
    }
}

impl std::error::Error for PolytopeError {}

/// Closed halfspace `{z : normal · z ≥ offset}` with unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: DVector<f64>,
    offset: f64,
}

impl Halfspace {
    /// Normalizes the normal to unit length, rescaling the offset to keep the
    /// same set.
    pub fn new(normal: DVector<f64>, offset: f64) -> Result<Self, PolytopeError> {
        let n = normal.norm();
        if n <= TOL_CMP || n.is_nan() || !offset.is_finite() {
            return Err(PolytopeError::ZeroNormal);
        }
        Ok(Halfspace {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed slack `normal · z − offset`; nonnegative means satisfied.
    pub fn slack(&self, z: &DVector<f64>) -> f64 {
        self.normal.dot(z) - self.offset
    }
}

/// Vertex and ray slices returned by enumeration.
pub type GeneratorsRef<'a> = (&'a [DVector<f64>], &'a [DVector<f64>]);

/// Convex polyhedron with halfspace and generator representations.
///
/// Values are treated as snapshots: refinement goes through
/// [`Polyhedron::add_halfspace`], which returns a new polyhedron with the
/// generator form invalidated.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<DVector<f64>>,
    rays: Vec<DVector<f64>>,
    vrep_valid: bool,
}

impl Polyhedron {
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Self {
        Polyhedron {
            halfspaces,
            vertices: Vec::new(),
            rays: Vec::new(),
            vrep_valid: false,
        }
    }

    /// Builds `conv(points) + cone(rays)` directly from generators. The
    /// H-representation is left empty.
    pub fn from_generators(points: Vec<DVector<f64>>, rays: Vec<DVector<f64>>) -> Self {
        Polyhedron {
            halfspaces: Vec::new(),
            vertices: points,
            rays,
            vrep_valid: true,
        }
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vrep_valid(&self) -> bool {
        self.vrep_valid
    }

    /// Generator points. Only meaningful after enumeration or for polyhedra
    /// built from generators.
    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn rays(&self) -> &[DVector<f64>] {
        &self.rays
    }

    /// Intersection with one more halfspace. Does not enumerate.
    pub fn add_halfspace(&self, h: Halfspace) -> Polyhedron {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.push(h);
        Polyhedron::from_halfspaces(halfspaces)
    }

    /// True when `z` satisfies every halfspace within `tol`.
    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(z) >= -tol)
    }

    /// Computes vertices and extreme recession rays from the H-representation
    /// and caches them. Polyhedra with a lineality space get the lineality
    /// directions reported as opposite ray pairs, so the generator form always
    /// describes the same set.
    pub fn enumerate_vertices(&mut self) -> Result<GeneratorsRef<'_>, PolytopeError> {
        if self.vrep_valid {
            return Ok((&self.vertices, &self.rays));
        }
        if self.halfspaces.is_empty() {
            return Err(PolytopeError::NoHalfspaces);
        }
        let q = self.halfspaces[0].normal.len();
        // Homogenize: {(z, t) : n_i·z − c_i t ≥ 0, t ≥ 0}.
        let mut rows: Vec<DVector<f64>> = Vec::with_capacity(self.halfspaces.len() + 1);
        let mut t_row = DVector::zeros(q + 1);
        t_row[q] = 1.0;
        rows.push(t_row);
        for h in &self.halfspaces {
            let mut row = DVector::zeros(q + 1);
            for i in 0..q {
                row[i] = h.normal[i];
            }
            row[q] = -h.offset;
            rows.push(row / (1.0 + h.offset * h.offset).sqrt());
        }
        let cone = dd::extreme_rays(&rows, q + 1, TOL_CMP);

        let mut vertices: Vec<DVector<f64>> = Vec::new();
        let mut rays: Vec<DVector<f64>> = Vec::new();
        let push_ray = |rays: &mut Vec<DVector<f64>>, dir: DVector<f64>| {
            let n = dir.norm();
            if n > TOL_CMP {
                let unit = dir / n;
                if !rays.iter().any(|r| (r - &unit).amax() <= 1e-8) {
                    rays.push(unit);
                }
            }
        };
        for dir in cone.rays {
            let t = dir[q];
            if t > 1e-10 {
                let v = dir.rows(0, q) / t;
                let scale = 1.0_f64.max(v.amax());
                if !vertices
                    .iter()
                    .any(|u| (u - &v).amax() <= TOL_CMP * scale * 10.0)
                {
                    vertices.push(v.into_owned());
                }
            } else {
                push_ray(&mut rays, dir.rows(0, q).into_owned());
            }
        }
        for line in cone.lineality {
            let spatial = line.rows(0, q).into_owned();
            push_ray(&mut rays, spatial.clone());
            push_ray(&mut rays, -spatial);
        }
        if vertices.is_empty() {
            return Err(PolytopeError::EmptyPolyhedron);
        }
        self.vertices = vertices;
        self.rays = rays;
        self.vrep_valid = true;
        Ok((&self.vertices, &self.rays))
    }

    /// Conservative reduction used between refinement steps: merges
    /// near-duplicate halfspaces, enumerates, and drops only halfspaces that
    /// are strictly inactive at every vertex. Halfspaces supporting sliver
    /// faces are kept; the exact facet test of [`Polyhedron::remove_redundant`]
    /// can misjudge them in floating point, and dropping a live cut lets
    /// already-resolved vertices reappear.
    pub(crate) fn reduce_for_refinement(&self) -> Result<Polyhedron, PolytopeError> {
        let mut reduced = Polyhedron::from_halfspaces(merge_near_duplicates(&self.halfspaces));
        reduced.enumerate_vertices()?;
        let kept: Vec<Halfspace> = reduced
            .halfspaces
            .iter()
            .filter(|h| {
                reduced
                    .vertices
                    .iter()
                    .any(|v| h.slack(v) <= 1e-5 * (1.0 + v.amax()))
            })
            .cloned()
            .collect();
        Ok(Polyhedron {
            halfspaces: kept,
            vertices: reduced.vertices,
            rays: reduced.rays,
            vrep_valid: true,
        })
    }

    /// Same point set with an irredundant H-representation.
    ///
    /// Near-duplicate halfspaces (normal angle below [`DUP_ANGLE`], offsets
    /// within [`DUP_OFFSET`]) are merged keeping the tighter one, then every
    /// halfspace that does not support a face of dimension `dim(P) − 1` is
    /// dropped. The generator form of the result is valid.
    pub fn remove_redundant(&self) -> Result<Polyhedron, PolytopeError> {
        if self.halfspaces.is_empty() {
            return Err(PolytopeError::NoHalfspaces);
        }
        let mut reduced = Polyhedron::from_halfspaces(merge_near_duplicates(&self.halfspaces));
        reduced.enumerate_vertices()?;

        // Active generators per halfspace, at feasibility tolerance.
        let vertex_scale: Vec<f64> = reduced
            .vertices
            .iter()
            .map(|v| 1.0_f64.max(v.amax()))
            .collect();
        let active: Vec<(Vec<usize>, Vec<usize>)> = reduced
            .halfspaces
            .iter()
            .map(|h| {
                let verts = reduced
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, v)| h.slack(v).abs() <= TOL_FEAS * vertex_scale[*i])
                    .map(|(i, _)| i)
                    .collect();
                let rays = reduced
                    .rays
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| h.normal.dot(r).abs() <= TOL_FEAS)
                    .map(|(i, _)| i)
                    .collect();
                (verts, rays)
            })
            .collect();

        let set_dim = affine_dim(&reduced.vertices, &reduced.rays);
        let kept: Vec<Halfspace> = if set_dim == 0 {
            // Single point: greedily keep active halfspaces until their
            // normals span the space.
            let q = reduced.halfspaces[0].normal.len();
            let mut chosen: Vec<Halfspace> = Vec::new();
            let mut normals: Vec<DVector<f64>> = Vec::new();
            for (h, (verts, _)) in reduced.halfspaces.iter().zip(&active) {
                if verts.is_empty() {
                    continue;
                }
                normals.push(h.normal.clone());
                if dd::rank_of_rows(&normals, 1e-7) > chosen.len() {
                    chosen.push(h.clone());
                } else {
                    normals.pop();
                }
                if chosen.len() == q {
                    break;
                }
            }
            chosen
        } else {
            reduced
                .halfspaces
                .iter()
                .zip(&active)
                .filter(|(_, (verts, ray_idx))| {
                    if verts.is_empty() {
                        return false;
                    }
                    let v0 = &reduced.vertices[verts[0]];
                    let dirs: Vec<DVector<f64>> = verts[1..]
                        .iter()
                        .map(|&i| &reduced.vertices[i] - v0)
                        .chain(ray_idx.iter().map(|&i| reduced.rays[i].clone()))
                        .collect();
                    dd::rank_of_rows(&dirs, 1e-7 * scale_of(&dirs)) + 1 >= set_dim
                })
                .map(|(h, _)| h.clone())
                .collect()
        };

        Ok(Polyhedron {
            halfspaces: kept,
            vertices: reduced.vertices,
            rays: reduced.rays,
            vrep_valid: true,
        })
    }

    /// Debug dump with `halfspaces`, `vertices` and `rays` keys.
    pub fn to_debug_json(&self) -> serde_json::Value {
        json!({
            "halfspaces": self.halfspaces.iter().map(|h| json!({
                "normal": h.normal.iter().copied().collect::<Vec<f64>>(),
                "offset": h.offset,
            })).collect::<Vec<_>>(),
            "vertices": self.vertices.iter()
                .map(|v| v.iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
            "rays": self.rays.iter()
                .map(|r| r.iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Merges halfspaces whose normals are within [`DUP_ANGLE`] and whose offsets
/// differ by at most [`DUP_OFFSET`], keeping the tighter offset. Uses
/// `cos θ ≥ 1 − θ²/2` for the angle test.
fn merge_near_duplicates(halfspaces: &[Halfspace]) -> Vec<Halfspace> {
    let angle_gap = DUP_ANGLE * DUP_ANGLE / 2.0;
    let mut merged: Vec<Halfspace> = Vec::new();
    for h in halfspaces {
        match merged.iter_mut().find(|m| {
            1.0 - m.normal.dot(&h.normal) <= angle_gap && (m.offset - h.offset).abs() <= DUP_OFFSET
        }) {
            Some(m) => m.offset = m.offset.max(h.offset),
            None => merged.push(h.clone()),
        }
    }
    merged
}

fn scale_of(dirs: &[DVector<f64>]) -> f64 {
    dirs.iter().map(|d| d.amax()).fold(1.0, f64::max)
}

/// Affine dimension of `conv(vertices) + cone(rays)`.
fn affine_dim(vertices: &[DVector<f64>], rays: &[DVector<f64>]) -> usize {
    if vertices.is_empty() {
        return 0;
    }
    let v0 = &vertices[0];
    let dirs: Vec<DVector<f64>> = vertices[1..]
        .iter()
        .map(|v| v - v0)
        .chain(rays.iter().cloned())
        .collect();
    dd::rank_of_rows(&dirs, 1e-7 * scale_of(&dirs))
}
