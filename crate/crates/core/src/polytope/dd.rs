//! Double description method for homogeneous inequality systems.
//!
//! Computes the extreme rays of a cone `{y ∈ R^d : a_i · y ≥ 0}` given the
//! constraint rows `a_i`. The implementation is floating point throughout:
//! zero tests use an absolute tolerance on normalized data (unit constraint
//! rows, unit rays).
//!
//! The lineality space is tracked explicitly. Processing starts from the full
//! space (lineality = R^d, no rays); each constraint either cuts the lineality
//! space down by one dimension or splits the current ray set in the usual
//! double description step. Candidate pairs are screened with the cardinality
//! prefilter and the combinatorial adjacency test; a final rank filter drops
//! rays whose active constraint set is too low-dimensional to be extreme.

use nalgebra::{DMatrix, DVector};

/// Ray description of a polyhedral cone: `span(lineality) + cone(rays)`.
pub(crate) struct ConeRays {
    pub lineality: Vec<DVector<f64>>,
    pub rays: Vec<DVector<f64>>,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(words: usize) -> Self {
        Bits(vec![0; words])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn intersect(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, bits)| {
            let mut bits = *bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }
}

/// Rank of a small row-major matrix by Gaussian elimination with partial
/// pivoting; cheap enough to run once per candidate ray pair. The buffer is
/// destroyed in place.
fn small_rank(buf: &mut [f64], nrows: usize, dim: usize, tol: f64) -> usize {
    let mut rank = 0;
    for col in 0..dim {
        let mut pivot = rank;
        for i in rank..nrows {
            if buf[i * dim + col].abs() > buf[pivot * dim + col].abs() {
                pivot = i;
            }
        }
        if rank >= nrows || buf[pivot * dim + col].abs() <= tol {
            continue;
        }
        if pivot != rank {
            for c in 0..dim {
                buf.swap(rank * dim + c, pivot * dim + c);
            }
        }
        for i in rank + 1..nrows {
            let factor = buf[i * dim + col] / buf[rank * dim + col];
            if factor != 0.0 {
                for c in col..dim {
                    buf[i * dim + c] -= factor * buf[rank * dim + c];
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

struct Ray {
    dir: DVector<f64>,
    active: Bits,
}

/// Extreme rays and lineality space of `{y : rows[i] · y ≥ 0}`.
///
/// Rows are normalized internally; near-zero rows are skipped. `tol` is the
/// absolute zero test used on unit data.
pub(crate) fn extreme_rays(rows: &[DVector<f64>], dim: usize, tol: f64) -> ConeRays {
    let words = rows.len().div_ceil(64);
    let normalized: Vec<Option<DVector<f64>>> = rows
        .iter()
        .map(|r| {
            let n = r.norm();
            if n <= tol {
                None
            } else {
                Some(r / n)
            }
        })
        .collect();

    // Start from the full space.
    let mut lineality: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, row) in normalized.iter().enumerate() {
        let Some(a) = row else { continue };

        // Component of the constraint on the current lineality space.
        let comps: Vec<f64> = lineality.iter().map(|b| a.dot(b)).collect();
        let pivot = comps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .filter(|(_, c)| c.abs() > tol)
            .map(|(i, _)| i);

        if let Some(p) = pivot {
            // The constraint cuts the lineality space: extract a pivot
            // direction v with a·v > 0, make the rest of the basis and all
            // existing rays orthogonal to the constraint, and add v as a ray.
            let mut v = lineality.swap_remove(p);
            if a.dot(&v) < 0.0 {
                v = -v;
            }
            let av = a.dot(&v);
            for b in lineality.iter_mut() {
                let coeff = a.dot(b) / av;
                *b -= &v * coeff;
            }
            reorthonormalize(&mut lineality, tol);
            let mut kept: Vec<Ray> = Vec::new();
            for mut ray in rays.drain(..) {
                let coeff = a.dot(&ray.dir) / av;
                ray.dir -= &v * coeff;
                let norm = ray.dir.norm();
                if norm > tol {
                    ray.dir /= norm;
                    ray.active.set(idx);
                    kept.push(ray);
                }
            }
            rays = kept;
            // v is active on every previously processed constraint but not
            // on this one.
            let mut active = Bits::new(words);
            for (j, r) in normalized[..idx].iter().enumerate() {
                if let Some(r) = r {
                    if r.dot(&v).abs() / av.abs() <= tol {
                        active.set(j);
                    }
                }
            }
            rays.push(Ray {
                dir: &v / v.norm(),
                active,
            });
            continue;
        }

        // Standard double description step: partition, keep, combine.
        let vals: Vec<f64> = rays.iter().map(|r| a.dot(&r.dir)).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -tol).collect();
        if neg.is_empty() {
            for (ray, &val) in rays.iter_mut().zip(&vals) {
                if val.abs() <= tol {
                    ray.active.set(idx);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > tol).collect();

        let needed = (dim - lineality.len()).saturating_sub(2);
        let mut next: Vec<Ray> = Vec::new();
        for (i, &vp) in vals.iter().enumerate() {
            if vp >= -tol {
                let mut ray = Ray {
                    dir: rays[i].dir.clone(),
                    active: rays[i].active.clone(),
                };
                if vp.abs() <= tol {
                    ray.active.set(idx);
                }
                next.push(ray);
            }
        }
        let mut scratch: Vec<f64> = Vec::new();
        for &i in &pos {
            for &j in &neg {
                let common = rays[i].active.intersect(&rays[j].active);
                if (common.count() as usize) < needed {
                    continue;
                }
                // Algebraic adjacency: the common active rows must cut the
                // pointed part of the cone down to exactly two dimensions.
                if needed > 0 {
                    scratch.clear();
                    let mut nrows = 0;
                    for k in common.indices() {
                        if let Some(row) = &normalized[k] {
                            scratch.extend(row.iter());
                            nrows += 1;
                        }
                    }
                    if small_rank(&mut scratch, nrows, dim, 1e-7) != needed {
                        continue;
                    }
                }
                let mut dir = &rays[j].dir * vals[i] - &rays[i].dir * vals[j];
                let norm = dir.norm();
                if norm <= tol {
                    continue;
                }
                dir /= norm;
                let mut active = Bits::new(words);
                for (k, r) in normalized[..=idx].iter().enumerate() {
                    if let Some(r) = r {
                        if r.dot(&dir).abs() <= tol * 10.0 {
                            active.set(k);
                        }
                    }
                }
                next.push(Ray { dir, active });
            }
        }
        rays = next;
    }

    // Deduplicate by direction, then drop rays whose active set is too
    // low-dimensional to define an extreme ray of the pointed quotient.
    let mut unique: Vec<Ray> = Vec::new();
    for ray in rays {
        if !unique.iter().any(|u| (&u.dir - &ray.dir).amax() <= 1e-8) {
            unique.push(ray);
        }
    }
    let pointed_dim = dim - lineality.len();
    let min_rank = pointed_dim.saturating_sub(1);
    let extreme: Vec<DVector<f64>> = unique
        .into_iter()
        .filter(|ray| {
            if min_rank == 0 {
                return true;
            }
            let active_rows: Vec<DVector<f64>> = normalized
                .iter()
                .flatten()
                .filter(|r| r.dot(&ray.dir).abs() <= tol * 10.0)
                .cloned()
                .collect();
            if active_rows.len() < min_rank {
                return false;
            }
            rank_of_rows(&active_rows, 1e-7) >= min_rank
        })
        .map(|r| r.dir)
        .collect();

    ConeRays {
        lineality,
        rays: extreme,
    }
}

fn reorthonormalize(basis: &mut Vec<DVector<f64>>, tol: f64) {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(basis.len());
    for b in basis.drain(..) {
        let mut v = b;
        for u in &out {
            let c = u.dot(&v);
            v -= u * c;
        }
        let n = v.norm();
        if n > tol {
            out.push(v / n);
        }
    }
    *basis = out;
}

pub(crate) fn rank_of_rows(rows: &[DVector<f64>], eps: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let dim = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    m.rank(eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(data)
    }

    #[test]
    fn orthant_rays() {
        let rows = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let cone = extreme_rays(&rows, 2, 1e-9);
        assert!(cone.lineality.is_empty());
        assert_eq!(cone.rays.len(), 2);
        for e in [[1.0, 0.0], [0.0, 1.0]] {
            assert!(cone.rays.iter().any(|r| (r - v(&e)).amax() < 1e-9));
        }
    }

    #[test]
    fn halfspace_keeps_lineality() {
        let rows = vec![v(&[1.0, 0.0])];
        let cone = extreme_rays(&rows, 2, 1e-9);
        assert_eq!(cone.lineality.len(), 1);
        assert!(cone.lineality[0][0].abs() < 1e-12);
        assert_eq!(cone.rays.len(), 1);
        assert!((cone.rays[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_cone_normals() {
        // C = cone{(1,2),(2,1)} has dual rays (2,-1) and (-1,2): the dual
        // cone {w : w·(1,2) >= 0, w·(2,1) >= 0} has those extreme rays.
        let rows = vec![v(&[1.0, 2.0]), v(&[2.0, 1.0])];
        let cone = extreme_rays(&rows, 2, 1e-9);
        assert_eq!(cone.rays.len(), 2);
        for e in [[2.0, -1.0], [-1.0, 2.0]] {
            let unit = v(&e) / v(&e).norm();
            assert!(cone.rays.iter().any(|r| (r - &unit).amax() < 1e-9));
        }
    }

    #[test]
    fn opposite_halfspaces_leave_plane() {
        let rows = vec![v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0])];
        let cone = extreme_rays(&rows, 3, 1e-9);
        // {x = 0} plane: lineality of dimension 2, no extreme rays.
        assert_eq!(cone.lineality.len(), 2);
        assert!(cone.rays.is_empty());
    }

    #[test]
    fn degenerate_square_pyramid() {
        // Four constraints meeting at a single apex ray (0,0,1): a degenerate
        // vertex where the combinatorial test must still find all 4 edges.
        let rows = vec![
            v(&[1.0, 0.0, 1.0]),
            v(&[-1.0, 0.0, 1.0]),
            v(&[0.0, 1.0, 1.0]),
            v(&[0.0, -1.0, 1.0]),
        ];
        let cone = extreme_rays(&rows, 3, 1e-9);
        assert!(cone.lineality.is_empty());
        assert_eq!(cone.rays.len(), 4);
        for e in [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0],
            [-1.0, 1.0, 1.0],
            [-1.0, -1.0, 1.0],
        ] {
            let unit = v(&e) / v(&e).norm();
            assert!(
                cone.rays.iter().any(|r| (r - &unit).amax() < 1e-8),
                "missing edge {:?}",
                e
            );
        }
    }
}
