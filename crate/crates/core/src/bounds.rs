//! Local lower/upper bound sets and enclosure width for the natural ordering.
//!
//! The enclosure keeps a stable set `N` of mutually nondominated image points
//! together with the local lower bound set `L` and local upper bound set `U`
//! over a box-shaped zone of interest. Inserting a point splits every local
//! bound it strictly dominates into the `q` one-coordinate replacements and
//! filters the results back to an antichain; this is the standard finite
//! update. Comparisons are exact: the points come from solver output and are
//! inserted verbatim.
//!
//! Only the natural ordering is supported. Local bound sets for general
//! polyhedral cones can be infinite, so enclosure refinement is restricted to
//! `C = R^q₊` and the drivers refuse otherwise.

use std::fmt;

use nalgebra::DVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundsError {
    /// The initial box has an empty interior.
    DegenerateBox,
    /// Inserted point is not strictly inside the zone of interest.
    OutOfZone,
    /// No pair `l ≤ u` exists.
    NoCompatiblePair,
    DimensionMismatch,
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::DegenerateBox => write!(f, "initial box has empty interior"),
            BoundsError::OutOfZone => write!(f, "point lies outside the zone of interest"),
            BoundsError::NoCompatiblePair => write!(f, "no compatible (lower, upper) pair"),
            BoundsError::DimensionMismatch => write!(f, "dimension mismatch"),
        }
    }
}

impl std::error::Error for BoundsError {}

/// Componentwise `a ≤ b`.
fn leq(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

/// Componentwise `a < b`.
fn lt(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x < y)
}

/// Enclosure of the nondominated set: zone of interest, stable set, and the
/// two local bound staircases.
#[derive(Debug, Clone)]
pub struct EnclosureState {
    zone_low: DVector<f64>,
    zone_high: DVector<f64>,
    stable: Vec<DVector<f64>>,
    lower: Vec<DVector<f64>>,
    upper: Vec<DVector<f64>>,
}

impl EnclosureState {
    /// Initial enclosure: zone `[l0, u0]`, `L = {l0}`, `U = {u0}`.
    pub fn new(l0: DVector<f64>, u0: DVector<f64>) -> Result<Self, BoundsError> {
        if l0.len() != u0.len() {
            return Err(BoundsError::DimensionMismatch);
        }
        if !lt(&l0, &u0) {
            return Err(BoundsError::DegenerateBox);
        }
        Ok(EnclosureState {
            zone_low: l0.clone(),
            zone_high: u0.clone(),
            stable: Vec::new(),
            lower: vec![l0],
            upper: vec![u0],
        })
    }

    pub fn dim(&self) -> usize {
        self.zone_low.len()
    }

    pub fn stable_set(&self) -> &[DVector<f64>] {
        &self.stable
    }

    pub fn lower_bounds(&self) -> &[DVector<f64>] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[DVector<f64>] {
        &self.upper
    }

    pub fn zone(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.zone_low, &self.zone_high)
    }

    /// Inserts an image point: the stable set absorbs it (a dominated point
    /// changes nothing), then both staircases are split by it.
    pub fn insert_point(&mut self, z: &DVector<f64>) -> Result<(), BoundsError> {
        if z.len() != self.dim() {
            return Err(BoundsError::DimensionMismatch);
        }
        if !(lt(&self.zone_low, z) && lt(z, &self.zone_high)) {
            return Err(BoundsError::OutOfZone);
        }
        if self.stable.iter().any(|n| leq(n, z)) {
            return Ok(());
        }
        self.stable.retain(|n| !leq(z, n));
        self.stable.push(z.clone());
        split_upper(&mut self.upper, z);
        split_lower(&mut self.lower, z);
        Ok(())
    }

    /// Advances the lower staircase past `p`. Sound whenever no feasible
    /// image lies strictly below `p` (the caller's certificate).
    pub fn insert_lower_support(&mut self, p: &DVector<f64>) {
        split_lower(&mut self.lower, p);
    }

    /// Width of the enclosure: the largest shortest edge over compatible
    /// pairs, or −∞ when no pair satisfies `l ≤ u`.
    pub fn width(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for l in &self.lower {
            for u in &self.upper {
                if leq(l, u) {
                    best = best.max(shortest_edge(l, u));
                }
            }
        }
        best
    }

    /// The pair attaining the width; ties resolved by lexicographic order of
    /// `(l, u)`.
    pub fn widest_pair(&self) -> Result<(&DVector<f64>, &DVector<f64>), BoundsError> {
        self.pairs_by_width()
            .into_iter()
            .next()
            .map(|(li, ui, _)| (&self.lower[li], &self.upper[ui]))
            .ok_or(BoundsError::NoCompatiblePair)
    }

    /// Widest compatible pair among those the filter accepts, without
    /// materializing the full pair list. The filter runs only when a pair
    /// would become the current best. Ties follow [`EnclosureState::widest_pair`].
    pub fn widest_pair_where<F>(&self, mut accept: F) -> Option<(&DVector<f64>, &DVector<f64>, f64)>
    where
        F: FnMut(&DVector<f64>, &DVector<f64>, f64) -> bool,
    {
        let mut best: Option<(usize, usize, f64)> = None;
        for (li, l) in self.lower.iter().enumerate() {
            for (ui, u) in self.upper.iter().enumerate() {
                if !leq(l, u) {
                    continue;
                }
                let w = shortest_edge(l, u);
                let better = match &best {
                    None => true,
                    Some((bli, bui, bw)) => match w.total_cmp(bw) {
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Less => false,
                        std::cmp::Ordering::Equal => match lex_cmp(l, &self.lower[*bli]) {
                            std::cmp::Ordering::Less => true,
                            std::cmp::Ordering::Greater => false,
                            std::cmp::Ordering::Equal => {
                                lex_cmp(u, &self.upper[*bui]) == std::cmp::Ordering::Less
                            }
                        },
                    },
                };
                if better && accept(l, u, w) {
                    best = Some((li, ui, w));
                }
            }
        }
        best.map(|(li, ui, w)| (&self.lower[li], &self.upper[ui], w))
    }

    /// All compatible pairs sorted by decreasing width, ties by
    /// lexicographic order of `(l, u)`.
    pub fn pairs_by_width(&self) -> Vec<(usize, usize, f64)> {
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (li, l) in self.lower.iter().enumerate() {
            for (ui, u) in self.upper.iter().enumerate() {
                if leq(l, u) {
                    pairs.push((li, ui, shortest_edge(l, u)));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.2.total_cmp(&a.2)
                .then_with(|| lex_cmp(&self.lower[a.0], &self.lower[b.0]))
                .then_with(|| lex_cmp(&self.upper[a.1], &self.upper[b.1]))
        });
        pairs
    }
}

fn shortest_edge(l: &DVector<f64>, u: &DVector<f64>) -> f64 {
    l.iter()
        .zip(u.iter())
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min)
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Replaces every `u` with `z < u` by the q candidates `u^(i)` (coordinate i
/// lowered to `z_i`) and keeps the maximal antichain.
fn split_upper(upper: &mut Vec<DVector<f64>>, z: &DVector<f64>) {
    let q = z.len();
    let (split, keep): (Vec<_>, Vec<_>) = upper.drain(..).partition(|u| lt(z, u));
    let mut candidates: Vec<DVector<f64>> = Vec::with_capacity(split.len() * q);
    for u in &split {
        for i in 0..q {
            let mut c = u.clone();
            c[i] = z[i];
            candidates.push(c);
        }
    }
    *upper = keep;
    for c in candidates.drain(..) {
        if upper.iter().any(|e| leq(&c, e)) {
            continue;
        }
        upper.retain(|e| !leq(e, &c));
        upper.push(c);
    }
}

/// Symmetric split for the lower staircase: keep the minimal antichain.
fn split_lower(lower: &mut Vec<DVector<f64>>, z: &DVector<f64>) {
    let q = z.len();
    let (split, keep): (Vec<_>, Vec<_>) = lower.drain(..).partition(|l| lt(l, z));
    let mut candidates: Vec<DVector<f64>> = Vec::with_capacity(split.len() * q);
    for l in &split {
        for i in 0..q {
            let mut c = l.clone();
            c[i] = z[i];
            candidates.push(c);
        }
    }
    *lower = keep;
    for c in candidates.drain(..) {
        if lower.iter().any(|e| leq(e, &c)) {
            continue;
        }
        lower.retain(|e| !leq(&c, e));
        lower.push(c);
    }
}
