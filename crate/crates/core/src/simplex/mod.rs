//! Products of simplices, their faces, and combinatorial covers by grid cells.
//!
//! Indices are 0-based: the simplex `Δ_k` has coordinates `0..k`, and the
//! `(k-1)`-face `{x_q = 0}` is written as the index set `[k] ∖ {q}`.

mod grid;
mod search;
mod unity;

pub use grid::{CounterFamily, CoverDoc, CoverError, Grid, GridCover};
pub use search::{
    min_order_refinement, min_separating_order, RefinementBudget, RefinementResult, SeparatingBudget,
    SeparatingResult,
};
pub use unity::{boundary_claim_check, g_map, phi_alpha, ClaimReport, ClaimViolation};

use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplexError {
    #[error("simplex sizes must be at least 2")]
    Size,
    #[error("face index set must be a non-empty subset of 0..{k}")]
    Face { k: usize },
    #[error("coordinates of factor {factor} must be non-negative and sum to 1")]
    Point { factor: usize },
    #[error("point has {got} factors, expected {want}")]
    Shape { got: usize, want: usize },
}

/// `Δ_{k_1} × … × Δ_{k_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductSpec {
    ks: Vec<usize>,
}

impl ProductSpec {
    pub fn new(ks: Vec<usize>) -> Result<Self, SimplexError> {
        if ks.is_empty() || ks.iter().any(|&k| k < 2) {
            return Err(SimplexError::Size);
        }
        Ok(ProductSpec { ks })
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    pub fn factors(&self) -> usize {
        self.ks.len()
    }

    /// `Σ (k_i - 1)`.
    pub fn dimension(&self) -> usize {
        self.ks.iter().map(|k| k - 1).sum()
    }

    /// `Σ k_i`.
    pub fn vertex_sum(&self) -> usize {
        self.ks.iter().sum()
    }

    pub fn center(&self) -> ProductPoint {
        ProductPoint { coords: self.ks.iter().map(|&k| center(k)).collect() }
    }
}

pub(crate) fn center(k: usize) -> Vec<Q> {
    vec![Q::new(1.into(), (k as i64).into()); k]
}

pub(crate) fn vertex(k: usize, q: usize) -> Vec<Q> {
    (0..k).map(|j| if j == q { Q::one() } else { Q::zero() }).collect()
}

/// A face `{x ∈ Δ_k : Σ_{j∈I} x_j = 1}` of factor `factor`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceRef {
    pub factor: usize,
    pub k: usize,
    indices: BTreeSet<usize>,
}

impl FaceRef {
    pub fn new(factor: usize, k: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self, SimplexError> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if indices.is_empty() || indices.iter().any(|&j| j >= k) {
            return Err(SimplexError::Face { k });
        }
        Ok(FaceRef { factor, k, indices })
    }

    /// The `(k-1)`-face `{x_q = 0}`.
    pub fn facet(factor: usize, k: usize, q: usize) -> Self {
        FaceRef::new(factor, k, (0..k).filter(|&j| j != q)).expect("q < k and k ≥ 2")
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.indices
    }

    /// `ℓ` for an `ℓ`-face.
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// The face on the complementary index set; `None` for the whole simplex.
    pub fn opposite(&self) -> Option<FaceRef> {
        FaceRef::new(self.factor, self.k, (0..self.k).filter(|j| !self.indices.contains(j))).ok()
    }
}

impl fmt::Display for FaceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|j| j.to_string()).collect();
        write!(f, "Δ{}[{{{}}}]", self.factor, idx.join(","))
    }
}

/// `⋂ F_j` of faces of one factor (index sets intersect); `None` if empty.
pub fn face_intersection(faces: &[FaceRef]) -> Option<FaceRef> {
    let first = faces.first()?;
    let mut idx = first.indices.clone();
    for f in &faces[1..] {
        assert_eq!((f.factor, f.k), (first.factor, first.k), "faces of different simplices");
        idx = idx.intersection(&f.indices).copied().collect();
    }
    FaceRef::new(first.factor, first.k, idx).ok()
}

/// A point of the product, one barycentric vector per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductPoint {
    coords: Vec<Vec<Q>>,
}

impl ProductPoint {
    pub fn new(spec: &ProductSpec, coords: Vec<Vec<Q>>) -> Result<Self, SimplexError> {
        if coords.len() != spec.factors() {
            return Err(SimplexError::Shape { got: coords.len(), want: spec.factors() });
        }
        for (i, (c, &k)) in coords.iter().zip(spec.ks()).enumerate() {
            let sum: Q = c.iter().sum();
            if c.len() != k || c.iter().any(|x| x.is_negative()) || !sum.is_one() {
                return Err(SimplexError::Point { factor: i });
            }
        }
        Ok(ProductPoint { coords })
    }

    /// Point with integer coordinates `y` scaled down by `r`.
    pub fn from_scaled(scaled: &[Vec<u32>], r: u32) -> Self {
        let r = Q::from_integer((r as i64).into());
        ProductPoint {
            coords: scaled
                .iter()
                .map(|v| v.iter().map(|&y| Q::from_integer((y as i64).into()) / &r).collect())
                .collect(),
        }
    }

    pub(crate) fn from_raw(coords: Vec<Vec<Q>>) -> Self {
        ProductPoint { coords }
    }

    pub fn coords(&self) -> &[Vec<Q>] {
        &self.coords
    }

    pub fn factor(&self, i: usize) -> &[Q] {
        &self.coords[i]
    }
}

impl fmt::Display for ProductPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "({})", parts.join(" | "))
    }
}

/// `Σ_{j∈I} x_{i,j} = 1`.
pub fn is_in_face(x: &ProductPoint, f: &FaceRef) -> bool {
    let sum: Q = f.indices.iter().map(|&j| &x.coords[f.factor][j]).sum();
    sum.is_one()
}

/// Some barycentric coordinate vanishes.
pub fn on_boundary(x: &ProductPoint) -> bool {
    x.coords.iter().flatten().any(|c| c.is_zero())
}

/// Finds distinct options for every requirement (Kuhn's augmenting paths).
///
/// `options[a]` lists the items that may serve requirement `a`; the result
/// maps each requirement to its item.
pub fn distinct_representatives(options: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn augment(a: usize, options: &[Vec<usize>], owner: &mut Vec<Option<usize>>, seen: &mut Vec<bool>) -> bool {
        for &e in &options[a] {
            if seen[e] {
                continue;
            }
            seen[e] = true;
            if owner[e].map_or(true, |b| augment(b, options, owner, seen)) {
                owner[e] = Some(a);
                return true;
            }
        }
        false
    }
    let items = options.iter().flatten().max().map_or(0, |m| m + 1);
    let mut owner: Vec<Option<usize>> = vec![None; items];
    for a in 0..options.len() {
        let mut seen = vec![false; items];
        if !augment(a, options, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut out = vec![0; options.len()];
    for (e, a) in owner.iter().enumerate() {
        if let Some(a) = a {
            out[*a] = e;
        }
    }
    Some(out)
}

/// Separation failure at a point whose factor has support `support` (bit `q`
/// set when `x_q > 0`): distinct elements, all containing the point, meeting
/// the facets `{x_a = 0}` for every `a` in the support. `faces_met[e]` is the
/// facet mask of the `e`-th element containing the point.
///
/// Returns `(element, a)` pairs of the violating subfamily.
pub fn separation_violation(k: usize, support: u64, faces_met: &[u64]) -> Option<Vec<(usize, usize)>> {
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    if support & full == full {
        return None;
    }
    let need: Vec<usize> = (0..k).filter(|&a| support >> a & 1 == 1).collect();
    let options: Vec<Vec<usize>> = need
        .iter()
        .map(|&a| (0..faces_met.len()).filter(|&e| faces_met[e] >> a & 1 == 1).collect())
        .collect();
    let pick = distinct_representatives(&options)?;
    Some(pick.into_iter().zip(need).collect())
}
