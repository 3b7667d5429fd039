//! Exact tilings of Følner sets by right-translates of earlier tiles.

use super::{translate, Element, FiniteSubset, Group, GroupContext, GroupFamily, Side};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// `F_1, F_2, …` together with portion boundaries `0 = n_0 < n_1 < …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerData {
    sets: Vec<FiniteSubset>,
    boundaries: Vec<usize>,
}

impl FolnerData {
    pub fn new(
        ctx: &GroupContext,
        sets: Vec<FiniteSubset>,
        boundaries: Vec<usize>,
    ) -> Result<Self, TilingError> {
        let e = ctx.identity();
        for (i, f) in sets.iter().enumerate() {
            if !f.contains(&e) {
                return Err(TilingError::MissingIdentity { k: i + 1 });
            }
            if let Some(bad) = f.iter().find(|g| !ctx.contains(g)) {
                return Err(TilingError::ForeignElement(*bad));
            }
        }
        if boundaries.first() != Some(&0) {
            return Err(TilingError::BadBoundaries("first boundary must be 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TilingError::BadBoundaries("boundaries must strictly increase".into()));
        }
        if *boundaries.last().unwrap() > sets.len() {
            return Err(TilingError::BadBoundaries("boundary beyond the last set".into()));
        }
        Ok(FolnerData { sets, boundaries })
    }

    /// `F_k` with 1-based `k`.
    pub fn set(&self, k: usize) -> Option<&FiniteSubset> {
        k.checked_sub(1).and_then(|i| self.sets.get(i))
    }

    pub fn sets(&self) -> &[FiniteSubset] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Number of complete portions.
    pub fn portion_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Indices `k` of portion `i` (0-based), i.e. `n_i < k ≤ n_{i+1}`.
    pub fn portion(&self, i: usize) -> Option<std::ops::RangeInclusive<usize>> {
        let lo = *self.boundaries.get(i)?;
        let hi = *self.boundaries.get(i + 1)?;
        Some(lo + 1..=hi)
    }

    /// First indices of each portion, `F_{n_i + 1}`.
    pub fn portion_leaders(&self) -> Vec<&FiniteSubset> {
        (0..self.portion_count())
            .filter_map(|i| self.set(self.boundaries[i] + 1))
            .collect()
    }
}

/// Følner portions plus the center sets `C_{k,n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingScheme {
    pub ctx: GroupContext,
    pub folner: FolnerData,
    pub centers: BTreeMap<(usize, usize), FiniteSubset>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub k: usize,
    pub center: Element,
    pub set: FiniteSubset,
}

/// First failure of the partition property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub n: usize,
    pub portion: usize,
    /// Elements covered by more than one translate.
    pub overlap: FiniteSubset,
    /// Elements of `F_n` left uncovered.
    pub gaps: FiniteSubset,
    /// Covered elements lying outside `F_n`.
    pub stray: FiniteSubset,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tiling violation at n={} (portion {}): overlap {} gaps {} stray {}",
            self.n, self.portion, self.overlap, self.gaps, self.stray
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("F_{k} does not contain the identity")]
    MissingIdentity { k: usize },
    #[error("element {0} does not belong to the group")]
    ForeignElement(Element),
    #[error("bad portion boundaries: {0}")]
    BadBoundaries(String),
    #[error("no center data for n={n} in portion {portion}")]
    NoData { n: usize, portion: usize },
    #[error("n={n} must exceed the end of portion {portion} ({end})")]
    TooSmall { n: usize, portion: usize, end: usize },
    #[error("depth must be at least {min}, got {depth}")]
    Depth { depth: usize, min: usize },
    #[error("{0}")]
    Violation(Violation),
    #[error("malformed tiling document: {0}")]
    Document(String),
}

impl TilingScheme {
    pub fn portion_of(&self, k: usize) -> Option<usize> {
        (0..self.folner.portion_count()).find(|&i| self.folner.portion(i).unwrap().contains(&k))
    }

    /// Whether any `C_{k,n}` is stored for `k` in portion `i`.
    fn has_data(&self, n: usize, portion: usize) -> bool {
        self.folner
            .portion(portion)
            .map(|ks| ks.into_iter().any(|k| self.centers.contains_key(&(k, n))))
            .unwrap_or(false)
    }

    fn translates(&self, n: usize, portion: usize) -> Vec<Tile> {
        let mut out = Vec::new();
        for k in self.folner.portion(portion).unwrap() {
            let Some(cs) = self.centers.get(&(k, n)) else { continue };
            let fk = self.folner.set(k).expect("portion index within range");
            for c in cs.iter() {
                out.push(Tile { k, center: *c, set: translate(&self.ctx, fk, c, Side::Right) });
            }
        }
        out
    }
}

fn check_partition(target: &FiniteSubset, tiles: &[Tile], n: usize, portion: usize) -> Result<(), Violation> {
    let mut seen = BTreeSet::new();
    let mut overlap = BTreeSet::new();
    for t in tiles {
        for g in t.set.iter() {
            if !seen.insert(*g) {
                overlap.insert(*g);
            }
        }
    }
    let covered: FiniteSubset = seen.into_iter().collect();
    let gaps = target.difference(&covered);
    let stray = covered.difference(target);
    if overlap.is_empty() && gaps.is_empty() && stray.is_empty() {
        Ok(())
    } else {
        Err(Violation { n, portion, overlap: overlap.into_iter().collect(), gaps, stray })
    }
}

/// Checks every stored `(portion, n)` pair with `n` past the portion's end.
pub fn verify_tiling(scheme: &TilingScheme) -> Result<(), Violation> {
    let total = scheme.folner.len();
    for n in 1..=total {
        for i in 0..scheme.folner.portion_count() {
            let end = scheme.folner.boundaries()[i + 1];
            if n <= end || !scheme.has_data(n, i) {
                continue;
            }
            let target = scheme.folner.set(n).unwrap();
            check_partition(target, &scheme.translates(n, i), n, i)?;
        }
    }
    Ok(())
}

/// `F_n = ⊔_k ⊔_{c ∈ C_{k,n}} F_k c` over the tiles of one portion.
pub fn tile_decompose(scheme: &TilingScheme, n: usize, portion: usize) -> Result<Vec<Tile>, TilingError> {
    let end = *scheme
        .folner
        .boundaries()
        .get(portion + 1)
        .ok_or(TilingError::NoData { n, portion })?;
    if n <= end {
        return Err(TilingError::TooSmall { n, portion, end });
    }
    let target = scheme.folner.set(n).ok_or(TilingError::NoData { n, portion })?;
    if !scheme.has_data(n, portion) {
        return Err(TilingError::NoData { n, portion });
    }
    let tiles = scheme.translates(n, portion);
    check_partition(target, &tiles, n, portion).map_err(TilingError::Violation)?;
    Ok(tiles)
}

/// Dyadic intervals `F_k = {0, …, 2^k - 1}` in ℤ, one tile per portion,
/// `C_{k,n} = 2^k·{0, …, 2^{n-k} - 1}`.
pub fn build_dyadic_tiling(depth: usize) -> Result<TilingScheme, TilingError> {
    if depth < 2 {
        return Err(TilingError::Depth { depth, min: 2 });
    }
    let ctx = GroupContext::LINE;
    let sets = (1..=depth).map(|k| FiniteSubset::interval(0, 1 << k)).collect();
    let mut centers = BTreeMap::new();
    for n in 2..=depth {
        for k in 1..n {
            let step = 1i64 << k;
            let cs = (0..(1i64 << (n - k))).map(|c| Element::Line(c * step)).collect();
            centers.insert((k, n), cs);
        }
    }
    let folner = FolnerData::new(&ctx, sets, (0..=depth).collect())?;
    Ok(TilingScheme { ctx, folner, centers })
}

/// Dyadic boxes `F_k = {0, …, 2^k - 1}²` in ℤ² with
/// `C_{k,n} = 2^k·{0, …, 2^{n-k} - 1}²`.
pub fn build_box_tiling(depth: usize) -> Result<TilingScheme, TilingError> {
    if depth < 2 {
        return Err(TilingError::Depth { depth, min: 2 });
    }
    let ctx = GroupContext::GRID;
    let sets = (1..=depth).map(|k| FiniteSubset::rect(0..1 << k, 0..1 << k)).collect();
    let mut centers = BTreeMap::new();
    for n in 2..=depth {
        for k in 1..n {
            let step = 1i64 << k;
            let m = 1i64 << (n - k);
            let mut cs = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    cs.push(Element::Grid(a * step, b * step));
                }
            }
            centers.insert((k, n), FiniteSubset::new(cs));
        }
    }
    let folner = FolnerData::new(&ctx, sets, (0..=depth).collect())?;
    Ok(TilingScheme { ctx, folner, centers })
}

/// Serializable form of a [`TilingScheme`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingDocument {
    pub family: GroupFamily,
    pub folner: Vec<FiniteSubset>,
    pub portion_boundaries: Vec<usize>,
    pub centers: Vec<CenterEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterEntry {
    pub k: usize,
    pub n: usize,
    pub centers: FiniteSubset,
}

impl From<&TilingScheme> for TilingDocument {
    fn from(s: &TilingScheme) -> Self {
        TilingDocument {
            family: s.ctx.family,
            folner: s.folner.sets().to_vec(),
            portion_boundaries: s.folner.boundaries().to_vec(),
            centers: s
                .centers
                .iter()
                .map(|(&(k, n), c)| CenterEntry { k, n, centers: c.clone() })
                .collect(),
        }
    }
}

impl TryFrom<TilingDocument> for TilingScheme {
    type Error = TilingError;

    fn try_from(doc: TilingDocument) -> Result<Self, TilingError> {
        let ctx = GroupContext::new(doc.family);
        let folner = FolnerData::new(&ctx, doc.folner, doc.portion_boundaries)?;
        let mut centers = BTreeMap::new();
        for entry in doc.centers {
            if entry.k == 0 || entry.k >= entry.n || entry.n > folner.len() {
                return Err(TilingError::Document(format!(
                    "center entry (k={}, n={}) out of range",
                    entry.k, entry.n
                )));
            }
            if let Some(bad) = entry.centers.iter().find(|g| !ctx.contains(g)) {
                return Err(TilingError::ForeignElement(*bad));
            }
            if centers.insert((entry.k, entry.n), entry.centers).is_some() {
                return Err(TilingError::Document(format!(
                    "duplicate center entry (k={}, n={})",
                    entry.k, entry.n
                )));
            }
        }
        Ok(TilingScheme { ctx, folner, centers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_depth_two() {
        let s = build_dyadic_tiling(2).unwrap();
        assert_eq!(s.folner.set(1).unwrap(), &FiniteSubset::interval(0, 2));
        assert_eq!(s.folner.set(2).unwrap(), &FiniteSubset::interval(0, 4));
        assert_eq!(s.centers[&(1, 2)], FiniteSubset::line(&[0, 2]));
        assert_eq!(verify_tiling(&s), Ok(()));
    }

    #[test]
    fn dyadic_depth_three_and_four() {
        let s = build_dyadic_tiling(3).unwrap();
        assert_eq!(s.centers[&(2, 3)], FiniteSubset::line(&[0, 4]));
        let s4 = build_dyadic_tiling(4).unwrap();
        assert_eq!(s4.centers[&(3, 4)], FiniteSubset::line(&[0, 8]));
    }

    #[test]
    fn rejects_shallow_depth() {
        assert!(matches!(build_dyadic_tiling(1), Err(TilingError::Depth { .. })));
    }

    #[test]
    fn corrupted_center_reports_overlap() {
        let mut s = build_dyadic_tiling(3).unwrap();
        s.centers.insert((2, 3), FiniteSubset::line(&[0, 3]));
        let v = verify_tiling(&s).unwrap_err();
        assert_eq!(v.n, 3);
        assert_eq!(v.overlap, FiniteSubset::line(&[3]));
        assert_eq!(v.gaps, FiniteSubset::line(&[7]));
    }

    #[test]
    fn box_tiling_verifies() {
        for depth in 2..=4 {
            assert_eq!(verify_tiling(&build_box_tiling(depth).unwrap()), Ok(()));
        }
    }

    #[test]
    fn decompose_dyadic() {
        let s = build_dyadic_tiling(4).unwrap();
        let tiles = tile_decompose(&s, 3, 1).unwrap();
        let got: Vec<_> = tiles.iter().map(|t| (t.k, t.center, t.set.clone())).collect();
        assert_eq!(
            got,
            vec![
                (2, Element::Line(0), FiniteSubset::interval(0, 4)),
                (2, Element::Line(4), FiniteSubset::interval(4, 8)),
            ]
        );
        assert_eq!(tile_decompose(&s, 4, 1).unwrap().len(), 4);
    }

    #[test]
    fn decompose_boxes_into_four() {
        let s = build_box_tiling(3).unwrap();
        let tiles = tile_decompose(&s, 3, 1).unwrap();
        assert_eq!(tiles.len(), 4);
        let mut all = FiniteSubset::empty();
        for t in &tiles {
            assert_eq!(t.set.len(), 16);
            all = all.union(&t.set);
        }
        assert_eq!(&all, s.folner.set(3).unwrap());
    }

    #[test]
    fn decompose_errors() {
        let s = build_dyadic_tiling(3).unwrap();
        assert!(matches!(tile_decompose(&s, 2, 1), Err(TilingError::TooSmall { .. })));
        assert!(matches!(tile_decompose(&s, 3, 5), Err(TilingError::NoData { .. })));
    }

    #[test]
    fn empty_center_sets_are_accepted_when_consistent() {
        // Portion {F_1, F_2}: F_3 = F_2·0 ⊔ F_2·4 with C_{1,3} = ∅.
        let ctx = GroupContext::LINE;
        let sets = vec![
            FiniteSubset::interval(0, 2),
            FiniteSubset::interval(0, 4),
            FiniteSubset::interval(0, 8),
        ];
        let folner = FolnerData::new(&ctx, sets, vec![0, 2, 3]).unwrap();
        let mut centers = BTreeMap::new();
        centers.insert((1, 3), FiniteSubset::empty());
        centers.insert((2, 3), FiniteSubset::line(&[0, 4]));
        let s = TilingScheme { ctx, folner, centers };
        assert_eq!(verify_tiling(&s), Ok(()));
        assert_eq!(tile_decompose(&s, 3, 0).unwrap().len(), 2);
    }

    #[test]
    fn folner_data_validation() {
        let ctx = GroupContext::LINE;
        let bad = FolnerData::new(&ctx, vec![FiniteSubset::interval(1, 3)], vec![0, 1]);
        assert_eq!(bad, Err(TilingError::MissingIdentity { k: 1 }));
        let bad = FolnerData::new(&ctx, vec![FiniteSubset::interval(0, 3)], vec![0, 0]);
        assert!(matches!(bad, Err(TilingError::BadBoundaries(_))));
    }

    #[test]
    fn document_roundtrip() {
        let s = build_box_tiling(3).unwrap();
        let doc = TilingDocument::from(&s);
        assert_eq!(TilingScheme::try_from(doc).unwrap(), s);
    }
}
