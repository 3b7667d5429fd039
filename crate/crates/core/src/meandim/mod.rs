//! The mean dimension lower-bound pipeline for `M(X)` over a tiled Følner
//! sequence: independence blocks, the multi-affine simplex embedding, the
//! transport estimates on its faces and the final counting formulas.

mod instance;
mod lemmas;

pub use instance::{decompose_measure, theta_embed, xi_embed, Decomposition, InstanceOptions, LnInstance, Part};
pub use lemmas::{
    distance_to_support_lower_bound, component_check, avoidance_check, separation_probe, ComponentReport, AvoidanceOutcome,
    SeparationReport, SeparationViolation,
};

use crate::group::{Element, FiniteSubset, Group, GroupContext, Tile, TilingError, TilingScheme};
use crate::rational::{self, Q};
use crate::symbolic::{IndependenceWitness, SymbolicError};
use crate::transport::TransportError;
use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanDimError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("|J_n| = {size} exceeds the instance cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("independence set for F_{0} is not certified")]
    Uncertified(usize),
    #[error("density precondition fails: |J_n| = {j} < δ·|F_n| = {bound}")]
    Density { j: usize, bound: String },
    #[error("witness metric is not exact between points {0} and {1}")]
    Truncated(usize, usize),
    #[error("{0}")]
    Shape(String),
    #[error("parameter out of range: {0}")]
    Parameter(&'static str),
    #[error("linear program: {0}")]
    Lp(&'static str),
}

/// `J_n ∩ F_j c` for one tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub j: usize,
    pub center: Element,
    pub tile: FiniteSubset,
    pub set: FiniteSubset,
}

/// Intersects `J` with every tile; empty blocks are kept.
pub fn restrict_tiling(j: &FiniteSubset, tiles: &[Tile]) -> Vec<Block> {
    tiles
        .iter()
        .map(|t| Block { j: t.k, center: t.center, tile: t.set.clone(), set: j.intersection(&t.set) })
        .collect()
}

/// `C_j^{(n)} = {c : |J ∩ F_j c| ≥ (δ/2)|F_j|}` for every tile type present.
pub fn select_dense_tiles(blocks: &[Block], delta: &Q) -> BTreeMap<usize, FiniteSubset> {
    let mut out: BTreeMap<usize, Vec<Element>> = BTreeMap::new();
    for b in blocks {
        let entry = out.entry(b.j).or_default();
        let need = delta * rational::int(b.tile.len() as i64) / rational::int(2);
        if rational::int(b.set.len() as i64) >= need {
            entry.push(b.center);
        }
    }
    out.into_iter().map(|(j, cs)| (j, FiniteSubset::new(cs))).collect()
}

/// The index set `M` with `k_m = 2^{|J ∩ F_j c|}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexM {
    j: FiniteSubset,
    blocks: Vec<Block>,
    /// Positions in `J` of each block's elements, ascending.
    positions: Vec<Vec<usize>>,
}

impl IndexM {
    /// Fails unless the blocks partition `J`.
    pub fn new(j: FiniteSubset, blocks: Vec<Block>) -> Result<Self, MeanDimError> {
        let mut seen = FiniteSubset::empty();
        for b in &blocks {
            if !b.set.intersection(&seen).is_empty() {
                return Err(MeanDimError::Shape("blocks overlap".into()));
            }
            seen = seen.union(&b.set);
        }
        if seen != j {
            return Err(MeanDimError::Shape("blocks do not cover J".into()));
        }
        let positions = blocks
            .iter()
            .map(|b| b.set.iter().map(|g| j.position(g).expect("block inside J")).collect())
            .collect();
        Ok(IndexM { j, blocks, positions })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn j(&self) -> &FiniteSubset {
        &self.j
    }

    /// `k_m`.
    pub fn k(&self, m: usize) -> usize {
        1 << self.blocks[m].set.len()
    }

    pub fn ks(&self) -> Vec<usize> {
        (0..self.len()).map(|m| self.k(m)).collect()
    }

    /// Slots with `k_m ≥ 2`.
    pub fn nontrivial(&self) -> Vec<usize> {
        (0..self.len()).filter(|&m| self.k(m) >= 2).collect()
    }

    /// `Σ_m log₂ k_m`.
    pub fn log_sum(&self) -> usize {
        self.blocks.iter().map(|b| b.set.len()).sum()
    }

    /// `𝐢_m` of the witness with bits `w` (bit `b` is `ζ(J[b])`).
    pub fn slot(&self, m: usize, w: usize) -> usize {
        self.positions[m].iter().enumerate().fold(0, |acc, (t, &p)| acc | (w >> p & 1) << t)
    }
}

/// `γ = d(U₀,U₁)·2^{-R}`, `R` the largest word length in the portion's tiles.
///
/// For the shift metric `d(fx, fy) ≤ 2^{|f|} d(x, y)`, so `d(x, y) < γ`
/// keeps every `f`-translate closer than `d(U₀, U₁)`.
pub fn gamma_i(ctx: &GroupContext, portion_sets: &[FiniteSubset], d_u: &Q) -> Result<Q, MeanDimError> {
    let r = portion_sets.iter().flat_map(|f| f.iter()).map(|g| ctx.length(g)).max();
    let r = r.ok_or(MeanDimError::Parameter("empty portion"))?;
    Ok(d_u * rational::pow2(-(r as i64)))
}

/// `ε = (γ²/diam)·(max_j 2^{|F_j|+1})^{-1}`.
pub fn epsilon_i(gamma: &Q, diam: &Q, sizes: &[usize]) -> Result<Q, MeanDimError> {
    if !diam.is_positive() {
        return Err(MeanDimError::Parameter("diameter must be positive"));
    }
    let s = *sizes.iter().max().ok_or(MeanDimError::Parameter("no tile sizes"))?;
    Ok(gamma * gamma / diam * rational::pow2(-(s as i64 + 1)))
}

/// `⌊(δ/2)·s⌋`.
fn half_delta_floor(delta: &Q, s: usize) -> u64 {
    (delta * rational::int(s as i64) / rational::int(2)).floor().to_integer().to_u64().expect("non-negative")
}

/// `Σ_j 2^{⌊(δ/2)|F_j|⌋}·|C_j^{(n)}|` over `(|F_j|, |C_j^{(n)}|)` pairs.
pub fn dim_lower_bound(delta: &Q, rows: &[(usize, usize)]) -> BigUint {
    rows.iter().map(|&(s, c)| (BigUint::one() << half_delta_floor(delta, s)) * BigUint::from(c)).sum()
}

/// `(δ/2)·min_j 2^{⌊(δ/2)|F_j|⌋}/|F_j|`.
pub fn mdim_lower_bound(delta: &Q, sizes: &[usize]) -> Result<Q, MeanDimError> {
    let best = sizes
        .iter()
        .map(|&s| {
            if s == 0 {
                return Err(MeanDimError::Parameter("empty tile"));
            }
            let p = Q::from_integer((num_bigint::BigInt::one() << half_delta_floor(delta, s)).into());
            Ok(p / rational::int(s as i64))
        })
        .collect::<Result<Vec<Q>, _>>()?
        .into_iter()
        .min()
        .ok_or(MeanDimError::Parameter("no tile sizes"))?;
    Ok(delta / rational::int(2) * best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub lhs: usize,
    pub rhs: Q,
    pub ok: bool,
}

/// `|F_n| ≤ (2/δ)·Σ_j |F_j|·|C_j^{(n)}|`, given `|J_n| ≥ δ|F_n|`.
pub fn density_check(f_n: usize, j_n: usize, delta: &Q, rows: &[(usize, usize)]) -> Result<DensityReport, MeanDimError> {
    if !delta.is_positive() || *delta > Q::one() {
        return Err(MeanDimError::Parameter("δ must lie in (0, 1]"));
    }
    let bound = delta * rational::int(f_n as i64);
    if rational::int(j_n as i64) < bound {
        return Err(MeanDimError::Density { j: j_n, bound: rational::format(&bound) });
    }
    let sum: usize = rows.iter().map(|(s, c)| s * c).sum();
    let rhs = rational::int(2) / delta * rational::int(sum as i64);
    Ok(DensityReport { lhs: f_n, ok: rational::int(f_n as i64) <= rhs, rhs })
}

/// Per-tile-type counts in one row of a [`BoundReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileCount {
    pub j: usize,
    pub size: usize,
    /// `|C_{j,n}|`.
    pub centers: usize,
    /// `|C_j^{(n)}|`.
    pub dense: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub n: usize,
    pub f_n: usize,
    pub j_n: usize,
    pub delta_n: Q,
    pub certified: bool,
    pub tiles: Vec<TileCount>,
    pub dim_bound: BigUint,
    /// `dim_bound / |F_n|`.
    pub normalized: Q,
    pub density: bool,
}

/// The lower-bound chain for one portion along a witness run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub portion: usize,
    pub portion_sizes: Vec<usize>,
    pub delta: Q,
    pub diam: Q,
    pub gamma: Q,
    pub epsilon: Q,
    pub mdim_bound: Q,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    /// Uses the witness's declared `δ` (running minimum of `δ_n`) for every
    /// `n` beyond the portion with tiling data; `diam` is the space diameter.
    pub fn build(
        scheme: &TilingScheme,
        witness: &IndependenceWitness,
        portion: usize,
        d_u: &Q,
        diam: &Q,
    ) -> Result<Self, MeanDimError> {
        let ks = scheme.folner.portion(portion).ok_or(MeanDimError::Parameter("no such portion"))?;
        let portion_sets: Vec<FiniteSubset> = ks.clone().map(|k| scheme.folner.set(k).unwrap().clone()).collect();
        let portion_sizes: Vec<usize> = portion_sets.iter().map(|f| f.len()).collect();
        let delta = witness.declared_delta().ok_or(MeanDimError::Parameter("empty witness"))?;
        if !delta.is_positive() {
            return Err(MeanDimError::Parameter("δ must be positive"));
        }
        let gamma = gamma_i(&scheme.ctx, &portion_sets, d_u)?;
        let epsilon = epsilon_i(&gamma, diam, &portion_sizes)?;
        let mdim_bound = mdim_lower_bound(&delta, &portion_sizes)?;
        let mut rows = Vec::new();
        for rec in &witness.records {
            let Ok(tiles) = crate::group::tile_decompose(scheme, rec.n, portion) else { continue };
            let blocks = restrict_tiling(&rec.result.j, &tiles);
            let dense = select_dense_tiles(&blocks, &delta);
            let counts: Vec<TileCount> = ks
                .clone()
                .map(|j| TileCount {
                    j,
                    size: scheme.folner.set(j).unwrap().len(),
                    centers: blocks.iter().filter(|b| b.j == j).count(),
                    dense: dense.get(&j).map_or(0, |c| c.len()),
                })
                .collect();
            let pairs: Vec<(usize, usize)> = counts.iter().map(|c| (c.size, c.dense)).collect();
            let dim_bound = dim_lower_bound(&delta, &pairs);
            let normalized = Q::from_integer(dim_bound.clone().into()) / rational::int(rec.f.len() as i64);
            let density = density_check(rec.f.len(), rec.result.j.len(), &delta, &pairs)?.ok;
            rows.push(BoundRow {
                n: rec.n,
                f_n: rec.f.len(),
                j_n: rec.result.j.len(),
                delta_n: rec.result.delta.clone(),
                certified: rec.result.certified,
                tiles: counts,
                dim_bound,
                normalized,
                density,
            });
        }
        Ok(BoundReport { portion, portion_sizes, delta, diam: diam.clone(), gamma, epsilon, mdim_bound, rows })
    }
}
