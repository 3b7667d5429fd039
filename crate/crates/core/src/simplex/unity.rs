//! The map `g(x) = Σ_U φ(U) f_U(x)` attached to a grid cover.
//!
//! Elements are thickened to open neighbourhoods: in scaled coordinates
//! `w_U(x) = max(0, τ - dist_∞(y, U))` with `τ = 1/(2·max k_i)`, measuring the
//! distance to the coordinate boxes of the cells of `U`. For this `τ` a point
//! with positive weight on several elements sees a common point of their
//! closed cells on every face containing it, so the thickened cover has the
//! same order and face incidences as the cell cover.

use super::{center, on_boundary, vertex, CounterFamily, GridCover, ProductPoint};
use crate::rational::Q;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// `φ(U)`: per factor, the center if `U` meets no facet, otherwise the vertex
/// opposite the lexicographically smallest facet met (the one missing the
/// largest index).
pub fn phi_alpha(cover: &GridCover) -> Vec<ProductPoint> {
    let ks = cover.grid().spec().ks().to_vec();
    (0..cover.len())
        .map(|e| {
            let coords = ks
                .iter()
                .enumerate()
                .map(|(i, &k)| match cover.faces_met(e, i) {
                    0 => center(k),
                    mask => vertex(k, 63 - mask.leading_zeros() as usize),
                })
                .collect();
            ProductPoint::from_raw(coords)
        })
        .collect()
}

fn scaled(cover: &GridCover, x: &ProductPoint) -> Vec<Vec<Q>> {
    let r = Q::from_integer((cover.grid().resolution() as i64).into());
    x.coords().iter().map(|c| c.iter().map(|v| v * &r).collect()).collect()
}

/// Thickening radius in scaled coordinates.
pub(crate) fn tau(cover: &GridCover) -> Q {
    let k = *cover.grid().spec().ks().iter().max().expect("non-empty product");
    Q::new(1.into(), (2 * k as i64).into())
}

/// Unnormalized weights `w_U(x)`.
pub(crate) fn weights(cover: &GridCover, x: &ProductPoint) -> Vec<Q> {
    let y = scaled(cover, x);
    let tau = tau(cover);
    (0..cover.len())
        .map(|e| {
            let d = cover.elements()[e]
                .iter()
                .map(|&c| {
                    let floors = cover.grid().cell_floor(c);
                    let mut worst = Q::zero();
                    for (yi, ai) in y.iter().zip(&floors) {
                        for (v, &a) in yi.iter().zip(ai) {
                            let lo = Q::from_integer((a as i64).into());
                            let gap = if *v < lo {
                                &lo - v
                            } else if *v > &lo + Q::from_integer(1.into()) {
                                v - &lo - Q::from_integer(1.into())
                            } else {
                                Q::zero()
                            };
                            if gap > worst {
                                worst = gap;
                            }
                        }
                    }
                    worst
                })
                .min()
                .expect("elements are non-empty");
            let w = &tau - d;
            if w.is_positive() {
                w
            } else {
                Q::zero()
            }
        })
        .collect()
}

/// `g(x)`, exactly.
pub fn g_map(cover: &GridCover, x: &ProductPoint) -> ProductPoint {
    let w = weights(cover, x);
    let total: Q = w.iter().sum();
    assert!(total.is_positive(), "cover does not contain the point");
    let phi = phi_alpha(cover);
    let coords = cover
        .grid()
        .spec()
        .ks()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            (0..k)
                .map(|j| {
                    let s: Q = phi.iter().zip(&w).filter(|(_, w)| !w.is_zero()).map(|(p, w)| &p.factor(i)[j] * w).sum();
                    s / &total
                })
                .collect()
        })
        .collect();
    ProductPoint::from_raw(coords)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClaimError {
    #[error("cover is not separating: {0}")]
    NotSeparating(CounterFamily),
    #[error("sample {0} is not on the boundary")]
    Interior(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimViolation {
    pub sample: usize,
    pub x: ProductPoint,
    pub gx: ProductPoint,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimReport {
    pub checked: usize,
    pub violations: Vec<ClaimViolation>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `g(x) ∈ ∂ ∖ {x}` on boundary samples of a separating cover.
pub fn boundary_claim_check(cover: &GridCover, samples: &[ProductPoint]) -> Result<ClaimReport, ClaimError> {
    cover.is_separating().map_err(ClaimError::NotSeparating)?;
    if let Some(i) = samples.iter().position(|x| !on_boundary(x)) {
        return Err(ClaimError::Interior(i));
    }
    let mut violations = Vec::new();
    for (i, x) in samples.iter().enumerate() {
        let gx = g_map(cover, x);
        let reason = if !on_boundary(&gx) {
            Some("g(x) is interior")
        } else if gx == *x {
            Some("g(x) = x")
        } else {
            None
        };
        if let Some(reason) = reason {
            violations.push(ClaimViolation { sample: i, x: x.clone(), gx, reason });
        }
    }
    Ok(ClaimReport { checked: samples.len(), violations })
}

#[cfg(test)]
mod tests {
    use super::super::grid::tests::{brickwork, segment_cover};
    use super::super::{Grid, ProductSpec};
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    fn seg_point(t: Q) -> ProductPoint {
        ProductPoint::from_raw(vec![vec![Q::from_integer(1.into()) - &t, t]])
    }

    #[test]
    fn phi_rules() {
        let c = segment_cover(5, &[0..3, 2..5]);
        let phi = phi_alpha(&c);
        // Element 0 touches {x_1 = 0}, so it goes to e_1; element 1 to e_0.
        assert_eq!(phi[0].factor(0), &[int(0), int(1)]);
        assert_eq!(phi[1].factor(0), &[int(1), int(0)]);
        let whole = segment_cover(5, &[0..5]);
        // Meets both facets: the smallest index set {0} misses 1.
        assert_eq!(phi_alpha(&whole)[0].factor(0), &[int(0), int(1)]);
        let mid = segment_cover(5, &[0..2, 1..4, 3..5]);
        assert_eq!(phi_alpha(&mid)[1].factor(0), &[frac(1, 2), frac(1, 2)]);
    }

    #[test]
    fn g_examples() {
        let c = segment_cover(5, &[0..3, 2..5]);
        // Deep inside element 0 only.
        assert_eq!(g_map(&c, &seg_point(frac(1, 10))), seg_point(int(1)));
        let mid = segment_cover(4, &[0..2, 2..4]);
        // The shared endpoint t = 1/2 is equidistant from both elements.
        assert_eq!(g_map(&mid, &seg_point(frac(1, 2))), seg_point(frac(1, 2)));
        let x = seg_point(int(0));
        assert_eq!(g_map(&c, &x), seg_point(int(1)));
    }

    #[test]
    fn claim_on_examples() {
        let c = segment_cover(5, &[0..3, 2..5]);
        let r = boundary_claim_check(&c, &[seg_point(int(0)), seg_point(int(1))]).unwrap();
        assert!(r.passed() && r.checked == 2);
        let b = brickwork(4);
        let samples: Vec<ProductPoint> =
            (0..b.grid().vertex_count()).map(|v| b.grid().vertex_point(v)).filter(on_boundary).collect();
        let r = boundary_claim_check(&b, &samples).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        let bad = segment_cover(5, &[0..5]);
        assert!(matches!(boundary_claim_check(&bad, &[seg_point(int(0))]), Err(ClaimError::NotSeparating(_))));
        assert_eq!(boundary_claim_check(&c, &[seg_point(frac(1, 2))]), Err(ClaimError::Interior(0)));
    }

    /// Weights from the bounding boxes of cell vertices, summed naively.
    fn naive_g(cover: &GridCover, x: &ProductPoint) -> ProductPoint {
        let grid = cover.grid();
        let r = Q::from_integer((grid.resolution() as i64).into());
        let tau = tau(cover);
        let mut num: Vec<Vec<Q>> = x.coords().iter().map(|c| vec![Q::zero(); c.len()]).collect();
        let mut den = Q::zero();
        let phi = phi_alpha(cover);
        for (e, cells) in cover.elements().iter().enumerate() {
            let mut best: Option<Q> = None;
            for &c in cells {
                let coords: Vec<Vec<Vec<u32>>> = grid.cell_vertices(c).iter().map(|&v| grid.vertex_coords(v)).collect();
                let mut d = Q::zero();
                for (i, xi) in x.coords().iter().enumerate() {
                    for (j, xij) in xi.iter().enumerate() {
                        let lo = coords.iter().map(|v| v[i][j]).min().unwrap() as i64;
                        let hi = coords.iter().map(|v| v[i][j]).max().unwrap() as i64;
                        let y = xij * &r;
                        let gap = (Q::from_integer(lo.into()) - &y).max(&y - Q::from_integer(hi.into())).max(Q::zero());
                        d = d.max(gap);
                    }
                }
                best = Some(best.map_or(d.clone(), |b: Q| b.min(d)));
            }
            let w = (&tau - best.unwrap()).max(Q::zero());
            den += &w;
            for (i, p) in phi[e].coords().iter().enumerate() {
                for (j, pij) in p.iter().enumerate() {
                    num[i][j] += pij * &w;
                }
            }
        }
        ProductPoint::from_raw(num.into_iter().map(|c| c.into_iter().map(|v| v / &den).collect()).collect())
    }

    fn random_point(ks: Vec<usize>) -> impl Strategy<Value = ProductPoint> {
        let parts: Vec<_> = ks.iter().map(|&k| prop::collection::vec(0i64..6, k)).collect();
        parts.prop_filter_map("zero vector", |raw| {
            let coords: Option<Vec<Vec<Q>>> = raw
                .iter()
                .map(|v| {
                    let s: i64 = v.iter().sum();
                    (s > 0).then(|| v.iter().map(|&a| frac(a, s)).collect())
                })
                .collect();
            coords.map(ProductPoint::from_raw)
        })
    }

    proptest! {
        #[test]
        fn g_matches_naive_and_stays_in_product(x in random_point(vec![2, 2])) {
            let b = brickwork(4);
            let gx = g_map(&b, &x);
            for c in gx.coords() {
                prop_assert_eq!(c.iter().sum::<Q>(), int(1));
                prop_assert!(c.iter().all(|v| !v.is_negative()));
            }
            prop_assert_eq!(gx, naive_g(&b, &x));
        }

        #[test]
        fn claim_on_random_boundary_points(x in random_point(vec![2, 2])) {
            prop_assume!(on_boundary(&x));
            let b = brickwork(3);
            prop_assert!(boundary_claim_check(&b, &[x]).unwrap().passed());
        }

        #[test]
        fn thickening_preserves_incidences(x in random_point(vec![3, 2]), labels in prop::collection::vec(0usize..4, 27)) {
            // Active elements share a closed point on every facet through x.
            let grid = Grid::new(&ProductSpec::new(vec![3, 2]).unwrap(), 3).unwrap();
            let labels = &labels[..grid.cell_count()];
            let cover = GridCover::from_labels(grid.clone(), labels).unwrap();
            let active: Vec<usize> = weights(&cover, &x).iter().enumerate().filter(|(_, w)| w.is_positive()).map(|(e, _)| e).collect();
            prop_assert!(!active.is_empty());
            let witness = (0..grid.vertex_count()).find(|&v| {
                active.iter().all(|&e| cover.element_vertices(e).contains(&v))
                    && x.coords().iter().enumerate().all(|(i, xi)| {
                        xi.iter().enumerate().all(|(q, c)| !c.is_zero() || grid.zeros(v, i) >> q & 1 == 1)
                    })
            });
            prop_assert!(witness.is_some(), "active {:?} at {}", active, x);
        }
    }
}
