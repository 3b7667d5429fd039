use super::{translate, FiniteSubset, GroupContext, Side};
use crate::rational::Q;
use num_bigint::BigInt;
use thiserror::Error;

/// `|F Δ gF| / |F|`; zero exactly when `F` is left `g`-invariant.
pub fn folner_defect(ctx: &GroupContext, f: &FiniteSubset, g: &super::Element) -> Q {
    assert!(!f.is_empty(), "Følner defect of the empty set");
    let moved = translate(ctx, f, g, Side::Left);
    let sym = f.symmetric_difference(&moved);
    Q::new(BigInt::from(sym.len()), BigInt::from(f.len()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemperedReport {
    pub tempered: bool,
    pub worst_ratio: Q,
    /// `|⋃_{k≤n} F_k⁻¹F_{n+1}| / |F_{n+1}|` for `n = 1..len-1`.
    pub ratios: Vec<Q>,
}

/// Shulman condition on a finite prefix `F_1, …, F_L`: for each `n < L`
/// the set `⋃_{k≤n} F_k⁻¹ F_{n+1}` has at most `M·|F_{n+1}|` elements.
pub fn is_tempered(ctx: &GroupContext, prefix: &[FiniteSubset], bound: &Q) -> TemperedReport {
    assert!(prefix.len() >= 2, "temperedness needs at least two sets");
    let mut ratios = Vec::with_capacity(prefix.len() - 1);
    let mut inverses = FiniteSubset::empty();
    for n in 1..prefix.len() {
        inverses = inverses.union(&prefix[n - 1].inverse(ctx));
        let next = &prefix[n];
        let spread = inverses.product(ctx, next);
        ratios.push(Q::new(BigInt::from(spread.len()), BigInt::from(next.len())));
    }
    let worst_ratio = ratios.iter().max().cloned().expect("non-empty");
    TemperedReport { tempered: &worst_ratio <= bound, worst_ratio, ratios }
}

#[derive(Debug, Error, PartialEq)]
pub enum OwError {
    #[error("set function is negative on set #{index}")]
    Negative { index: usize },
    #[error("set #{index} is empty")]
    EmptySet { index: usize },
}

/// Values that can be divided by a set cardinality in [`ow_limit`].
pub trait Normalize: Sized {
    fn is_negative_value(&self) -> bool;
    fn per_element(self, cardinality: usize) -> Self;
}

impl Normalize for Q {
    fn is_negative_value(&self) -> bool {
        num_traits::Signed::is_negative(self)
    }
    fn per_element(self, cardinality: usize) -> Self {
        self / Q::from_integer(BigInt::from(cardinality))
    }
}

impl Normalize for f64 {
    fn is_negative_value(&self) -> bool {
        *self < 0.0
    }
    fn per_element(self, cardinality: usize) -> Self {
        self / cardinality as f64
    }
}

/// Tabulates `f(F_n)/|F_n|` along a Følner sequence.
pub fn ow_limit<V, F>(f: F, folner: &[FiniteSubset]) -> Result<Vec<V>, OwError>
where
    V: Normalize,
    F: Fn(&FiniteSubset) -> V,
{
    folner
        .iter()
        .enumerate()
        .map(|(index, set)| {
            if set.is_empty() {
                return Err(OwError::EmptySet { index });
            }
            let v = f(set);
            if v.is_negative_value() {
                return Err(OwError::Negative { index });
            }
            Ok(v.per_element(set.len()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Element, Group};
    use crate::rational::{frac, int};

    #[test]
    fn defect_of_interval() {
        let f = FiniteSubset::interval(0, 10);
        assert_eq!(folner_defect(&GroupContext::LINE, &f, &Element::Line(1)), frac(2, 10));
    }

    #[test]
    fn defect_of_identity_is_zero() {
        let ctx = GroupContext::GRID;
        let f = FiniteSubset::rect(0..3, 0..2);
        assert_eq!(folner_defect(&ctx, &f, &ctx.identity()), int(0));
    }

    #[test]
    fn defect_of_unit_square() {
        // F = {0,1}², gF = {1,2}×{0,1}; F Δ gF = {(0,0),(0,1),(2,0),(2,1)}.
        let f = FiniteSubset::rect(0..2, 0..2);
        let g = Element::Grid(1, 0);
        let moved = translate(&GroupContext::GRID, &f, &g, Side::Left);
        let sd: Vec<_> = f.symmetric_difference(&moved).elements().to_vec();
        assert_eq!(
            sd,
            vec![Element::Grid(0, 0), Element::Grid(0, 1), Element::Grid(2, 0), Element::Grid(2, 1)]
        );
        assert_eq!(folner_defect(&GroupContext::GRID, &f, &g), int(1));
    }

    #[test]
    fn tempered_intervals() {
        let prefix: Vec<_> = (1..=4).map(|n| FiniteSubset::interval(0, n)).collect();
        let r = is_tempered(&GroupContext::LINE, &prefix, &int(2));
        assert!(r.tempered);
        assert_eq!(r.worst_ratio, frac(6, 4));
        assert_eq!(r.ratios, vec![int(1), frac(4, 3), frac(3, 2)]);
    }

    #[test]
    fn tempered_single_step() {
        let prefix = vec![FiniteSubset::line(&[0]), FiniteSubset::line(&[0, 1])];
        let r = is_tempered(&GroupContext::LINE, &prefix, &int(1));
        assert!(r.tempered);
        assert_eq!(r.worst_ratio, int(1));
    }

    #[test]
    fn tempered_dyadic_by_enumeration() {
        let prefix: Vec<_> = (1..=5).map(|n| FiniteSubset::interval(0, 1 << n)).collect();
        let r = is_tempered(&GroupContext::LINE, &prefix, &int(2));
        // Independent count: ⋃_{k≤n} F_k⁻¹F_{n+1} = {-(2^n-1), …, 2^{n+1}-1}.
        for (i, ratio) in r.ratios.iter().enumerate() {
            let n = i as i64 + 1;
            let mut set = std::collections::BTreeSet::new();
            for k in 1..=n {
                for a in 0..(1i64 << k) {
                    for b in 0..(1i64 << (n + 1)) {
                        set.insert(b - a);
                    }
                }
            }
            assert_eq!(*ratio, frac(set.len() as i64, 1 << (n + 1)));
        }
        assert!(r.tempered);
    }

    #[test]
    fn ow_cardinality_is_one() {
        let seq: Vec<_> = (1..6).map(|n| FiniteSubset::interval(0, n)).collect();
        let v = ow_limit(|f: &FiniteSubset| int(f.len() as i64), &seq).unwrap();
        assert!(v.iter().all(|q| *q == int(1)));
    }

    #[test]
    fn ow_constant_decays() {
        let seq: Vec<_> = (1..6).map(|n| FiniteSubset::interval(0, n)).collect();
        let v = ow_limit(|_: &FiniteSubset| int(7), &seq).unwrap();
        assert_eq!(v[0], int(7));
        assert_eq!(v[4], frac(7, 5));
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ow_rejects_negative() {
        let seq = vec![FiniteSubset::interval(0, 2)];
        assert_eq!(ow_limit(|_: &FiniteSubset| -1.0, &seq), Err(OwError::Negative { index: 0 }));
    }
}
