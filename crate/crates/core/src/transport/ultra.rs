//! Cluster trees of ultrametrics and the closed form of `W` on them.

use super::{DiscreteMeasure, FiniteMetric};
use crate::rational::{self, Q};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// A non-root cluster of the dendrogram with the length of its parent edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub points: BTreeSet<usize>,
    pub weight: Q,
}

/// `None` unless `d(x, z) ≤ max(d(x, y), d(y, z))` for all triples.
///
/// With `h(C)` the diameter of `C`, each child `D` of `C` carries weight
/// `(h(C) - h(D))/2`, so `d(x, y)` is the path length between leaves.
pub fn ultrametric_clusters(metric: &FiniteMetric) -> Option<Vec<Cluster>> {
    let n = metric.len();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if metric.d(x, z) > metric.d(x, y).max(metric.d(y, z)) {
                    return None;
                }
            }
        }
    }
    let height = |c: &BTreeSet<usize>| -> Q {
        c.iter().flat_map(|&a| c.iter().map(move |&b| metric.d(a, b).clone())).max().unwrap_or_else(Q::zero)
    };
    let mut out = Vec::new();
    let mut stack: Vec<BTreeSet<usize>> = vec![(0..n).collect()];
    while let Some(c) = stack.pop() {
        if c.len() < 2 {
            continue;
        }
        let h = height(&c);
        let mut rest = c.clone();
        while let Some(&a) = rest.iter().next() {
            let child: BTreeSet<usize> = rest.iter().copied().filter(|&b| metric.d(a, b) < &h).collect();
            rest = rest.difference(&child).copied().collect();
            out.push(Cluster { weight: (&h - height(&child)) / rational::int(2), points: child.clone() });
            stack.push(child);
        }
    }
    Some(out)
}

/// `Σ_C weight(C)·|μ(C) - ν(C)|`.
pub fn ultrametric_wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, clusters: &[Cluster]) -> Q {
    clusters.iter().map(|c| &c.weight * (mu.mass_of(&c.points) - nu.mass_of(&c.points)).abs()).sum()
}
