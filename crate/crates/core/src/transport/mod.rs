//! Exact 1-Wasserstein distances on finite metric spaces.
//!
//! The primal transportation problem is solved by successive shortest paths
//! ([`wasserstein1`]); the Kantorovich–Rubinstein dual is solved as a separate
//! linear program ([`kr_dual`]). The two routes share no code beyond the
//! rational type, so their agreement is a genuine cross-check.

mod flow;
mod ultra;

pub use ultra::{ultrametric_clusters, ultrametric_wasserstein, Cluster};

use crate::group::Element;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::rational::{self, Q};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("distance table is not square ({rows} rows, {labels} labels)")]
    Shape { rows: usize, labels: usize },
    #[error("d({p},{q}) violates the metric axioms: {why}")]
    NotAMetric { p: usize, q: usize, why: &'static str },
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(String),
    #[error("point {0} is not in the metric space")]
    UnknownPoint(usize),
    #[error("action for g={g} has no image for point {point}")]
    MissingImage { g: Element, point: usize },
    #[error("measure support is not inside the declared set")]
    SupportOutside,
    #[error("linear program failed: {0}")]
    Lp(&'static str),
}

/// Symmetric rational distance table with zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMetric {
    labels: Vec<String>,
    table: Vec<Vec<Q>>,
}

impl FiniteMetric {
    /// Validates symmetry, positivity off the diagonal and every triangle.
    pub fn new(labels: Vec<String>, table: Vec<Vec<Q>>) -> Result<Self, TransportError> {
        let n = labels.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(TransportError::Shape { rows: table.len(), labels: n });
        }
        for p in 0..n {
            if !table[p][p].is_zero() {
                return Err(TransportError::NotAMetric { p, q: p, why: "nonzero diagonal" });
            }
            for q in 0..n {
                if table[p][q] != table[q][p] {
                    return Err(TransportError::NotAMetric { p, q, why: "asymmetric" });
                }
                if p != q && !table[p][q].is_positive() {
                    return Err(TransportError::NotAMetric { p, q, why: "distinct points at distance 0" });
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    if table[p][r] > &table[p][q] + &table[q][r] {
                        return Err(TransportError::NotAMetric { p, q: r, why: "triangle inequality" });
                    }
                }
            }
        }
        Ok(FiniteMetric { labels, table })
    }

    /// Labels `0, 1, …` for an unlabeled table.
    pub fn from_table(table: Vec<Vec<Q>>) -> Result<Self, TransportError> {
        let labels = (0..table.len()).map(|i| i.to_string()).collect();
        FiniteMetric::new(labels, table)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, p: usize, q: usize) -> &Q {
        &self.table[p][q]
    }

    pub fn diameter(&self) -> Q {
        self.table.iter().flatten().max().cloned().unwrap_or_else(Q::zero)
    }

    /// `min { d(a, b) : a ∈ A, b ∈ B }`, `None` when either side is empty.
    pub fn set_distance(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<Q> {
        a.iter()
            .flat_map(|&p| b.iter().map(move |&q| (p, q)))
            .map(|(p, q)| self.table[p][q].clone())
            .min()
    }
}

/// Finitely supported probability measure on point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteMeasure {
    weights: BTreeMap<usize, Q>,
}

impl DiscreteMeasure {
    /// Zero weights are dropped; the rest must be non-negative and sum to 1.
    pub fn new(weights: BTreeMap<usize, Q>) -> Result<Self, TransportError> {
        let mut total = Q::zero();
        let mut kept = BTreeMap::new();
        for (p, w) in weights {
            if w.is_negative() {
                return Err(TransportError::BadWeights(format!("negative weight at {p}")));
            }
            total += &w;
            if !w.is_zero() {
                kept.insert(p, w);
            }
        }
        if !total.is_one() {
            return Err(TransportError::BadWeights(rational::format(&total)));
        }
        Ok(DiscreteMeasure { weights: kept })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Q)>) -> Result<Self, TransportError> {
        let mut map: BTreeMap<usize, Q> = BTreeMap::new();
        for (p, w) in pairs {
            *map.entry(p).or_insert_with(Q::zero) += w;
        }
        DiscreteMeasure::new(map)
    }

    pub fn dirac(p: usize) -> Self {
        DiscreteMeasure { weights: BTreeMap::from([(p, Q::one())]) }
    }

    pub fn uniform(points: &[usize]) -> Self {
        let w = Q::new(1.into(), (points.len() as i64).into());
        DiscreteMeasure::from_pairs(points.iter().map(|&p| (p, w.clone()))).expect("uniform weights")
    }

    pub fn weight(&self, p: usize) -> Q {
        self.weights.get(&p).cloned().unwrap_or_else(Q::zero)
    }

    pub fn weights(&self) -> &BTreeMap<usize, Q> {
        &self.weights
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.weights.keys().copied().collect()
    }

    /// `μ(S)`.
    pub fn mass_of(&self, set: &BTreeSet<usize>) -> Q {
        self.weights
            .iter()
            .filter(|(p, _)| set.contains(p))
            .fold(Q::zero(), |acc, (_, w)| acc + w)
    }

    /// `λμ + (1-λ)ν`.
    pub fn mix(lambda: &Q, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> DiscreteMeasure {
        let rest = Q::one() - lambda;
        let pairs = mu
            .weights
            .iter()
            .map(|(p, w)| (*p, w * lambda))
            .chain(nu.weights.iter().map(|(p, w)| (*p, w * &rest)));
        DiscreteMeasure::from_pairs(pairs).expect("convex combination of probability measures")
    }

    /// Image measure under a point map.
    pub fn push_forward(&self, image: &BTreeMap<usize, usize>) -> Result<DiscreteMeasure, usize> {
        let mut pairs = Vec::with_capacity(self.weights.len());
        for (p, w) in &self.weights {
            let q = image.get(p).ok_or(*p)?;
            pairs.push((*q, w.clone()));
        }
        Ok(DiscreteMeasure::from_pairs(pairs).expect("push-forward keeps total mass"))
    }

    fn check_points(&self, metric: &FiniteMetric) -> Result<(), TransportError> {
        match self.weights.keys().find(|&&p| p >= metric.len()) {
            Some(&p) => Err(TransportError::UnknownPoint(p)),
            None => Ok(()),
        }
    }
}

/// Coupling entries `(p, q, mass)` with positive mass.
pub type TransportPlan = Vec<(usize, usize, Q)>;

/// `W(μ, ν) = min Σ d(p,q)·π(p,q)` over couplings, solved exactly.
pub fn wasserstein1(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &FiniteMetric,
) -> Result<(Q, TransportPlan), TransportError> {
    mu.check_points(metric)?;
    nu.check_points(metric)?;
    let plan = flow::min_cost_transport(mu.weights(), nu.weights(), |p, q| metric.d(p, q).clone());
    let value = plan.iter().fold(Q::zero(), |acc, (p, q, m)| acc + metric.d(*p, *q) * m);
    Ok((value, plan))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrDual {
    pub value: Q,
    /// Optimal 1-Lipschitz potential on the union of the supports.
    pub potential: BTreeMap<usize, Q>,
}

/// `max Σ f(p)(μ(p) - ν(p))` over `|f(p) - f(q)| ≤ d(p, q)`, as a linear program.
pub fn kr_dual(mu: &DiscreteMeasure, nu: &DiscreteMeasure, metric: &FiniteMetric) -> Result<KrDual, TransportError> {
    mu.check_points(metric)?;
    nu.check_points(metric)?;
    let points: Vec<usize> = support_union([mu, nu]).into_iter().collect();
    let mut lp = LinearProgram::new(Sense::Maximize, points.len());
    for (i, &p) in points.iter().enumerate() {
        lp.objective[i] = mu.weight(p) - nu.weight(p);
        lp.free[i] = true;
    }
    for (i, &p) in points.iter().enumerate() {
        for (j, &q) in points.iter().enumerate() {
            if i != j {
                lp.add_constraint(vec![(i, Q::one()), (j, -Q::one())], Relation::Le, metric.d(p, q).clone());
            }
        }
    }
    // Potentials are defined up to a constant.
    lp.add_constraint(vec![(0, Q::one())], Relation::Eq, Q::zero());
    let sol = lp.solve().optimal().ok_or(TransportError::Lp("dual program not optimal"))?;
    let potential = points.iter().copied().zip(sol.x).collect();
    Ok(KrDual { value: sol.value, potential })
}

/// `S_E = ⋃ supp(μ)`.
pub fn support_union<'a>(measures: impl IntoIterator<Item = &'a DiscreteMeasure>) -> BTreeSet<usize> {
    measures.into_iter().flat_map(|m| m.weights.keys().copied()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionEntry {
    pub g: Element,
    /// Point index ↦ index of `g·x` in `metric`.
    pub image: BTreeMap<usize, usize>,
    /// Distances between image points.
    pub metric: FiniteMetric,
}

/// The action of each `g ∈ F` on a finite point set, with image distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTable {
    entries: Vec<ActionEntry>,
}

impl ActionTable {
    pub fn new(mut entries: Vec<ActionEntry>) -> Self {
        entries.sort_by(|a, b| a.g.cmp(&b.g));
        ActionTable { entries }
    }

    pub fn entries(&self) -> &[ActionEntry] {
        &self.entries
    }

    pub fn entry(&self, g: &Element) -> Option<&ActionEntry> {
        self.entries.iter().find(|e| &e.g == g)
    }

    /// `W(gμ, gν)` for one entry.
    pub fn pushed_distance(
        &self,
        entry: &ActionEntry,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
    ) -> Result<Q, TransportError> {
        let missing = |point| TransportError::MissingImage { g: entry.g, point };
        let gmu = mu.push_forward(&entry.image).map_err(missing)?;
        let gnu = nu.push_forward(&entry.image).map_err(missing)?;
        Ok(wasserstein1(&gmu, &gnu, &entry.metric)?.0)
    }
}

/// `W_F(μ, ν) = max_{g∈F} W(gμ, gν)`; ties go to the smallest `g`.
pub fn dynamical_wasserstein(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    action: &ActionTable,
) -> Result<(Q, Element), TransportError> {
    let mut best: Option<(Q, Element)> = None;
    for entry in action.entries() {
        let w = action.pushed_distance(entry, mu, nu)?;
        if best.as_ref().map_or(true, |(b, _)| w > *b) {
            best = Some((w, entry.g));
        }
    }
    best.ok_or(TransportError::Lp("empty action table"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCheck {
    pub lhs: Q,
    pub rhs: Q,
    pub ok: bool,
}

/// Checks `W(μ, ν) ≥ μ(S∖S')·d(S∖S', S')` for `μ` on `S` and `ν` on `S'`.
pub fn separation_lower_bound_check(
    mu: &DiscreteMeasure,
    s: &BTreeSet<usize>,
    nu: &DiscreteMeasure,
    s_prime: &BTreeSet<usize>,
    metric: &FiniteMetric,
) -> Result<SeparationCheck, TransportError> {
    if !mu.support().is_subset(s) || !nu.support().is_subset(s_prime) {
        return Err(TransportError::SupportOutside);
    }
    let (lhs, _) = wasserstein1(mu, nu, metric)?;
    let only: BTreeSet<usize> = s.difference(s_prime).copied().collect();
    let rhs = match metric.set_distance(&only, s_prime) {
        Some(d) => mu.mass_of(&only) * d,
        None => Q::zero(),
    };
    Ok(SeparationCheck { ok: lhs >= rhs, lhs, rhs })
}
