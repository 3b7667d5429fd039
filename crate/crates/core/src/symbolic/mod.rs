//! Subshifts of finite type over ℤ and full shifts over ℤ².
//!
//! Points are stored as [`Configuration`]s: a finite window of explicit
//! symbols on top of a periodic background. Everything here is decidable in
//! finite time for such points.

mod independence;

pub use independence::{
    assignment_from_bits, find_independence_set, realize_witness, DeltaRow, IndependenceResult, IndependenceWitness, SearchBudget,
    WitnessRecord,
};

use crate::group::{Element, FiniteSubset, Group, GroupContext, GroupFamily};
use crate::rational::{self, Q};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("alphabet needs at least two distinct symbols")]
    Alphabet,
    #[error("forbidden word {0:?} is empty or uses symbols outside the alphabet")]
    Forbidden(String),
    #[error("forbidden words are only supported over the integer line")]
    GridForbidden,
    #[error("safe symbol {0:?}: constant configuration is not admissible")]
    Safe(char),
    #[error("cylinders must fix distinct symbols of the alphabet")]
    Cylinders,
    #[error("assignment has {got} values for {want} coordinates")]
    Assignment { got: usize, want: usize },
    #[error("no admissible completion: forbidden word {word:?} at {at}")]
    Blocked { word: String, at: Element },
    #[error("search budget exhausted before any set was certified")]
    Budget,
    #[error("subshift document: {0}")]
    Document(String),
}

/// A subshift `X ⊆ A^G` given by forbidden words (ℤ) or none (full shift).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftSpec {
    alphabet: Vec<char>,
    ctx: GroupContext,
    forbidden: Vec<String>,
    safe: char,
}

/// On-disk form of a [`SubshiftSpec`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SubshiftDoc {
    pub family: GroupFamily,
    pub alphabet: String,
    #[serde(default)]
    pub forbidden: Vec<String>,
    #[serde(default)]
    pub safe: Option<char>,
}

impl SubshiftSpec {
    /// `safe` defaults to the first symbol whose constant point is admissible.
    pub fn new(
        ctx: GroupContext,
        alphabet: Vec<char>,
        forbidden: Vec<String>,
        safe: Option<char>,
    ) -> Result<Self, SymbolicError> {
        let mut alpha = alphabet.clone();
        alpha.sort_unstable();
        alpha.dedup();
        if alpha.len() < 2 || alpha.len() != alphabet.len() {
            return Err(SymbolicError::Alphabet);
        }
        for w in &forbidden {
            if w.is_empty() || w.chars().any(|c| !alphabet.contains(&c)) {
                return Err(SymbolicError::Forbidden(w.clone()));
            }
        }
        if ctx.family == GroupFamily::IntegerGrid2D && !forbidden.is_empty() {
            return Err(SymbolicError::GridForbidden);
        }
        let mut spec = SubshiftSpec { alphabet, ctx, forbidden, safe: '\0' };
        let constant_ok = |s: char| spec.periodic_ok(&[s]);
        let safe = match safe {
            Some(s) if !spec.alphabet.contains(&s) || !constant_ok(s) => return Err(SymbolicError::Safe(s)),
            Some(s) => s,
            None => *spec
                .alphabet
                .iter()
                .find(|&&s| constant_ok(s))
                .ok_or(SymbolicError::Safe(spec.alphabet[0]))?,
        };
        spec.safe = safe;
        Ok(spec)
    }

    pub fn full_shift(ctx: GroupContext, alphabet: &str) -> Result<Self, SymbolicError> {
        SubshiftSpec::new(ctx, alphabet.chars().collect(), Vec::new(), None)
    }

    /// Binary sequences with no two adjacent 1s.
    pub fn golden_mean() -> Self {
        SubshiftSpec::new(GroupContext::LINE, vec!['0', '1'], vec!["11".into()], Some('0')).expect("valid")
    }

    pub fn from_doc(doc: &SubshiftDoc) -> Result<Self, SymbolicError> {
        SubshiftSpec::new(
            GroupContext::new(doc.family),
            doc.alphabet.chars().collect(),
            doc.forbidden.clone(),
            doc.safe,
        )
    }

    pub fn to_doc(&self) -> SubshiftDoc {
        SubshiftDoc {
            family: self.ctx.family,
            alphabet: self.alphabet.iter().collect(),
            forbidden: self.forbidden.clone(),
            safe: Some(self.safe),
        }
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn forbidden(&self) -> &[String] {
        &self.forbidden
    }

    pub fn safe(&self) -> char {
        self.safe
    }

    /// Longest forbidden word (0 for a full shift).
    pub fn memory(&self) -> usize {
        self.forbidden.iter().map(|w| w.chars().count()).max().unwrap_or(0)
    }

    /// Forbidden word that is a suffix of `s`, if any.
    fn forbidden_suffix(&self, s: &[char]) -> Option<&String> {
        self.forbidden.iter().find(|w| {
            let w: Vec<char> = w.chars().collect();
            s.len() >= w.len() && s[s.len() - w.len()..] == w[..]
        })
    }

    /// Does the bi-infinite repetition of `period` avoid every forbidden word?
    fn periodic_ok(&self, period: &[char]) -> bool {
        if period.iter().any(|c| !self.alphabet.contains(c)) {
            return false;
        }
        let l = self.memory();
        let reps = l.div_ceil(period.len()) + 1;
        let long: Vec<char> = period.iter().copied().cycle().take(period.len() * reps).collect();
        (0..period.len()).all(|start| {
            self.forbidden.iter().all(|w| {
                let w: Vec<char> = w.chars().collect();
                long[start..start + w.len()] != w[..]
            })
        })
    }
}

/// A point of `A^G` that equals a periodic background outside a finite window.
///
/// The background depends on the first coordinate only:
/// `x_h = period[(h₁ - offset) mod p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    window: BTreeMap<Element, char>,
    period: Vec<char>,
    offset: i64,
}

impl Configuration {
    pub fn new(window: BTreeMap<Element, char>, period: Vec<char>, offset: i64) -> Self {
        assert!(!period.is_empty(), "background period must be non-empty");
        Configuration { window, period, offset }.canonical()
    }

    pub fn constant(symbol: char) -> Self {
        Configuration::new(BTreeMap::new(), vec![symbol], 0)
    }

    /// Drops window entries that agree with the background.
    fn canonical(mut self) -> Self {
        let bg: Vec<Element> = self
            .window
            .iter()
            .filter(|(g, s)| self.background(g) == **s)
            .map(|(g, _)| *g)
            .collect();
        for g in bg {
            self.window.remove(&g);
        }
        self
    }

    pub fn window(&self) -> &BTreeMap<Element, char> {
        &self.window
    }

    pub fn period(&self) -> &[char] {
        &self.period
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    fn background(&self, g: &Element) -> char {
        let x = g.coords()[0];
        self.period[(x - self.offset).rem_euclid(self.period.len() as i64) as usize]
    }

    /// Symbol at `g`.
    pub fn eval(&self, g: &Element) -> char {
        self.window.get(g).copied().unwrap_or_else(|| self.background(g))
    }

    /// `g·x` with `(g·x)_h = x_{h+g}`.
    pub fn shifted(&self, ctx: &GroupContext, g: &Element) -> Configuration {
        let inv = ctx.invert(g);
        let window = self.window.iter().map(|(h, s)| (ctx.compose(&inv, h), *s)).collect();
        Configuration { window, period: self.period.clone(), offset: self.offset - g.coords()[0] }
    }

    /// Largest word length of a window coordinate.
    pub fn window_radius(&self, ctx: &GroupContext) -> u64 {
        self.window.keys().map(|g| ctx.length(g)).max().unwrap_or(0)
    }

    fn same_background(&self, other: &Configuration) -> bool {
        let (p, q) = (self.period.len() as i64, other.period.len() as i64);
        let lcm = p / num_integer::gcd(p, q) * q;
        (0..lcm).all(|x| self.background(&Element::Line(x)) == other.background(&Element::Line(x)))
    }

    /// Membership in the subshift.
    pub fn admissible(&self, spec: &SubshiftSpec) -> bool {
        if self.window.keys().any(|g| g.family() != spec.ctx.family)
            || self.window.values().any(|c| !spec.alphabet.contains(c))
            || !spec.periodic_ok(&self.period)
        {
            return false;
        }
        if spec.forbidden.is_empty() || self.window.is_empty() {
            return true;
        }
        let xs: Vec<i64> = self.window.keys().map(|g| g.coords()[0]).collect();
        let (a, b) = (xs[0], xs[xs.len() - 1]);
        let l = spec.memory() as i64;
        let word: Vec<char> = (a - l + 1..=b + l - 1).map(|x| self.eval(&Element::Line(x))).collect();
        (1..=word.len()).all(|end| spec.forbidden_suffix(&word[..end]).is_none())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bg: String = self.period.iter().collect();
        write!(f, "[{bg}]^∞@{}", self.offset)?;
        for (g, s) in &self.window {
            write!(f, " {g}:{s}")?;
        }
        Ok(())
    }
}

/// Number of patterns on `F` containing no forbidden word inside `F`.
pub fn count_patterns(spec: &SubshiftSpec, f: &FiniteSubset) -> BigUint {
    if spec.forbidden.is_empty() {
        return BigUint::from(spec.alphabet.len()).pow(f.len() as u32);
    }
    let keep = spec.memory().saturating_sub(1);
    let mut states: HashMap<Vec<char>, BigUint> = HashMap::from([(Vec::new(), BigUint::one())]);
    let mut prev: Option<i64> = None;
    for g in f.iter() {
        let x = g.coords()[0];
        if prev != Some(x - 1) {
            // A gap breaks every word; only the totals matter from here.
            let total: BigUint = states.values().sum();
            states = HashMap::from([(Vec::new(), total)]);
        }
        let mut next: HashMap<Vec<char>, BigUint> = HashMap::new();
        for (state, n) in &states {
            for &c in &spec.alphabet {
                let mut s = state.clone();
                s.push(c);
                if spec.forbidden_suffix(&s).is_some() {
                    continue;
                }
                let cut = s.len().saturating_sub(keep);
                *next.entry(s[cut..].to_vec()).or_insert_with(BigUint::zero) += n;
            }
        }
        states = next;
        prev = Some(x);
    }
    states.values().sum()
}

/// A metric value that is either exact or an upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricValue {
    pub value: Q,
    pub exact: bool,
}

/// `d(x, y) = 2^{-min{|h| : x_h ≠ y_h}}`, scanned out to word length `radius`.
///
/// Without a difference inside the ball the result is exactly 0 when both
/// points provably agree everywhere, otherwise `2^{-radius}` flagged inexact.
pub fn shift_metric(ctx: &GroupContext, x: &Configuration, y: &Configuration, radius: u64) -> MetricValue {
    for r in 0..=radius {
        if ctx.sphere(r).iter().any(|h| x.eval(h) != y.eval(h)) {
            return MetricValue { value: rational::pow2(-(r as i64)), exact: true };
        }
    }
    let settled = x.window_radius(ctx) <= radius && y.window_radius(ctx) <= radius;
    if settled && x.same_background(y) {
        MetricValue { value: Q::zero(), exact: true }
    } else {
        MetricValue { value: rational::pow2(-(radius as i64)), exact: false }
    }
}

/// The cylinder `{x : x_e = symbol}` at the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub symbol: char,
}

impl Cylinder {
    pub fn new(symbol: char) -> Self {
        Cylinder { symbol }
    }

    pub fn contains(&self, ctx: &GroupContext, x: &Configuration) -> bool {
        x.eval(&ctx.identity()) == self.symbol
    }
}

/// `d(U₀, U₁)`: any two points of distinct identity cylinders differ at `e`.
pub fn cylinder_distance(u0: &Cylinder, u1: &Cylinder) -> Result<Q, SymbolicError> {
    if u0.symbol == u1.symbol {
        return Err(SymbolicError::Cylinders);
    }
    Ok(Q::one())
}
