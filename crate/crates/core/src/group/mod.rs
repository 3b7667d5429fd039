//! Concrete countable amenable groups (ℤ and ℤ²) and their finite subsets.

mod folner;
mod tiling;

pub use folner::{folner_defect, is_tempered, ow_limit, OwError, TemperedReport};
pub use tiling::{
    build_box_tiling, build_dyadic_tiling, tile_decompose, verify_tiling, FolnerData, Tile,
    TilingDocument, TilingError, TilingScheme, Violation,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Group element of ℤ or ℤ² in explicit coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    Line(i64),
    Grid(i64, i64),
}

impl Element {
    pub fn family(&self) -> GroupFamily {
        match self {
            Element::Line(_) => GroupFamily::IntegerLine,
            Element::Grid(..) => GroupFamily::IntegerGrid2D,
        }
    }

    /// Coordinate vector (length 1 or 2).
    pub fn coords(&self) -> Vec<i64> {
        match *self {
            Element::Line(x) => vec![x],
            Element::Grid(x, y) => vec![x, y],
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Line(x) => write!(f, "{x}"),
            Element::Grid(x, y) => write!(f, "({x},{y})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupFamily {
    IntegerLine,
    IntegerGrid2D,
}

/// Minimal group contract used by the rest of the crate.
///
/// Additional groups only need to provide these four operations plus an
/// element type with a total order (used for deterministic tie-breaking).
pub trait Group {
    type Elem: Clone + Ord;

    fn identity(&self) -> Self::Elem;
    fn compose(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Self::Elem;
    /// Word length with respect to the standard generators.
    fn length(&self, a: &Self::Elem) -> u64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupContext {
    pub family: GroupFamily,
}

impl GroupContext {
    pub const LINE: GroupContext = GroupContext { family: GroupFamily::IntegerLine };
    pub const GRID: GroupContext = GroupContext { family: GroupFamily::IntegerGrid2D };

    pub fn new(family: GroupFamily) -> Self {
        GroupContext { family }
    }

    pub fn contains(&self, g: &Element) -> bool {
        g.family() == self.family
    }

    /// Builds an element from a coordinate slice of the right length.
    pub fn element(&self, coords: &[i64]) -> Option<Element> {
        match (self.family, coords) {
            (GroupFamily::IntegerLine, [x]) => Some(Element::Line(*x)),
            (GroupFamily::IntegerGrid2D, [x, y]) => Some(Element::Grid(*x, *y)),
            _ => None,
        }
    }

    /// All elements of word length exactly `r`, in increasing order.
    pub fn sphere(&self, r: u64) -> Vec<Element> {
        let r = r as i64;
        match self.family {
            GroupFamily::IntegerLine => {
                if r == 0 {
                    vec![Element::Line(0)]
                } else {
                    vec![Element::Line(-r), Element::Line(r)]
                }
            }
            GroupFamily::IntegerGrid2D => {
                let mut out = Vec::new();
                for x in -r..=r {
                    for y in -r..=r {
                        if x.abs().max(y.abs()) == r {
                            out.push(Element::Grid(x, y));
                        }
                    }
                }
                out
            }
        }
    }

    /// Standard generators `±e_i`, used for Følner diagnostics.
    pub fn generators(&self) -> Vec<Element> {
        match self.family {
            GroupFamily::IntegerLine => vec![Element::Line(1)],
            GroupFamily::IntegerGrid2D => vec![Element::Grid(1, 0), Element::Grid(0, 1)],
        }
    }
}

impl Group for GroupContext {
    type Elem = Element;

    fn identity(&self) -> Element {
        match self.family {
            GroupFamily::IntegerLine => Element::Line(0),
            GroupFamily::IntegerGrid2D => Element::Grid(0, 0),
        }
    }

    fn compose(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Line(x), Element::Line(y)) => Element::Line(x + y),
            (Element::Grid(x1, y1), Element::Grid(x2, y2)) => Element::Grid(x1 + x2, y1 + y2),
            _ => panic!("cannot compose {a} and {b}: different groups"),
        }
    }

    fn invert(&self, a: &Element) -> Element {
        match *a {
            Element::Line(x) => Element::Line(-x),
            Element::Grid(x, y) => Element::Grid(-x, -y),
        }
    }

    fn length(&self, a: &Element) -> u64 {
        match *a {
            Element::Line(x) => x.unsigned_abs(),
            Element::Grid(x, y) => x.unsigned_abs().max(y.unsigned_abs()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `g·F`
    Left,
    /// `F·g`
    Right,
}

/// Finite set of group elements kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Element>", into = "Vec<Element>")]
pub struct FiniteSubset {
    elements: Vec<Element>,
}

impl From<Vec<Element>> for FiniteSubset {
    fn from(v: Vec<Element>) -> Self {
        FiniteSubset::new(v)
    }
}

impl From<FiniteSubset> for Vec<Element> {
    fn from(s: FiniteSubset) -> Self {
        s.elements
    }
}

impl FromIterator<Element> for FiniteSubset {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        FiniteSubset::new(iter.into_iter().collect())
    }
}

impl FiniteSubset {
    pub fn new(mut elements: Vec<Element>) -> Self {
        elements.sort();
        elements.dedup();
        FiniteSubset { elements }
    }

    pub fn empty() -> Self {
        FiniteSubset { elements: Vec::new() }
    }

    /// `{a, a+1, …, b-1}` in ℤ.
    pub fn interval(a: i64, b: i64) -> Self {
        FiniteSubset { elements: (a..b).map(Element::Line).collect() }
    }

    /// `{a..b} × {c..d}` in ℤ².
    pub fn rect(x: std::ops::Range<i64>, y: std::ops::Range<i64>) -> Self {
        let mut v = Vec::new();
        for i in x {
            for j in y.clone() {
                v.push(Element::Grid(i, j));
            }
        }
        FiniteSubset::new(v)
    }

    pub fn line(values: &[i64]) -> Self {
        values.iter().map(|&x| Element::Line(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn position(&self, g: &Element) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        let s: BTreeSet<Element> = self.iter().chain(other.iter()).copied().collect();
        FiniteSubset { elements: s.into_iter().collect() }
    }

    pub fn intersection(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            elements: self.iter().filter(|g| other.contains(g)).copied().collect(),
        }
    }

    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            elements: self.iter().filter(|g| !other.contains(g)).copied().collect(),
        }
    }

    pub fn symmetric_difference(&self, other: &FiniteSubset) -> FiniteSubset {
        self.difference(other).union(&other.difference(self))
    }

    /// Largest word length among the elements (0 for the empty set).
    pub fn radius(&self, ctx: &GroupContext) -> u64 {
        self.iter().map(|g| ctx.length(g)).max().unwrap_or(0)
    }

    /// Element-wise inverse `F⁻¹`.
    pub fn inverse(&self, ctx: &GroupContext) -> FiniteSubset {
        self.iter().map(|g| ctx.invert(g)).collect()
    }

    /// Product set `E·F = {e·f}`.
    pub fn product(&self, ctx: &GroupContext, other: &FiniteSubset) -> FiniteSubset {
        let mut s = BTreeSet::new();
        for a in self.iter() {
            for b in other.iter() {
                s.insert(ctx.compose(a, b));
            }
        }
        FiniteSubset { elements: s.into_iter().collect() }
    }
}

impl fmt::Display for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, g) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

/// `g·F` or `F·g`. Translation is a bijection, so the cardinality is preserved.
pub fn translate(ctx: &GroupContext, set: &FiniteSubset, g: &Element, side: Side) -> FiniteSubset {
    set.iter()
        .map(|f| match side {
            Side::Left => ctx.compose(g, f),
            Side::Right => ctx.compose(f, g),
        })
        .collect()
}
