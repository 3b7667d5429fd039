//! Independence sets: coordinates where both cylinders can be prescribed freely.

use super::{Configuration, Cylinder, SubshiftSpec, SymbolicError};
use crate::group::{Element, FiniteSubset, GroupFamily};
use crate::rational::Q;
use std::collections::{BTreeMap, HashSet};

/// Bit `b` of `bits` selects the cylinder at `J[b]`.
pub fn assignment_from_bits(bits: u64, len: usize) -> Vec<u8> {
    (0..len).map(|b| ((bits >> b) & 1) as u8).collect()
}

/// A point `x` with `x_g` equal to the symbol of `U_{ζ(g)}` for every `g ∈ J`.
///
/// On the line the free coordinates of `[min J - m + 1, max J + m - 1]`
/// (`m` the longest forbidden word) are filled by a memoized depth-first
/// search that tries the safe symbol first; outside that window the point is
/// the constant safe configuration.
pub fn realize_witness(
    spec: &SubshiftSpec,
    j: &FiniteSubset,
    zeta: &[u8],
    u0: &Cylinder,
    u1: &Cylinder,
) -> Result<Configuration, SymbolicError> {
    if zeta.len() != j.len() {
        return Err(SymbolicError::Assignment { got: zeta.len(), want: j.len() });
    }
    if u0.symbol == u1.symbol || !spec.alphabet.contains(&u0.symbol) || !spec.alphabet.contains(&u1.symbol) {
        return Err(SymbolicError::Cylinders);
    }
    let fixed: BTreeMap<Element, char> = j
        .iter()
        .zip(zeta)
        .map(|(g, &z)| (*g, if z == 0 { u0.symbol } else { u1.symbol }))
        .collect();
    if spec.ctx.family == GroupFamily::IntegerGrid2D || spec.forbidden.is_empty() || fixed.is_empty() {
        return Ok(Configuration::new(fixed, vec![spec.safe], 0));
    }
    let pad = spec.memory() as i64 - 1;
    let xs: Vec<i64> = fixed.keys().map(|g| g.coords()[0]).collect();
    let (lo, hi) = (xs[0] - pad, xs[xs.len() - 1] + pad);
    let fixed_at: BTreeMap<i64, char> = fixed.iter().map(|(g, c)| (g.coords()[0], *c)).collect();
    let mut search = Fill {
        spec,
        fixed: &fixed_at,
        hi,
        keep: spec.memory() - 1,
        dead: HashSet::new(),
        blocked: None,
    };
    let start = vec![spec.safe; search.keep];
    let mut word = Vec::new();
    if search.dfs(lo, &start, &mut word) {
        let window = word.iter().enumerate().map(|(i, c)| (Element::Line(lo + i as i64), *c)).collect();
        Ok(Configuration::new(window, vec![spec.safe], 0))
    } else {
        let (_, word, at) = search.blocked.expect("a failed search records its obstruction");
        Err(SymbolicError::Blocked { word, at: Element::Line(at) })
    }
}

struct Fill<'a> {
    spec: &'a SubshiftSpec,
    fixed: &'a BTreeMap<i64, char>,
    hi: i64,
    keep: usize,
    dead: HashSet<(i64, Vec<char>)>,
    /// Furthest obstruction seen: (position, word, start of word).
    blocked: Option<(i64, String, i64)>,
}

impl Fill<'_> {
    fn note(&mut self, pos: i64, word: &str) {
        let at = pos - word.chars().count() as i64 + 1;
        if self.blocked.as_ref().map_or(true, |(p, _, _)| pos > *p) {
            self.blocked = Some((pos, word.to_string(), at));
        }
    }

    /// Appends `c` to the state, returning the new state or recording the clash.
    fn step(&mut self, pos: i64, state: &[char], c: char) -> Option<Vec<char>> {
        let mut s = state.to_vec();
        s.push(c);
        if let Some(w) = self.spec.forbidden_suffix(&s) {
            let w = w.clone();
            self.note(pos, &w);
            return None;
        }
        let cut = s.len() - self.keep;
        Some(s[cut..].to_vec())
    }

    fn dfs(&mut self, pos: i64, state: &[char], word: &mut Vec<char>) -> bool {
        if pos > self.hi {
            // The safe background continues to the right.
            let mut s = state.to_vec();
            for k in 0..self.keep {
                match self.step(pos + k as i64, &s, self.spec.safe) {
                    Some(next) => s = next,
                    None => return false,
                }
            }
            return true;
        }
        if self.dead.contains(&(pos, state.to_vec())) {
            return false;
        }
        let choices: Vec<char> = match self.fixed.get(&pos) {
            Some(&c) => vec![c],
            None => std::iter::once(self.spec.safe)
                .chain(self.spec.alphabet.iter().copied().filter(|&c| c != self.spec.safe))
                .collect(),
        };
        for c in choices {
            if let Some(next) = self.step(pos, state, c) {
                word.push(c);
                if self.dfs(pos + 1, &next, word) {
                    return true;
                }
                word.pop();
            }
        }
        self.dead.insert((pos, state.to_vec()));
        false
    }
}

/// Limits for [`find_independence_set`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum number of calls to [`realize_witness`].
    pub realize_calls: u64,
    /// Largest `2^|J|` that is certified assignment by assignment.
    pub certify_cap: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { realize_calls: 1 << 20, certify_cap: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceResult {
    pub j: FiniteSubset,
    pub delta: Q,
    pub certified: bool,
    /// Exhaustive search over subsets (so `|J|` is maximal).
    pub exhaustive: bool,
    /// One realizing point per assignment, ascending as bit-strings.
    pub certificates: Vec<Configuration>,
}

struct Searcher<'a> {
    spec: &'a SubshiftSpec,
    u0: &'a Cylinder,
    u1: &'a Cylinder,
    calls: u64,
    limit: u64,
}

impl Searcher<'_> {
    fn realize(&mut self, j: &FiniteSubset, zeta: &[u8]) -> Option<Option<Configuration>> {
        if self.calls >= self.limit {
            return None;
        }
        self.calls += 1;
        Some(realize_witness(self.spec, j, zeta, self.u0, self.u1).ok())
    }

    /// All `2^|J|` realizations, `Some(None)` if one fails, `None` out of budget.
    fn all(&mut self, j: &FiniteSubset) -> Option<Option<Vec<Configuration>>> {
        let mut out = Vec::with_capacity(1 << j.len());
        for bits in 0..(1u64 << j.len()) {
            match self.realize(j, &assignment_from_bits(bits, j.len()))? {
                Some(x) => out.push(x),
                None => return Some(None),
            }
        }
        Some(Some(out))
    }
}

/// Largest `J ⊆ F` on which every `ζ : J → {0,1}` is realized.
///
/// Subsets are searched exhaustively (by decreasing size, lexicographically)
/// when `3^|F|` realizations fit the budget. Otherwise `J` is grown greedily
/// and certified only if `2^|J|` is within the certification cap.
pub fn find_independence_set(
    spec: &SubshiftSpec,
    u0: &Cylinder,
    u1: &Cylinder,
    f: &FiniteSubset,
    budget: SearchBudget,
) -> Result<IndependenceResult, SymbolicError> {
    if u0.symbol == u1.symbol {
        return Err(SymbolicError::Cylinders);
    }
    let mut s = Searcher { spec, u0, u1, calls: 0, limit: budget.realize_calls };
    let n = f.len();
    let exhaustive = (n as u32) < 40 && 3u64.pow(n as u32) <= budget.realize_calls;
    let result = |j: FiniteSubset, certificates: Vec<Configuration>, certified, exhaustive| IndependenceResult {
        delta: if n == 0 { Q::from_integer(0.into()) } else { Q::new(j.len().into(), n.into()) },
        j,
        certified,
        exhaustive,
        certificates,
    };
    if exhaustive {
        for size in (0..=n).rev() {
            for idx in combinations(n, size) {
                let j = FiniteSubset::new(idx.iter().map(|&i| f.elements()[i]).collect());
                match s.all(&j).ok_or(SymbolicError::Budget)? {
                    Some(certs) => return Ok(result(j, certs, true, true)),
                    None => continue,
                }
            }
        }
        return Err(SymbolicError::Budget);
    }
    let mut j = FiniteSubset::empty();
    for g in f.iter() {
        let cand = j.union(&FiniteSubset::new(vec![*g]));
        let ok = if (1u64 << cand.len().min(63)) <= budget.certify_cap {
            s.all(&cand)
        } else {
            sampled(&mut s, &cand, g, budget.certify_cap)
        };
        match ok {
            Some(Some(_)) => j = cand,
            Some(None) => {}
            None => break,
        }
    }
    if (1u64 << j.len().min(63)) <= budget.certify_cap {
        s.limit = s.limit.max(s.calls + (1u64 << j.len()));
        if let Some(Some(certs)) = s.all(&j) {
            return Ok(result(j, certs, true, false));
        }
    }
    Ok(result(j, Vec::new(), false, false))
}

/// Varies `ζ` on the (at most `log2 cap`) elements of `J` nearest to `g`.
fn sampled(s: &mut Searcher<'_>, j: &FiniteSubset, g: &Element, cap: u64) -> Option<Option<Vec<Configuration>>> {
    let bits = (63 - cap.max(1).leading_zeros()) as usize;
    let mut near: Vec<usize> = (0..j.len()).collect();
    near.sort_by_key(|&i| {
        let (a, b) = (j.elements()[i].coords(), g.coords());
        a.iter().zip(&b).map(|(x, y)| (x - y).unsigned_abs()).max().unwrap_or(0)
    });
    near.truncate(bits);
    for mask in 0..(1u64 << near.len()) {
        let mut zeta = vec![0u8; j.len()];
        for (b, &i) in near.iter().enumerate() {
            zeta[i] = ((mask >> b) & 1) as u8;
        }
        if s.realize(j, &zeta)?.is_none() {
            return Some(None);
        }
    }
    Some(Some(Vec::new()))
}

/// `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for t in i + 1..k {
                    next[t] = next[t - 1] + 1;
                }
                cur = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// One Følner set of an independence witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRecord {
    pub n: usize,
    pub f: FiniteSubset,
    pub result: IndependenceResult,
}

/// Cylinders `U₀, U₁` together with per-set independence records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceWitness {
    pub u0: Cylinder,
    pub u1: Cylinder,
    pub records: Vec<WitnessRecord>,
}

/// Row of the `δ_n` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaRow {
    pub n: usize,
    pub f_size: usize,
    pub j_size: usize,
    pub delta: Q,
    pub running_min: Q,
    pub certified: bool,
}

impl IndependenceWitness {
    /// Runs [`find_independence_set`] on `F_1, F_2, …`.
    pub fn build(
        spec: &SubshiftSpec,
        u0: Cylinder,
        u1: Cylinder,
        sets: &[FiniteSubset],
        budget: SearchBudget,
    ) -> Result<Self, SymbolicError> {
        let records = sets
            .iter()
            .enumerate()
            .map(|(i, f)| {
                Ok(WitnessRecord { n: i + 1, f: f.clone(), result: find_independence_set(spec, &u0, &u1, f, budget)? })
            })
            .collect::<Result<_, SymbolicError>>()?;
        Ok(IndependenceWitness { u0, u1, records })
    }

    pub fn delta_table(&self) -> Vec<DeltaRow> {
        let mut min: Option<Q> = None;
        self.records
            .iter()
            .map(|r| {
                let d = r.result.delta.clone();
                let m = match &min {
                    Some(m) if *m <= d => m.clone(),
                    _ => d.clone(),
                };
                min = Some(m.clone());
                DeltaRow {
                    n: r.n,
                    f_size: r.f.len(),
                    j_size: r.result.j.len(),
                    delta: d,
                    running_min: m,
                    certified: r.result.certified,
                }
            })
            .collect()
    }

    /// Running minimum of `δ_n` over all records.
    pub fn declared_delta(&self) -> Option<Q> {
        self.delta_table().last().map(|r| r.running_min.clone())
    }

    /// Re-checks every stored certificate against the subshift and `ζ`.
    pub fn reverify(&self, spec: &SubshiftSpec) -> bool {
        self.records.iter().filter(|r| r.result.certified).all(|r| {
            let j = &r.result.j;
            r.result.certificates.len() == 1 << j.len()
                && r.result.certificates.iter().enumerate().all(|(bits, x)| {
                    let zeta = assignment_from_bits(bits as u64, j.len());
                    x.admissible(spec)
                        && j.iter().zip(&zeta).all(|(g, &z)| {
                            x.eval(g) == if z == 0 { self.u0.symbol } else { self.u1.symbol }
                        })
                })
        })
    }
}
