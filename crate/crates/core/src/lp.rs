//! Dense two-phase simplex over exact rationals; Dantzig pricing with a
//! switch to Bland's anti-cycling rule on long degenerate runs.
//!
//! Sizes here are desk scale (a few hundred rows at most); rows are updated
//! only on the nonzero entries of the pivot row, which keeps transport-shaped
//! programs cheap despite big-integer arithmetic.

use crate::rational::Q;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

/// `opt cᵀx` subject to linear rows; variables are `≥ 0` unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub value: Q,
    pub x: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            Outcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(sense: Sense, n_vars: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![Q::zero(); n_vars],
            constraints: Vec::new(),
            free: vec![false; n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: Q, free: bool) -> usize {
        self.objective.push(cost);
        self.free.push(free);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Q)>, relation: Relation, rhs: Q) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Outcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    obj: Vec<Q>,
    basis: Vec<usize>,
    /// Column of each structural variable's positive and (if free) negative part.
    var_cols: Vec<(usize, Option<usize>)>,
    n_cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut var_cols = Vec::with_capacity(lp.n_vars());
        let mut n = 0;
        for &free in &lp.free {
            let pos = n;
            n += 1;
            let neg = if free {
                n += 1;
                Some(n - 1)
            } else {
                None
            };
            var_cols.push((pos, neg));
        }
        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let first_slack = n;
        let first_artificial = first_slack + n_slack;
        // Rows whose slack can start in the basis need no artificial.
        let mut needs_art = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let rel = match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            needs_art.push(rel != Relation::Le);
        }
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let n_cols = first_artificial + n_art;
        let m = lp.constraints.len();
        let mut rows = vec![vec![Q::zero(); n_cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = first_slack;
        let mut art = first_artificial;
        for (i, c) in lp.constraints.iter().enumerate() {
            let sign = if c.rhs.is_negative() { -Q::one() } else { Q::one() };
            let row = &mut rows[i];
            for (j, a) in &c.coeffs {
                let (pos, neg) = var_cols[*j];
                row[pos] += a * &sign;
                if let Some(neg) = neg {
                    row[neg] -= a * &sign;
                }
            }
            row[n_cols] = &c.rhs * &sign;
            let flipped = sign.is_negative();
            match (c.relation, flipped) {
                (Relation::Le, false) | (Relation::Ge, true) => {
                    row[slack] = Q::one();
                    basis[i] = slack;
                    slack += 1;
                }
                (Relation::Ge, false) | (Relation::Le, true) => {
                    row[slack] = -Q::one();
                    slack += 1;
                    row[art] = Q::one();
                    basis[i] = art;
                    art += 1;
                }
                (Relation::Eq, _) => {
                    row[art] = Q::one();
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            rows,
            obj: vec![Q::zero(); n_cols + 1],
            basis,
            var_cols,
            n_cols,
            first_artificial,
        }
    }

    /// Sets the reduced-cost row for column costs `cost`.
    fn price(&mut self, cost: &[Q]) {
        let mut obj: Vec<Q> = cost.to_vec();
        obj.push(Q::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    obj[j] -= cb * a;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Q::one() / &self.rows[r][c];
        if !inv.is_one() {
            for a in self.rows[r].iter_mut() {
                if !a.is_zero() {
                    *a *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Q>| {
            let factor = row[c].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Dantzig's rule until a run of degenerate pivots, then Bland's rule
    /// for the rest of the phase; `limit` excludes columns `>= limit`.
    fn iterate(&mut self, limit: usize) -> bool {
        const DEGENERATE_RUN: usize = 50;
        let mut bland = false;
        let mut stalled = 0;
        loop {
            let enter = if bland {
                (0..limit).find(|&j| self.obj[j].is_negative())
            } else {
                (0..limit).filter(|&j| self.obj[j].is_negative()).min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]))
            };
            let Some(enter) = enter else {
                return true;
            };
            let rhs = self.n_cols;
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return false,
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        stalled += 1;
                        bland |= stalled >= DEGENERATE_RUN;
                    } else {
                        stalled = 0;
                    }
                    self.pivot(r, enter)
                }
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Outcome {
        let n_cols = self.n_cols;
        if self.first_artificial < n_cols {
            let mut cost = vec![Q::zero(); n_cols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = Q::one();
            }
            self.price(&cost);
            self.iterate(n_cols);
            if !self.obj[n_cols].is_zero() {
                return Outcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis or drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    let col = (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero());
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![Q::zero(); n_cols];
        let flip = lp.sense == Sense::Maximize;
        for (j, c) in lp.objective.iter().enumerate() {
            let c = if flip { -c.clone() } else { c.clone() };
            let (pos, neg) = self.var_cols[j];
            if let Some(neg) = neg {
                cost[neg] = -c.clone();
            }
            cost[pos] = c;
        }
        self.price(&cost);
        if !self.iterate(self.first_artificial) {
            return Outcome::Unbounded;
        }
        let mut col_val = vec![Q::zero(); n_cols];
        for (i, &b) in self.basis.iter().enumerate() {
            col_val[b] = self.rows[i][n_cols].clone();
        }
        let x: Vec<Q> = self
            .var_cols
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => &col_val[pos] - &col_val[neg],
                None => col_val[pos].clone(),
            })
            .collect();
        let value = lp
            .objective
            .iter()
            .zip(&x)
            .fold(Q::zero(), |acc, (c, v)| acc + c * v);
        Outcome::Optimal(Solution { value, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn small_maximization() {
        // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, x ≤ 3 → (3, 1), value 11.
        let mut lp = LinearProgram::new(Sense::Maximize, 2);
        lp.objective = vec![int(3), int(2)];
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Le, int(4));
        lp.add_constraint(vec![(0, int(1)), (1, int(3))], Relation::Le, int(6));
        lp.add_constraint(vec![(0, int(1))], Relation::Le, int(3));
        let s = lp.solve().optimal().unwrap();
        assert_eq!(s.value, int(11));
        assert_eq!(s.x, vec![int(3), int(1)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y, x + y = 1, x ≥ 1/3 → (1, 0).
        let mut lp = LinearProgram::new(Sense::Minimize, 2);
        lp.objective = vec![int(1), int(2)];
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, frac(1, 3));
        let s = lp.solve().optimal().unwrap();
        assert_eq!(s.value, int(1));
    }

    #[test]
    fn free_variable_and_negative_rhs() {
        // min x, x ≥ -5/2 written as -x ≤ 5/2, x free.
        let mut lp = LinearProgram::new(Sense::Minimize, 1);
        lp.objective = vec![int(1)];
        lp.free[0] = true;
        lp.add_constraint(vec![(0, int(-1))], Relation::Le, frac(5, 2));
        let s = lp.solve().optimal().unwrap();
        assert_eq!(s.value, frac(-5, 2));
        let mut lp2 = LinearProgram::new(Sense::Minimize, 1);
        lp2.objective = vec![int(1)];
        lp2.add_constraint(vec![(0, int(1))], Relation::Ge, int(-3));
        assert_eq!(lp2.solve().optimal().unwrap().value, int(0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize, 1);
        lp.objective = vec![int(1)];
        lp.add_constraint(vec![(0, int(1))], Relation::Le, int(1));
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, int(2));
        assert_eq!(lp.solve(), Outcome::Infeasible);
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.objective = vec![int(1)];
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, int(0));
        assert_eq!(lp.solve(), Outcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // Duplicated equality row must not break phase one.
        let mut lp = LinearProgram::new(Sense::Minimize, 2);
        lp.objective = vec![int(2), int(1)];
        for _ in 0..2 {
            lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        }
        let s = lp.solve().optimal().unwrap();
        assert_eq!(s.value, int(1));
        assert_eq!(s.x, vec![int(0), int(1)]);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling instance; Bland's rule terminates at -1/20.
        let mut lp = LinearProgram::new(Sense::Minimize, 4);
        lp.objective = vec![frac(-3, 4), int(150), frac(-1, 50), int(6)];
        lp.add_constraint(
            vec![(0, frac(1, 4)), (1, int(-60)), (2, frac(-1, 25)), (3, int(9))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(
            vec![(0, frac(1, 2)), (1, int(-90)), (2, frac(-1, 50)), (3, int(3))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(vec![(2, int(1))], Relation::Le, int(1));
        let s = lp.solve().optimal().unwrap();
        assert_eq!(s.value, frac(-1, 20));
    }
}
