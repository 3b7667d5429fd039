//! Exhaustive searches over grid covers.
//!
//! Shrinking the elements of a cover never raises its order, never breaks
//! separation and keeps it finer than any cover it refined. Every cover in
//! the search class therefore shrinks to a partition of the cells with no
//! larger order, and it suffices to enumerate cell partitions (as restricted
//! growth strings). Partial assignments are pruned as soon as their order or
//! a separation failure is visible, since both only get worse as cells are
//! added.

use super::{separation_violation, Grid, GridCover, ProductSpec};
use std::sync::Arc;

enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    OutOfBudget,
}

struct Partition<'a> {
    grid: &'a Grid,
    max_blocks: usize,
    /// Largest allowed order.
    t: usize,
    separating: bool,
    /// Per cell: mask of coarse elements containing it.
    allowed: Option<&'a [u64]>,
    nodes: u64,
    limit: u64,
    labels: Vec<usize>,
    blocks: usize,
    at: Vec<u64>,
    faces: Vec<Vec<u64>>,
    fits: Vec<u64>,
}

impl<'a> Partition<'a> {
    fn new(grid: &'a Grid, max_blocks: usize, t: usize, limit: u64) -> Self {
        let n = grid.spec().factors();
        Partition {
            grid,
            max_blocks: max_blocks.min(64),
            t,
            separating: false,
            allowed: None,
            nodes: 0,
            limit,
            labels: vec![0; grid.cell_count()],
            blocks: 0,
            at: vec![0; grid.vertex_count()],
            faces: vec![vec![0; n]; max_blocks.min(64)],
            fits: vec![0; max_blocks.min(64)],
        }
    }

    fn violated_at(&self, v: usize) -> bool {
        let blocks: Vec<usize> = (0..self.blocks).filter(|&b| self.at[v] >> b & 1 == 1).collect();
        self.grid.spec().ks().iter().enumerate().any(|(i, &k)| {
            let masks: Vec<u64> = blocks.iter().map(|&b| self.faces[b][i]).collect();
            separation_violation(k, self.grid.support(v, i), &masks).is_some()
        })
    }

    fn run(&mut self, c: usize) -> Outcome {
        if c == self.labels.len() {
            return Outcome::Found(self.labels.clone());
        }
        let top = (self.blocks + 1).min(self.max_blocks);
        for b in 0..top {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Outcome::OutOfBudget;
            }
            let fit = match self.allowed {
                Some(allowed) if b == self.blocks => allowed[c],
                Some(allowed) => self.fits[b] & allowed[c],
                None => u64::MAX,
            };
            if fit == 0 {
                continue;
            }
            let verts = self.grid.cell_vertices(c);
            let saved_at: Vec<u64> = verts.iter().map(|&v| self.at[v]).collect();
            let saved_faces = self.faces[b].clone();
            let saved = (self.blocks, self.fits[b]);
            if b == self.blocks {
                self.blocks += 1;
                self.faces[b].iter_mut().for_each(|m| *m = 0);
            }
            self.fits[b] = fit;
            let mut ok = true;
            for &v in verts {
                self.at[v] |= 1 << b;
                ok &= self.at[v].count_ones() as usize <= self.t + 1;
                for (i, m) in self.faces[b].iter_mut().enumerate() {
                    *m |= self.grid.zeros(v, i);
                }
            }
            if ok && self.separating {
                ok = if self.faces[b] != saved_faces || b == saved.0 {
                    !(0..self.at.len()).any(|v| self.at[v] >> b & 1 == 1 && self.violated_at(v))
                } else {
                    !verts.iter().any(|&v| self.violated_at(v))
                };
            }
            if ok {
                self.labels[c] = b;
                match self.run(c + 1) {
                    Outcome::Exhausted => {}
                    done => return done,
                }
            }
            for (&v, &m) in verts.iter().zip(&saved_at) {
                self.at[v] = m;
            }
            self.faces[b] = saved_faces;
            (self.blocks, self.fits[b]) = saved;
        }
        Outcome::Exhausted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparatingBudget {
    pub max_elements: usize,
    pub max_resolution: u32,
    /// Search nodes (cell assignments) over the whole run.
    pub max_nodes: u64,
}

impl Default for SeparatingBudget {
    fn default() -> Self {
        SeparatingBudget { max_elements: 6, max_resolution: 3, max_nodes: 20_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SeparatingResult {
    pub spec: ProductSpec,
    /// Least order of a separating cover in the class, if one was found.
    pub min_order: Option<usize>,
    pub witness: Option<GridCover>,
    pub nodes: u64,
    /// The node budget was never hit, so `min_order` is the class minimum.
    pub complete: bool,
}

impl SeparatingResult {
    /// `ord ≥ Σ (k_i - 1)`.
    pub fn dimension_bound_holds(&self) -> Option<bool> {
        self.min_order.map(|o| o >= self.spec.dimension())
    }

    /// `ord ≥ Σ k_i`.
    pub fn vertex_sum_bound_holds(&self) -> Option<bool> {
        self.min_order.map(|o| o >= self.spec.vertex_sum())
    }
}

/// Least order of a separating cover with at most `max_elements` elements,
/// over resolutions `1..=max_resolution`; the witness is the first one found
/// at the least order (smallest resolution, then lexicographic labels).
pub fn min_separating_order(spec: &ProductSpec, budget: SeparatingBudget) -> SeparatingResult {
    let grids: Vec<Arc<Grid>> =
        (1..=budget.max_resolution).map(|r| Grid::new(spec, r).expect("positive resolution")).collect();
    let mut nodes = 0;
    for t in 0..budget.max_elements {
        for grid in &grids {
            let mut p = Partition::new(grid, budget.max_elements, t, budget.max_nodes - nodes);
            p.separating = true;
            let outcome = p.run(0);
            nodes += p.nodes.min(budget.max_nodes - nodes);
            match outcome {
                Outcome::Found(labels) => {
                    let witness = GridCover::from_labels(grid.clone(), &labels).expect("partitions cover");
                    return SeparatingResult {
                        spec: spec.clone(),
                        min_order: Some(witness.order()),
                        witness: Some(witness),
                        nodes,
                        complete: true,
                    };
                }
                Outcome::OutOfBudget => {
                    return SeparatingResult { spec: spec.clone(), min_order: None, witness: None, nodes, complete: false }
                }
                Outcome::Exhausted => {}
            }
        }
    }
    SeparatingResult { spec: spec.clone(), min_order: None, witness: None, nodes, complete: true }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefinementBudget {
    /// Resolutions `r, 2r, …, max_multiple·r` are searched.
    pub max_multiple: u32,
    pub max_elements: usize,
    pub max_nodes: u64,
}

impl Default for RefinementBudget {
    fn default() -> Self {
        RefinementBudget { max_multiple: 2, max_elements: 8, max_nodes: 5_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct RefinementResult {
    pub order: usize,
    /// False when the budget ran out: `order` is then only an upper bound.
    pub exact: bool,
    pub witness: GridCover,
}

/// Least order of a cover finer than `cover` within the budget.
pub fn min_order_refinement(cover: &GridCover, budget: RefinementBudget) -> RefinementResult {
    let upper = cover.order();
    let fallback = |exact| RefinementResult { order: upper, exact, witness: cover.clone() };
    if cover.len() > 64 {
        return fallback(false);
    }
    let coarse = cover.grid();
    let mut nodes = 0;
    let mut levels = Vec::new();
    for m in 1..=budget.max_multiple {
        let fine = Grid::new(coarse.spec(), coarse.resolution() * m).expect("positive resolution");
        let allowed: Vec<u64> = (0..fine.cell_count())
            .map(|c| {
                let big = coarse.coarsen(&fine, c);
                (0..cover.len()).fold(0, |mask, e| mask | (cover.elements()[e].contains(&big) as u64) << e)
            })
            .collect();
        levels.push((fine, allowed));
    }
    for t in 0..upper {
        for (fine, allowed) in &levels {
            let mut p = Partition::new(fine, budget.max_elements, t, budget.max_nodes - nodes);
            p.allowed = Some(allowed);
            let outcome = p.run(0);
            nodes += p.nodes.min(budget.max_nodes - nodes);
            match outcome {
                Outcome::Found(labels) => {
                    let witness = GridCover::from_labels(fine.clone(), &labels).expect("partitions cover");
                    return RefinementResult { order: witness.order(), exact: true, witness };
                }
                Outcome::OutOfBudget => return fallback(false),
                Outcome::Exhausted => {}
            }
        }
    }
    fallback(true)
}

#[cfg(test)]
mod tests {
    use super::super::grid::tests::{brickwork, segment_cover};
    use super::*;
    use std::collections::BTreeSet;

    /// Literal reading of the separating definition on grid vertices: every
    /// subfamily, every choice of facet per element.
    fn separating_by_definition(c: &GridCover) -> bool {
        let grid = c.grid();
        let n = c.len();
        for (i, &k) in grid.spec().ks().iter().enumerate() {
            for fam in 1u32..(1 << n) {
                let members: Vec<usize> = (0..n).filter(|e| fam >> e & 1 == 1).collect();
                let choices: Vec<Vec<usize>> =
                    members.iter().map(|&e| (0..k).filter(|&q| c.meets_face(e, i, q)).collect()).collect();
                if choices.iter().any(|ch| ch.is_empty()) {
                    continue;
                }
                let mut idx = vec![0; members.len()];
                loop {
                    let missing: BTreeSet<usize> = idx.iter().zip(&choices).map(|(&j, ch)| ch[j]).collect();
                    if missing.len() < k {
                        // The opposite face is {x : supp x_i ⊆ missing}.
                        let hit = (0..grid.vertex_count()).any(|v| {
                            members.iter().all(|&e| c.element_vertices(e).contains(&v))
                                && (0..k).all(|q| grid.support(v, i) >> q & 1 == 0 || missing.contains(&q))
                        });
                        if hit {
                            return false;
                        }
                    }
                    let mut p = 0;
                    loop {
                        if p == idx.len() {
                            break;
                        }
                        idx[p] += 1;
                        if idx[p] < choices[p].len() {
                            break;
                        }
                        idx[p] = 0;
                        p += 1;
                    }
                    if p == idx.len() {
                        break;
                    }
                }
            }
        }
        true
    }

    /// All covers by at most `max` distinct non-empty cell sets.
    fn all_covers(grid: &Arc<Grid>, max: usize, mut f: impl FnMut(GridCover)) {
        let cells = grid.cell_count();
        let subsets: Vec<u32> = (1u32..1 << cells).collect();
        fn rec(
            start: usize,
            chosen: &mut Vec<u32>,
            subsets: &[u32],
            max: usize,
            cells: usize,
            grid: &Arc<Grid>,
            f: &mut dyn FnMut(GridCover),
        ) {
            let union = chosen.iter().fold(0, |a, b| a | b);
            if union == (1 << cells) - 1 {
                let elements = chosen.iter().map(|m| (0..cells).filter(|c| m >> c & 1 == 1).collect()).collect();
                f(GridCover::new(grid.clone(), elements).unwrap());
            }
            if chosen.len() == max {
                return;
            }
            for s in start..subsets.len() {
                chosen.push(subsets[s]);
                rec(s + 1, chosen, subsets, max, cells, grid, f);
                chosen.pop();
            }
        }
        rec(0, &mut Vec::new(), &subsets, max, cells, grid, &mut f);
    }

    fn brute_min_separating(spec: &ProductSpec, max_r: u32, max: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for r in 1..=max_r {
            let grid = Grid::new(spec, r).unwrap();
            all_covers(&grid, max, |c| {
                let sep = separating_by_definition(&c);
                assert_eq!(sep, c.is_separating().is_ok(), "{:?}", c.elements());
                if sep {
                    best = Some(best.map_or(c.order(), |b| b.min(c.order())));
                }
            });
        }
        best
    }

    #[test]
    fn separating_search_matches_brute_force() {
        for (ks, r, max) in [(vec![2], 3, 4), (vec![3], 2, 5), (vec![2, 2], 2, 4), (vec![4], 1, 2)] {
            let spec = ProductSpec::new(ks.clone()).unwrap();
            let budget = SeparatingBudget { max_elements: max, max_resolution: r, max_nodes: u64::MAX };
            let found = min_separating_order(&spec, budget);
            assert!(found.complete);
            assert_eq!(found.min_order, brute_min_separating(&spec, r, max), "{ks:?}");
        }
    }

    #[test]
    fn small_products() {
        // The triangle needs resolution 5 to get down to order 2; at
        // resolution 3 the least order is 5 and at resolution 4 it is 3.
        for (ks, r, expect) in [(vec![2], 3, 1), (vec![2, 2], 3, 2), (vec![3], 3, 5), (vec![3], 4, 3), (vec![3], 5, 2)] {
            let spec = ProductSpec::new(ks.clone()).unwrap();
            let res = min_separating_order(&spec, SeparatingBudget { max_resolution: r, ..Default::default() });
            assert!(res.complete);
            assert_eq!(res.min_order, Some(expect), "{ks:?}");
            let w = res.witness.as_ref().unwrap();
            assert_eq!(w.is_separating(), Ok(()));
            assert!(separating_by_definition(w));
            assert_eq!(w.order(), expect);
            assert!(w.len() <= 6);
            assert_eq!(res.dimension_bound_holds(), Some(true));
            assert_eq!(res.vertex_sum_bound_holds(), Some(expect >= spec.vertex_sum()));
        }
    }

    #[test]
    fn refinement_examples() {
        let g = Grid::new(&ProductSpec::new(vec![2, 2]).unwrap(), 3).unwrap();
        let r = min_order_refinement(&GridCover::trivial(g), RefinementBudget::default());
        assert_eq!((r.order, r.exact), (0, true));
        let halves = segment_cover(4, &[0..3, 1..4]);
        let r = min_order_refinement(&halves, RefinementBudget { max_multiple: 1, ..Default::default() });
        assert_eq!((r.order, r.exact), (1, true));
        let r = min_order_refinement(&brickwork(3), RefinementBudget::default());
        assert!(r.exact && r.order <= 2);
        // The refinement really refines.
        let coarse = brickwork(3);
        let fine = r.witness.grid();
        for cells in r.witness.elements() {
            assert!(coarse.elements().iter().any(|big| cells.iter().all(|&c| big.contains(&coarse.grid().coarsen(fine, c)))));
        }
    }

    #[test]
    fn refinement_matches_brute_force() {
        let cover = segment_cover(4, &[0..3, 1..4]);
        let r = min_order_refinement(&cover, RefinementBudget { max_multiple: 1, max_elements: 4, max_nodes: u64::MAX });
        let mut best = usize::MAX;
        all_covers(cover.grid(), 4, |c| {
            let finer = c.elements().iter().all(|s| cover.elements().iter().any(|big| s.is_subset(big)));
            if finer {
                best = best.min(c.order());
            }
        });
        assert_eq!(r.order, best);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let spec = ProductSpec::new(vec![2, 2]).unwrap();
        let res = min_separating_order(&spec, SeparatingBudget { max_nodes: 50, ..Default::default() });
        assert!(!res.complete && res.min_order.is_none());
        let r = min_order_refinement(&brickwork(3), RefinementBudget { max_nodes: 5, ..Default::default() });
        assert_eq!((r.order, r.exact), (2, false));
    }
}

