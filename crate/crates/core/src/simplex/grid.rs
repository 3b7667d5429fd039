//! The resolution-`r` cell complex of a product of simplices and covers by
//! unions of its closed cells.
//!
//! In scaled coordinates `y = r·x` a cell of `Δ_k` is `{y : ⌊y⌋ = a}` for an
//! integer vector `a` with `Σa = r - s`, `1 ≤ s ≤ k-1`; its closure has the
//! lattice vertices `a + 1_S`, `|S| = s`. Closed unions of cells meet exactly
//! when they share a lattice vertex, so order, face incidence and separation
//! are all decided on vertices.

use super::{separation_violation, FaceRef, ProductPoint, ProductSpec};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("resolution must be at least 1")]
    Resolution,
    #[error("cell {0} is not covered")]
    Uncovered(String),
    #[error("cell index {0} is out of range")]
    UnknownCell(usize),
    #[error("cover element {0} is empty")]
    EmptyElement(usize),
    #[error("cover document: {0}")]
    Document(String),
}

#[derive(Clone, Debug)]
struct FactorGrid {
    vertices: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// Floor vector and vertex indices of each cell.
    cells: Vec<(Vec<u32>, Vec<usize>)>,
    cell_index: HashMap<Vec<u32>, usize>,
}

/// Integer vectors of length `k` with entries summing to `total`.
fn compositions(k: usize, total: u32) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(k - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn subsets_of_size(k: usize, s: usize) -> Vec<u64> {
    (0u64..1 << k).filter(|m| m.count_ones() as usize == s).collect()
}

impl FactorGrid {
    fn new(k: usize, r: u32) -> Self {
        let vertices = compositions(k, r);
        let index: HashMap<Vec<u32>, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut cells = Vec::new();
        for s in 1..k.min(r as usize + 1) {
            for a in compositions(k, r - s as u32) {
                let vs = subsets_of_size(k, s)
                    .into_iter()
                    .map(|m| {
                        let v: Vec<u32> = (0..k).map(|j| a[j] + (m >> j & 1) as u32).collect();
                        index[&v]
                    })
                    .collect();
                cells.push((a, vs));
            }
        }
        let cell_index = cells.iter().enumerate().map(|(i, (a, _))| (a.clone(), i)).collect();
        FactorGrid { vertices, index, cells, cell_index }
    }
}

/// Cells and vertices of `∏ Δ_{k_i}` at resolution `r`, indexed in mixed radix.
#[derive(Clone, Debug)]
pub struct Grid {
    spec: ProductSpec,
    r: u32,
    factors: Vec<FactorGrid>,
    cell_vertices: Vec<Vec<usize>>,
    /// Per vertex and factor: bit `q` set when `y_q > 0`.
    support: Vec<Vec<u64>>,
}

impl Grid {
    pub fn new(spec: &ProductSpec, r: u32) -> Result<Arc<Self>, CoverError> {
        if r == 0 {
            return Err(CoverError::Resolution);
        }
        let factors: Vec<FactorGrid> = spec.ks().iter().map(|&k| FactorGrid::new(k, r)).collect();
        let mut grid = Grid { spec: spec.clone(), r, factors, cell_vertices: Vec::new(), support: Vec::new() };
        grid.support = (0..grid.vertex_count())
            .map(|v| {
                grid.vertex_parts(v)
                    .iter()
                    .zip(&grid.factors)
                    .map(|(&p, f)| f.vertices[p].iter().enumerate().fold(0, |m, (q, &y)| m | ((y > 0) as u64) << q))
                    .collect()
            })
            .collect();
        grid.cell_vertices = (0..grid.cell_count())
            .map(|c| {
                let parts = grid.cell_parts(c);
                let mut ids = vec![0usize];
                for (i, &p) in parts.iter().enumerate() {
                    let fv = &grid.factors[i].cells[p].1;
                    let radix = grid.factors[i].vertices.len();
                    ids = ids.iter().flat_map(|&id| fv.iter().map(move |&v| id * radix + v)).collect();
                }
                ids.sort_unstable();
                ids
            })
            .collect();
        Ok(Arc::new(grid))
    }

    pub fn spec(&self) -> &ProductSpec {
        &self.spec
    }

    pub fn resolution(&self) -> u32 {
        self.r
    }

    pub fn cell_count(&self) -> usize {
        self.factors.iter().map(|f| f.cells.len()).product()
    }

    pub fn vertex_count(&self) -> usize {
        self.factors.iter().map(|f| f.vertices.len()).product()
    }

    fn split(id: usize, radices: impl DoubleEndedIterator<Item = usize>) -> Vec<usize> {
        let mut id = id;
        let mut parts: Vec<usize> = radices
            .rev()
            .map(|n| {
                let p = id % n;
                id /= n;
                p
            })
            .collect();
        parts.reverse();
        parts
    }

    fn cell_parts(&self, c: usize) -> Vec<usize> {
        Grid::split(c, self.factors.iter().map(|f| f.cells.len()))
    }

    fn vertex_parts(&self, v: usize) -> Vec<usize> {
        Grid::split(v, self.factors.iter().map(|f| f.vertices.len()))
    }

    /// Vertex ids of the closed cell.
    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        &self.cell_vertices[c]
    }

    /// Per-factor floor vectors `a` of a cell.
    pub fn cell_floor(&self, c: usize) -> Vec<Vec<u32>> {
        self.cell_parts(c).iter().zip(&self.factors).map(|(&p, f)| f.cells[p].0.clone()).collect()
    }

    pub fn cell_id(&self, floors: &[Vec<u32>]) -> Option<usize> {
        if floors.len() != self.factors.len() {
            return None;
        }
        let mut id = 0;
        for (f, a) in self.factors.iter().zip(floors) {
            id = id * f.cells.len() + f.cell_index.get(a)?;
        }
        Some(id)
    }

    /// Per-factor scaled coordinates of a vertex.
    pub fn vertex_coords(&self, v: usize) -> Vec<Vec<u32>> {
        self.vertex_parts(v).iter().zip(&self.factors).map(|(&p, f)| f.vertices[p].clone()).collect()
    }

    pub fn vertex_id(&self, coords: &[Vec<u32>]) -> Option<usize> {
        let mut id = 0;
        for (f, y) in self.factors.iter().zip(coords) {
            id = id * f.vertices.len() + f.index.get(y)?;
        }
        Some(id)
    }

    pub fn vertex_point(&self, v: usize) -> ProductPoint {
        ProductPoint::from_scaled(&self.vertex_coords(v), self.r)
    }

    /// Bit `q` set when coordinate `q` of factor `i` is positive at `v`.
    pub fn support(&self, v: usize, i: usize) -> u64 {
        self.support[v][i]
    }

    /// Facet mask of factor `i` met at `v`.
    pub fn zeros(&self, v: usize, i: usize) -> u64 {
        !self.support[v][i] & ((1u64 << self.spec.ks()[i]) - 1)
    }

    /// Coarse cell containing a cell of an `m`-fold finer grid.
    pub fn coarsen(&self, fine: &Grid, c: usize) -> usize {
        // The barycenter a + s/k of a fine cell never sits on a grid hyperplane.
        let m = (fine.r / self.r) as u64;
        let verts = fine.cell_vertices(c);
        let n = verts.len() as u64;
        let floors: Vec<Vec<u32>> = (0..self.factors.len())
            .map(|i| {
                let k = self.spec.ks()[i];
                (0..k)
                    .map(|j| {
                        let sum: u64 = verts.iter().map(|&v| fine.vertex_coords(v)[i][j] as u64).sum();
                        (sum / (n * m)) as u32
                    })
                    .collect()
            })
            .collect();
        self.cell_id(&floors).expect("fine cell lies in a coarse cell")
    }
}

/// A finite cover of the product by unions of closed grid cells.
#[derive(Clone, Debug)]
pub struct GridCover {
    grid: Arc<Grid>,
    elements: Vec<BTreeSet<usize>>,
    vertices: Vec<BTreeSet<usize>>,
    /// Per element and factor: bit `q` set when the element meets `{x_q = 0}`.
    faces: Vec<Vec<u64>>,
}

/// A subfamily witnessing that a cover is not separating.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterFamily {
    pub factor: usize,
    /// Grid vertex in every element of the family and in the opposite face.
    pub vertex: usize,
    pub elements: Vec<usize>,
    /// The facet paired with each element.
    pub faces: Vec<FaceRef>,
}

impl CounterFamily {
    /// Re-checks the violation straight from the definition.
    pub fn verify(&self, cover: &GridCover) -> bool {
        let grid = cover.grid();
        let k = grid.spec().ks()[self.factor];
        let distinct: BTreeSet<usize> = self.elements.iter().copied().collect();
        if distinct.len() != self.elements.len() || self.faces.len() != self.elements.len() {
            return false;
        }
        let meets = self.elements.iter().zip(&self.faces).all(|(&e, f)| {
            let Some(q) = (0..k).find(|j| !f.indices().contains(j)) else { return false };
            f.factor == self.factor
                && f.size() == k - 1
                && cover.vertices[e].iter().any(|&v| grid.zeros(v, self.factor) >> q & 1 == 1)
        });
        let Some(meet) = super::face_intersection(&self.faces) else { return false };
        let Some(opp) = meet.opposite() else { return false };
        let point = grid.vertex_point(self.vertex);
        meets
            && self.elements.iter().all(|&e| cover.vertices[e].contains(&self.vertex))
            && super::is_in_face(&point, &opp)
    }
}

impl fmt::Display for CounterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "factor {} vertex {}:", self.factor, self.vertex)?;
        for (e, face) in self.elements.iter().zip(&self.faces) {
            write!(f, " U{e}~{face}")?;
        }
        Ok(())
    }
}

impl GridCover {
    pub fn new(grid: Arc<Grid>, elements: Vec<BTreeSet<usize>>) -> Result<Self, CoverError> {
        for (e, cells) in elements.iter().enumerate() {
            if cells.is_empty() {
                return Err(CoverError::EmptyElement(e));
            }
            if let Some(&c) = cells.iter().find(|&&c| c >= grid.cell_count()) {
                return Err(CoverError::UnknownCell(c));
            }
        }
        let covered: BTreeSet<usize> = elements.iter().flatten().copied().collect();
        if let Some(c) = (0..grid.cell_count()).find(|c| !covered.contains(c)) {
            return Err(CoverError::Uncovered(format!("{:?}", grid.cell_floor(c))));
        }
        let vertices: Vec<BTreeSet<usize>> = elements
            .iter()
            .map(|cells| cells.iter().flat_map(|&c| grid.cell_vertices(c).iter().copied()).collect())
            .collect();
        let faces = vertices
            .iter()
            .map(|vs| {
                (0..grid.spec().factors()).map(|i| vs.iter().fold(0, |m, &v| m | grid.zeros(v, i))).collect()
            })
            .collect();
        Ok(GridCover { grid, elements, vertices, faces })
    }

    /// The cover with one element per block of cell labels.
    pub fn from_labels(grid: Arc<Grid>, labels: &[usize]) -> Result<Self, CoverError> {
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut elements = vec![BTreeSet::new(); blocks];
        for (c, &b) in labels.iter().enumerate() {
            elements[b].insert(c);
        }
        elements.retain(|e| !e.is_empty());
        GridCover::new(grid, elements)
    }

    pub fn trivial(grid: Arc<Grid>) -> Self {
        let all = (0..grid.cell_count()).collect();
        GridCover::new(grid, vec![all]).expect("one element covers everything")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn elements(&self) -> &[BTreeSet<usize>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Grid vertices of element `e`.
    pub fn element_vertices(&self, e: usize) -> &BTreeSet<usize> {
        &self.vertices[e]
    }

    /// Facet mask of factor `i` met by element `e`.
    pub fn faces_met(&self, e: usize, i: usize) -> u64 {
        self.faces[e][i]
    }

    pub fn meets_face(&self, e: usize, i: usize, q: usize) -> bool {
        self.faces[e][i] >> q & 1 == 1
    }

    /// Elements containing vertex `v`.
    pub fn elements_at(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.vertices[e].contains(&v)).collect()
    }

    /// Largest number of elements sharing a point, minus one.
    pub fn order(&self) -> usize {
        (0..self.grid.vertex_count()).map(|v| self.elements_at(v).len()).max().unwrap_or(1) - 1
    }

    /// Incidence flags recomputed from cell floors (for consistency checks).
    pub fn recompute_faces(&self) -> Vec<Vec<u64>> {
        self.elements
            .iter()
            .map(|cells| {
                (0..self.grid.spec().factors())
                    .map(|i| {
                        cells.iter().fold(0u64, |m, &c| {
                            let a = &self.grid.cell_floor(c)[i];
                            let s = self.grid.resolution() as usize - a.iter().sum::<u32>() as usize;
                            // The cell reaches {y_q = 0} iff a_q = 0 and s < k.
                            a.iter().enumerate().fold(m, |m, (q, &x)| m | ((x == 0 && s < a.len()) as u64) << q)
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `Ok` or a re-checkable violating subfamily.
    pub fn is_separating(&self) -> Result<(), CounterFamily> {
        let ks = self.grid.spec().ks().to_vec();
        for v in 0..self.grid.vertex_count() {
            let at = self.elements_at(v);
            for (i, &k) in ks.iter().enumerate() {
                let masks: Vec<u64> = at.iter().map(|&e| self.faces[e][i]).collect();
                if let Some(pairs) = separation_violation(k, self.grid.support(v, i), &masks) {
                    return Err(CounterFamily {
                        factor: i,
                        vertex: v,
                        elements: pairs.iter().map(|&(e, _)| at[e]).collect(),
                        faces: pairs.iter().map(|&(_, q)| FaceRef::facet(i, k, q)).collect(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> CoverDoc {
        CoverDoc {
            factors: self.grid.spec().ks().to_vec(),
            resolution: self.grid.resolution(),
            elements: self.elements.iter().map(|cells| cells.iter().map(|&c| self.grid.cell_floor(c)).collect()).collect(),
        }
    }

    pub fn from_doc(doc: &CoverDoc) -> Result<Self, CoverError> {
        let spec = ProductSpec::new(doc.factors.clone()).map_err(|e| CoverError::Document(e.to_string()))?;
        let grid = Grid::new(&spec, doc.resolution)?;
        let elements = doc
            .elements
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|floors| {
                        grid.cell_id(floors).ok_or_else(|| CoverError::Document(format!("no cell with floor {floors:?}")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        GridCover::new(grid, elements)
    }
}

/// On-disk form of a [`GridCover`]: each cell is given by its floor vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub factors: Vec<usize>,
    pub resolution: u32,
    pub elements: Vec<Vec<Vec<Vec<u32>>>>,
}
