//! Cell graphs (the finite volume mesh) and vertex graphs (the finite
//! difference mesh) of the level-m Sierpinski simplex.
//!
//! Two m-cells touch exactly at the points `f_i(P_{j-1}) = f_j(P_{i-1})`
//! lifted into every sub-cell, which gives the recursive rule: level m is d
//! copies of level m-1 (copy `i` holds the words starting with `i`) plus one
//! edge `i j^{m-1} -- j i^{m-1}` for each pair `i < j`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{FvmError, Result};
use crate::simplex::{cell_count, vertex_key, Word};
use crate::sparse::CsrMatrix;

/// Adjacency of the d^m cells at level m, plus the cells carrying `V_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGraph {
    d: usize,
    m: usize,
    neighbors: Vec<Vec<usize>>,
    corner_cells: Vec<usize>,
}

/// Index of the word `i j^{k}` (1-based letters) among words of length k+1.
fn touching_index(d: usize, i: usize, j: usize, k: usize) -> usize {
    let dk = d.pow(k as u32);
    (i - 1) * dk + (j - 1) * (dk - 1) / (d - 1)
}

impl CellGraph {
    pub fn build(d: usize, m: usize) -> Result<Self> {
        if d < 2 {
            return Err(FvmError::InvalidDimension(d));
        }
        let n = cell_count(d, m)?;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for level in 1..=m {
            let copy = d.pow(level as u32 - 1);
            let prev = edges.len();
            for c in 1..d {
                for e in 0..prev {
                    let (a, b) = edges[e];
                    edges.push((a + c * copy, b + c * copy));
                }
            }
            for i in 1..=d {
                for j in i + 1..=d {
                    edges.push((touching_index(d, i, j, level - 1), touching_index(d, j, i, level - 1)));
                }
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for (a, b) in edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        neighbors.iter_mut().for_each(|nb| nb.sort_unstable());
        Ok(Self { d, m, neighbors, corner_cells: corner_cells(d, m) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn n_cells(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, cell: usize) -> &[usize] {
        &self.neighbors[cell]
    }

    pub fn degree(&self, cell: usize) -> usize {
        self.neighbors[cell].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// Cell holding the outer corner `P_i`, for i = 0..d.
    pub fn corner_cells(&self) -> &[usize] {
        &self.corner_cells
    }

    /// How many outer corners lie in `cell`.
    pub fn corner_incidence(&self, cell: usize) -> usize {
        self.corner_cells.iter().filter(|&&c| c == cell).count()
    }
}

/// `index(i^m)` for i = 1..d. At m = 0 every corner sits in cell 0.
pub fn corner_cells(d: usize, m: usize) -> Vec<usize> {
    let span = if m == 0 { 0 } else { (d.pow(m as u32) - 1) / (d - 1) };
    (0..d).map(|i| i * span).collect()
}

/// Treatment of the outer boundary `V_0` in the cell Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMode {
    /// Pure graph Laplacian; no flux through `V_0`.
    NeumannCells,
    /// Zero ghost value at each outer corner. The boundary flux
    /// `d (0 - u_J)` is not halved by a matching neighbour, so in units of
    /// the `d/2`-scaled Laplacian it adds `increment` (default 2) to the
    /// corner cell's diagonal.
    DirichletGhost { increment: f64 },
}

impl BoundaryMode {
    pub const DEFAULT_GHOST_INCREMENT: f64 = 2.0;

    pub fn dirichlet() -> Self {
        BoundaryMode::DirichletGhost { increment: Self::DEFAULT_GHOST_INCREMENT }
    }

    pub fn ghost_increment(&self) -> f64 {
        match self {
            BoundaryMode::NeumannCells => 0.0,
            BoundaryMode::DirichletGhost { increment } => *increment,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryMode::NeumannCells => "neumann-cells",
            BoundaryMode::DirichletGhost { .. } => "dirichlet-ghost",
        }
    }
}

impl Default for BoundaryMode {
    fn default() -> Self {
        Self::dirichlet()
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryMode {
    type Err = FvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann-cells" | "neumann" => Ok(BoundaryMode::NeumannCells),
            "dirichlet-ghost" | "dirichlet" => Ok(BoundaryMode::dirichlet()),
            other => Err(FvmError::Config(format!(
                "unknown boundary mode '{other}' (expected neumann-cells or dirichlet-ghost)"
            ))),
        }
    }
}

/// Combinatorial Laplacian `D - Adj` of a [`CellGraph`], with optional
/// ghost increments on the corner cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLaplacian {
    d: usize,
    m: usize,
    boundary: BoundaryMode,
    matrix: CsrMatrix<f64>,
}

impl CellLaplacian {
    pub fn build(graph: &CellGraph, boundary: BoundaryMode) -> Self {
        let inc = boundary.ghost_increment();
        let mut triplets = Vec::new();
        for cell in 0..graph.n_cells() {
            let ghost = inc * graph.corner_incidence(cell) as f64;
            triplets.push((cell, cell, graph.degree(cell) as f64 + ghost));
            triplets.extend(graph.neighbors(cell).iter().map(|&nb| (cell, nb, -1.0)));
        }
        Self {
            d: graph.d(),
            m: graph.level(),
            boundary,
            matrix: CsrMatrix::from_triplets(graph.n_cells(), triplets),
        }
    }

    pub fn for_level(d: usize, m: usize, boundary: BoundaryMode) -> Result<Self> {
        Ok(Self::build(&CellGraph::build(d, m)?, boundary))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }
}

/// Which vertex-graph construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexVariant {
    /// Block-diagonal copies joined by an edge between touching corners;
    /// dimension `d^{m+1}`.
    Fused,
    /// Touching corners identified; dimension `(d^{m+1} + d) / 2`.
    Merged,
}

impl FromStr for VertexVariant {
    type Err = FvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fused" => Ok(VertexVariant::Fused),
            "merged" => Ok(VertexVariant::Merged),
            other => Err(FvmError::Config(format!("unknown vertex variant '{other}'"))),
        }
    }
}

/// Integer Laplacian of the level-m vertex graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexGraph {
    pub d: usize,
    pub m: usize,
    pub variant: VertexVariant,
    pub laplacian: CsrMatrix<i64>,
    /// Zero-based rows of the outer corners `P_0..P_{d-1}`.
    pub corner_labels: Vec<usize>,
    /// Rows of the d corners of every m-cell (merged variant only).
    pub cell_corners: Vec<Vec<usize>>,
}

impl VertexGraph {
    pub fn n_vertices(&self) -> usize {
        self.laplacian.dim()
    }

    pub fn laplacian_f64(&self) -> CsrMatrix<f64> {
        self.laplacian.map(|v| v as f64)
    }
}

/// Literal corner-label recursion: `C_k(n, m) = I_k(m) + (n-1) d^{m-1}` with
/// `I_1(m) = 1`, `I_d(m) = d^{m-1}` and, for `1 < k < d`,
/// `I_k(1) = k`, `I_k(m) = I_k(m-1) + (k-1) d^{m-2}`.
///
/// The base `I_k(1) = k` does not describe a real labelling: for d = 3,
/// m = 2 it gives `C_2(1,2) = C_3(1,2) = 3`. [`corner_label`] is the
/// consistent version used by the matrix builder.
pub fn literal_corner_label(d: usize, k: usize, n: usize, m: usize) -> u64 {
    assert!(m >= 1 && (1..=d).contains(&k) && (1..=d).contains(&n));
    let du = d as u64;
    let offset = (n as u64 - 1) * du.pow(m as u32 - 1);
    let ik = if k == 1 {
        1
    } else if k == d {
        du.pow(m as u32 - 1)
    } else {
        literal_interior_label(d, k, m)
    };
    ik + offset
}

/// `I_k(m)` of the literal recursion.
pub fn literal_interior_label(d: usize, k: usize, m: usize) -> u64 {
    let mut ik = k as u64;
    for level in 2..=m {
        ik += (k as u64 - 1) * (d as u64).pow(level as u32 - 2);
    }
    ik
}

/// 1-based label of corner k of copy n when level m is assembled from d
/// copies of `d^{m-1}` rows: same recursion as [`literal_corner_label`]
/// but started from `I_k(1) = 1`, i.e. `I_k(m) = 1 + (k-1)(d^{m-1}-1)/(d-1)`.
pub fn corner_label(d: usize, k: usize, n: usize, m: usize) -> u64 {
    assert!(m >= 1 && (1..=d).contains(&k) && (1..=d).contains(&n));
    let block = (d as u64).pow(m as u32 - 1);
    1 + (k as u64 - 1) * (block - 1) / (d as u64 - 1) + (n as u64 - 1) * block
}

/// Connection matrix columns `(C_b(a, m), C_a(b, m))` for `a < b`, ordered
/// by `b` then `a`.
pub fn connection_matrix(d: usize, m: usize) -> Vec<(u64, u64)> {
    let mut cols = Vec::with_capacity(d * (d - 1) / 2);
    for b in 2..=d {
        for a in 1..b {
            cols.push((corner_label(d, b, a, m), corner_label(d, a, b, m)));
        }
    }
    cols
}

/// Vertex-graph Laplacian at level m.
pub fn build_vertex_laplacian(d: usize, m: usize, variant: VertexVariant) -> Result<VertexGraph> {
    if d < 2 {
        return Err(FvmError::InvalidDimension(d));
    }
    match variant {
        VertexVariant::Fused => build_fused(d, m),
        VertexVariant::Merged => build_merged(d, m),
    }
}

fn complete_laplacian(d: usize) -> HashMap<(usize, usize), i64> {
    let mut a = HashMap::new();
    for i in 0..d {
        for j in 0..d {
            a.insert((i, j), if i == j { d as i64 - 1 } else { -1 });
        }
    }
    a
}

fn build_fused(d: usize, m: usize) -> Result<VertexGraph> {
    let n_final =
        d.checked_pow(m as u32 + 1).ok_or(FvmError::Overflow { what: "vertex graph size", d, m })?;
    let mut a = complete_laplacian(d);
    let mut size = d;
    for level in 1..=m {
        // B_m: d diagonal copies of A_{m-1}.
        let mut b = HashMap::with_capacity(a.len() * d + d * d);
        for copy in 0..d {
            for (&(r, c), &v) in &a {
                b.insert((r + copy * size, c + copy * size), v);
            }
        }
        // Copies have size d^level, so their corners follow the recursion
        // one level up.
        for (u, v) in connection_matrix(d, level + 1) {
            let (u, v) = (u as usize - 1, v as usize - 1);
            b.insert((u, v), -1);
            b.insert((v, u), -1);
            b.insert((u, u), d as i64);
            b.insert((v, v), d as i64);
        }
        a = b;
        size *= d;
    }
    debug_assert_eq!(size, n_final);
    let triplets = a.into_iter().map(|((r, c), v)| (r, c, v)).collect();
    let span = (n_final - 1) / (d - 1);
    Ok(VertexGraph {
        d,
        m,
        variant: VertexVariant::Fused,
        laplacian: CsrMatrix::from_triplets(n_final, triplets),
        corner_labels: (0..d).map(|k| k * span).collect(),
        cell_corners: Vec::new(),
    })
}

fn build_merged(d: usize, m: usize) -> Result<VertexGraph> {
    let n_cells = cell_count(d, m)?;
    let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut triplets = Vec::new();
    let mut degree: Vec<i64> = Vec::new();
    let mut cell_corners = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let w = Word::from_index(cell, d, m);
        let corners: Vec<usize> = (0..d)
            .map(|c| {
                let next = ids.len();
                *ids.entry(vertex_key(&w, c, d)).or_insert(next)
            })
            .collect();
        degree.resize(ids.len(), 0);
        for (i, &p) in corners.iter().enumerate() {
            for (j, &q) in corners.iter().enumerate() {
                if i != j {
                    triplets.push((p, q, -1i64));
                }
            }
            degree[p] += d as i64 - 1;
        }
        cell_corners.push(corners);
    }
    triplets.extend(degree.iter().enumerate().map(|(i, &deg)| (i, i, deg)));
    let corner_labels = (0..d).map(|c| ids[&vertex_key(&Word::repeated(c as u8 + 1, m), c, d)]).collect();
    Ok(VertexGraph {
        d,
        m,
        variant: VertexVariant::Merged,
        laplacian: CsrMatrix::from_triplets(ids.len(), triplets),
        corner_labels,
        cell_corners,
    })
}
