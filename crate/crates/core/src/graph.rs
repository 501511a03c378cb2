//! Signed graph storage, sign decomposition, degrees, and Laplacian variants.
//!
//! A signed graph is stored as an upper-triangular edge list; the symmetric
//! expansion is logical. The Laplacian zoo built here covers the signed
//! Laplacian `D̄ - A`, its random-walk and symmetric normalizations, the
//! Laplacian of the positive part, the signless Laplacian of the negative
//! part, and the plain combinatorial Laplacian.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// One undirected weighted edge, stored with `i < j` and `w != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub w: f64,
}

/// Sparse symmetric weighted graph with positive and negative edge weights.
///
/// Invariants: no self-loops, no explicit zeros, edges held upper-triangular
/// sorted by `(i, j)`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    node_count: usize,
    edges: Vec<Edge>,
}

impl SignedGraph {
    /// Builds a graph from `(i, j, w)` triples (0-based endpoints, any order).
    ///
    /// Triples are canonicalized to `i < j`; duplicates are summed and exact
    /// zeros dropped. Self-loops, out-of-range endpoints, and non-finite
    /// weights are rejected.
    pub fn from_edges<I>(node_count: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        if node_count == 0 {
            return Err(Error::InvalidParameter("node_count must be positive".into()));
        }
        let mut raw: Vec<Edge> = Vec::new();
        for (a, b, w) in triples {
            if a == b {
                return Err(Error::InvalidEdge {
                    i: a,
                    j: b,
                    reason: "self-loop".into(),
                });
            }
            if a as usize >= node_count || b as usize >= node_count {
                return Err(Error::InvalidEdge {
                    i: a,
                    j: b,
                    reason: format!("endpoint out of range for {node_count} nodes"),
                });
            }
            if !w.is_finite() {
                return Err(Error::InvalidEdge {
                    i: a,
                    j: b,
                    reason: "non-finite weight".into(),
                });
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            raw.push(Edge { i, j, w });
        }
        raw.sort_by_key(|e| (e.i, e.j));
        let mut edges: Vec<Edge> = Vec::with_capacity(raw.len());
        for e in raw {
            match edges.last_mut() {
                Some(last) if last.i == e.i && last.j == e.j => last.w += e.w,
                _ => edges.push(e),
            }
        }
        edges.retain(|e| e.w != 0.0);
        Ok(Self { node_count, edges })
    }

    /// Graph on `node_count` nodes with no edges.
    pub fn empty(node_count: usize) -> Self {
        Self {
            node_count,
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Upper-triangular edges, sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_all_positive(&self) -> bool {
        self.edges.iter().all(|e| e.w > 0.0)
    }

    /// Splits into nonnegative positive-part and negative-part graphs so that
    /// `pos - neg` reconstructs the original exactly.
    pub fn decompose(&self) -> (SignedGraph, SignedGraph) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for e in &self.edges {
            if e.w > 0.0 {
                pos.push(*e);
            } else {
                neg.push(Edge {
                    i: e.i,
                    j: e.j,
                    w: -e.w,
                });
            }
        }
        (
            SignedGraph {
                node_count: self.node_count,
                edges: pos,
            },
            SignedGraph {
                node_count: self.node_count,
                edges: neg,
            },
        )
    }

    /// Signed, positive, and negative degree vectors.
    pub fn degrees(&self) -> DegreeMatrices {
        let v = self.node_count;
        let mut d_plus = vec![0.0; v];
        let mut d_minus = vec![0.0; v];
        for e in &self.edges {
            if e.w > 0.0 {
                d_plus[e.i as usize] += e.w;
                d_plus[e.j as usize] += e.w;
            } else {
                d_minus[e.i as usize] += -e.w;
                d_minus[e.j as usize] += -e.w;
            }
        }
        let d_bar = d_plus
            .iter()
            .zip(&d_minus)
            .map(|(p, m)| p + m)
            .collect();
        DegreeMatrices {
            d_bar,
            d_plus,
            d_minus,
        }
    }

    /// Dense adjacency matrix (testing and small-graph paths).
    pub fn to_dense_adjacency(&self) -> DMatrix<f64> {
        let v = self.node_count;
        let mut a = DMatrix::zeros(v, v);
        for e in &self.edges {
            a[(e.i as usize, e.j as usize)] = e.w;
            a[(e.j as usize, e.i as usize)] = e.w;
        }
        a
    }
}

/// Diagonal degree matrices stored as vectors: `d_bar = d_plus + d_minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMatrices {
    pub d_bar: Vec<f64>,
    pub d_plus: Vec<f64>,
    pub d_minus: Vec<f64>,
}

/// The Laplacian variants supported by the builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LaplacianKind {
    /// `D̄ - A`, absolute-value degrees.
    Signed,
    /// `I - D̄⁻¹ A`; similar to the symmetric variant.
    SignedRandomWalk,
    /// `I - D̄^{-1/2} A D̄^{-1/2}`.
    SignedSymmetric,
    /// `D⁺ - A⁺`, Laplacian of the positive part.
    PositivePart,
    /// `D⁻ + A⁻`, signless Laplacian of the negative part.
    Signless,
    /// `D - A` with plain (signed-sum) degrees.
    UnsignedCombinatorial,
}

impl LaplacianKind {
    /// Variants requiring every node to have positive signed degree.
    pub fn is_normalized(self) -> bool {
        matches!(self, Self::SignedRandomWalk | Self::SignedSymmetric)
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, Self::SignedRandomWalk)
    }
}

/// Compressed sparse row matrix; the workhorse behind Laplacian products.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_ptr[r as usize + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = merged.iter().map(|&(_, c, _)| c).collect();
        let values = merged.iter().map(|&(_, _, v)| v).collect();
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries `(col, value)` of row `r`.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .map(move |idx| (self.col_idx[idx] as usize, self.values[idx]))
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[idx] * x[self.col_idx[idx] as usize];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[idx] as usize)] += self.values[idx];
            }
        }
        m
    }
}

/// A built Laplacian: its kind, sparse matrix, and the graph degrees.
#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    pub kind: LaplacianKind,
    matrix: CsrMatrix,
    degrees: DegreeMatrices,
}

impl LaplacianOperator {
    pub fn node_count(&self) -> usize {
        self.matrix.n()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn degrees(&self) -> &DegreeMatrices {
        &self.degrees
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }
}

/// Builds the requested Laplacian variant of `graph`.
///
/// Normalized variants fail with [`Error::IsolatedNode`] if any node has zero
/// signed degree.
pub fn build_laplacian(graph: &SignedGraph, kind: LaplacianKind) -> Result<LaplacianOperator> {
    let v = graph.node_count();
    let degrees = graph.degrees();
    if kind.is_normalized() {
        if let Some(i) = degrees.d_bar.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedNode(i as u32));
        }
    }
    let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(v + 2 * graph.edge_count());
    match kind {
        LaplacianKind::Signed => {
            for i in 0..v {
                triplets.push((i as u32, i as u32, degrees.d_bar[i]));
            }
            for e in graph.edges() {
                triplets.push((e.i, e.j, -e.w));
                triplets.push((e.j, e.i, -e.w));
            }
        }
        LaplacianKind::SignedRandomWalk => {
            for i in 0..v {
                triplets.push((i as u32, i as u32, 1.0));
            }
            for e in graph.edges() {
                triplets.push((e.i, e.j, -e.w / degrees.d_bar[e.i as usize]));
                triplets.push((e.j, e.i, -e.w / degrees.d_bar[e.j as usize]));
            }
        }
        LaplacianKind::SignedSymmetric => {
            let inv_sqrt: Vec<f64> = degrees.d_bar.iter().map(|&d| 1.0 / d.sqrt()).collect();
            for i in 0..v {
                triplets.push((i as u32, i as u32, 1.0));
            }
            for e in graph.edges() {
                let w = -e.w * inv_sqrt[e.i as usize] * inv_sqrt[e.j as usize];
                triplets.push((e.i, e.j, w));
                triplets.push((e.j, e.i, w));
            }
        }
        LaplacianKind::PositivePart => {
            for i in 0..v {
                triplets.push((i as u32, i as u32, degrees.d_plus[i]));
            }
            for e in graph.edges() {
                if e.w > 0.0 {
                    triplets.push((e.i, e.j, -e.w));
                    triplets.push((e.j, e.i, -e.w));
                }
            }
        }
        LaplacianKind::Signless => {
            for i in 0..v {
                triplets.push((i as u32, i as u32, degrees.d_minus[i]));
            }
            for e in graph.edges() {
                if e.w < 0.0 {
                    triplets.push((e.i, e.j, -e.w));
                    triplets.push((e.j, e.i, -e.w));
                }
            }
        }
        LaplacianKind::UnsignedCombinatorial => {
            let plain: Vec<f64> = degrees
                .d_plus
                .iter()
                .zip(&degrees.d_minus)
                .map(|(p, m)| p - m)
                .collect();
            for i in 0..v {
                triplets.push((i as u32, i as u32, plain[i]));
            }
            for e in graph.edges() {
                triplets.push((e.i, e.j, -e.w));
                triplets.push((e.j, e.i, -e.w));
            }
        }
    }
    Ok(LaplacianOperator {
        kind,
        matrix: CsrMatrix::from_triplets(v, triplets),
        degrees,
    })
}

/// Evaluates `xᵀ M x` for the operator's matrix.
pub fn quadratic_form(op: &LaplacianOperator, x: &[f64]) -> f64 {
    assert_eq!(x.len(), op.node_count(), "vector length must match node count");
    let mut y = vec![0.0; x.len()];
    op.matvec(x, &mut y);
    x.iter().zip(&y).map(|(a, b)| a * b).sum()
}

/// Multi-well clustering energy of a ±1-representation assignment matrix.
///
/// `u_pm` is V×K with rows in `[-1, 1]^K`; the Dirichlet term is
/// `(eps/8)·⟨U, L U⟩` and the well term vanishes exactly on rows that sit at
/// a vertex of the ± simplex.
pub fn signed_gl_energy(op: &LaplacianOperator, u_pm: &DMatrix<f64>, eps: f64) -> f64 {
    let v = op.node_count();
    let k = u_pm.ncols();
    assert_eq!(u_pm.nrows(), v, "row count must match node count");
    assert!(eps > 0.0, "eps must be positive");

    let mut dirichlet = 0.0;
    let mut col = vec![0.0; v];
    for c in 0..k {
        for r in 0..v {
            col[r] = u_pm[(r, c)];
        }
        dirichlet += quadratic_form(op, &col);
    }

    let mut well = 0.0;
    for i in 0..v {
        let mut prod = 1.0;
        for vertex in 0..k {
            // ‖u_i - e±_vertex‖₁ with e±_vertex = +1 at `vertex`, -1 elsewhere.
            let mut l1 = 0.0;
            for c in 0..k {
                let target = if c == vertex { 1.0 } else { -1.0 };
                l1 += (u_pm[(i, c)] - target).abs();
            }
            prod *= l1 * l1 / 16.0;
            if prod == 0.0 {
                break;
            }
        }
        well += prod;
    }

    eps / 8.0 * dirichlet + well / (2.0 * eps)
}
