//! Threshold dynamics on the reduced spectral basis.
//!
//! One outer iteration: subtract the fidelity/avoidance forcing, apply the
//! resolvent `X (I + τΛ)⁻¹ Xᵀ` a fixed number of times, overwrite anchored
//! rows, then threshold each row to the vertex of its largest component.
//! The projection-then-nearest-vertex route and the plain row argmax select
//! the same vertex, so the engine thresholds by argmax; [`project_simplex`]
//! stays available as the independent oracle for that equivalence.
//!
//! All stochastic choices of a run (eigensolver start, eigenspace picks,
//! tie-breaks) draw from one seeded stream.

use crate::error::{Error, Result};
use crate::graph::{
    build_laplacian, signed_gl_energy, LaplacianKind, LaplacianOperator, SignedGraph,
};
use crate::spectral::{bottom_nonzero_eigenvector, smallest_eigenpairs, SpectralBasis};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Residual tolerance requested from the eigensolver inside [`run_mbo`].
const EIG_TOL: f64 = 1e-9;

/// Node-cluster assignment weights; rows are one-hot outside the diffusion
/// intermediate.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicMatrix {
    values: DMatrix<f64>,
}

impl CharacteristicMatrix {
    /// Builds from 1-based labels.
    pub fn from_labels(labels: &[u32], k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter("k must be at least 2".into()));
        }
        let mut values = DMatrix::zeros(labels.len(), k);
        for (i, &label) in labels.iter().enumerate() {
            if label < 1 || label as usize > k {
                return Err(Error::InvalidParameter(format!(
                    "label {label} at row {i} outside 1..={k}"
                )));
            }
            values[(i, label as usize - 1)] = 1.0;
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn cluster_count(&self) -> usize {
        self.values.ncols()
    }

    /// 1-based labels from the one-hot rows.
    pub fn labels(&self) -> Assignment {
        let labels = (0..self.values.nrows())
            .map(|i| {
                let mut best = 0usize;
                for c in 1..self.values.ncols() {
                    if self.values[(i, c)] > self.values[(i, best)] {
                        best = c;
                    }
                }
                best as u32 + 1
            })
            .collect();
        Assignment { labels }
    }
}

/// Hard cluster labels, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<u32>,
}

impl Assignment {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l < 1 || l as usize > k) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} outside 1..={k}"
            )));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }
}

/// How the time step is spread over repeated diffusion applications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DiffusionForm {
    /// Resolvent uses `d_tau / n_tau` per application.
    #[default]
    SplitStep,
    /// Resolvent uses the full `d_tau` in every application.
    FullStep,
}

/// Engine parameters. `for_clusters` fills the benchmark defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MboParams {
    pub d_tau: f64,
    pub n_tau: u32,
    /// Reduced basis size; defaults to the cluster count.
    pub m: usize,
    pub eps_stop: f64,
    pub max_iters: u32,
    pub seed: u64,
    pub diffusion_form: DiffusionForm,
}

impl MboParams {
    pub fn for_clusters(k: usize) -> Self {
        Self {
            d_tau: 0.1,
            n_tau: 3,
            m: k,
            eps_stop: 1e-7,
            max_iters: 300,
            seed: 0,
            diffusion_form: DiffusionForm::SplitStep,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, v: usize) -> Result<()> {
        if !(self.d_tau > 0.0) {
            return Err(Error::InvalidParameter("d_tau must be positive".into()));
        }
        if self.n_tau == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "n_tau and max_iters must be positive".into(),
            ));
        }
        if !(self.eps_stop > 0.0) {
            return Err(Error::InvalidParameter("eps_stop must be positive".into()));
        }
        if self.m == 0 || self.m > v {
            return Err(Error::InvalidParameter(format!(
                "m must be in 1..={v}, got {}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Weighted must- or cannot-link pairs with their trade-off factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    /// `(i, j, w)` with positive weights; symmetry is implied.
    pub pairs: Vec<(u32, u32, f64)>,
    pub trade_off: f64,
}

/// Target matrix plus per-node diagonal weights for a forcing term.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetTerm {
    pub target: DMatrix<f64>,
    pub weights: DVector<f64>,
}

/// Semi-supervision inputs; all pieces optional and combinable.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    pub must_link: Option<LinkSet>,
    pub cannot_link: Option<LinkSet>,
    pub fidelity: Option<TargetTerm>,
    pub avoidance: Option<TargetTerm>,
    /// node -> cluster, both as stored (node 0-based, cluster 1-based).
    pub anchors: Option<BTreeMap<u32, u32>>,
}

impl ConstraintSet {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn has_graph_edits(&self) -> bool {
        self.must_link.is_some() || self.cannot_link.is_some()
    }

    pub fn has_forcing(&self) -> bool {
        self.fidelity.is_some() || self.avoidance.is_some()
    }

    pub fn validate(&self, v: usize, k: usize) -> Result<()> {
        for (name, links) in [("must", &self.must_link), ("cannot", &self.cannot_link)] {
            if let Some(ls) = links {
                if !(ls.trade_off > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name}-link trade-off must be positive"
                    )));
                }
                for &(i, j, w) in &ls.pairs {
                    if i == j {
                        return Err(Error::InvalidParameter(format!(
                            "{name}-link ({i}, {j}) is a self-loop"
                        )));
                    }
                    if i as usize >= v || j as usize >= v {
                        return Err(Error::DimensionMismatch(format!(
                            "{name}-link ({i}, {j}) outside {v} nodes"
                        )));
                    }
                    if !(w > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "{name}-link ({i}, {j}) has non-positive weight"
                        )));
                    }
                }
            }
        }
        for (name, term) in [("fidelity", &self.fidelity), ("avoidance", &self.avoidance)] {
            if let Some(t) = term {
                if t.target.nrows() != v || t.target.ncols() != k || t.weights.len() != v {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} term must be {v}x{k} with {v} weights"
                    )));
                }
                for i in 0..v {
                    let row_nonzero = (0..k).any(|c| t.target[(i, c)] != 0.0);
                    let w = t.weights[i];
                    if w < 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "{name} weight at node {i} is negative"
                        )));
                    }
                    if (w > 0.0) != row_nonzero {
                        return Err(Error::InvalidParameter(format!(
                            "{name} weight at node {i} must be positive iff the target row is nonzero"
                        )));
                    }
                }
            }
        }
        if let Some(anchors) = &self.anchors {
            for (&node, &cluster) in anchors {
                if node as usize >= v {
                    return Err(Error::DimensionMismatch(format!(
                        "anchor node {node} outside {v} nodes"
                    )));
                }
                if cluster < 1 || cluster as usize > k {
                    return Err(Error::InvalidParameter(format!(
                        "anchor cluster {cluster} outside 1..={k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rows pinned to fixed clusters throughout the dynamics.
#[derive(Debug, Clone, Default)]
pub struct AnchorMask {
    rows: Vec<(usize, usize)>, // (row, 0-based cluster)
}

impl AnchorMask {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Overwrites each anchored row with its basis vector.
    pub fn apply(&self, m: &mut DMatrix<f64>) {
        for &(row, cluster) in &self.rows {
            for c in 0..m.ncols() {
                m[(row, c)] = if c == cluster { 1.0 } else { 0.0 };
            }
        }
    }

    pub fn contains(&self, row: usize) -> bool {
        self.rows.iter().any(|&(r, _)| r == row)
    }
}

/// Builds the row-overwrite descriptor for a set of anchors.
pub fn anchored_propagator(
    anchors: &BTreeMap<u32, u32>,
    k: usize,
    v: usize,
) -> Result<AnchorMask> {
    let mut rows = Vec::with_capacity(anchors.len());
    for (&node, &cluster) in anchors {
        if node as usize >= v {
            return Err(Error::DimensionMismatch(format!(
                "anchor node {node} outside {v} nodes"
            )));
        }
        if cluster < 1 || cluster as usize > k {
            return Err(Error::InvalidParameter(format!(
                "anchor cluster {cluster} outside 1..={k}"
            )));
        }
        rows.push((node as usize, cluster as usize - 1));
    }
    Ok(AnchorMask { rows })
}

/// Bins eigenvector entries into `k` equal-width intervals; node `i` is
/// one-hot on its bin. The top boundary is inclusive.
pub fn init_from_eigenvector(vec: &DVector<f64>, k: usize) -> Result<CharacteristicMatrix> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    let lo = vec.min();
    let hi = vec.max();
    if !(hi > lo) {
        return Err(Error::DegenerateEigenvector);
    }
    let width = (hi - lo) / k as f64;
    let mut values = DMatrix::zeros(vec.len(), k);
    for i in 0..vec.len() {
        let bin = (((vec[i] - lo) / width) as usize).min(k - 1);
        values[(i, bin)] = 1.0;
    }
    Ok(CharacteristicMatrix { values })
}

/// Uniform random one-hot rows, seeded.
pub fn init_random(v: usize, k: usize, seed: u64) -> Result<CharacteristicMatrix> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = DMatrix::zeros(v, k);
    for i in 0..v {
        values[(i, rng.random_range(0..k))] = 1.0;
    }
    Ok(CharacteristicMatrix { values })
}

/// One diffusion block: subtract the forcing once, then apply the reduced
/// resolvent `n_tau` times, restoring anchored rows after each application.
pub fn diffusion_step(
    basis: &SpectralBasis,
    u: &DMatrix<f64>,
    params: &MboParams,
    forcing: Option<&DMatrix<f64>>,
    anchors: Option<&AnchorMask>,
) -> Result<DMatrix<f64>> {
    if basis.m() != params.m {
        return Err(Error::DimensionMismatch(format!(
            "basis holds {} eigenpairs but params.m = {}",
            basis.m(),
            params.m
        )));
    }
    if basis.node_count() != u.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis is over {} nodes but u has {} rows",
            basis.node_count(),
            u.nrows()
        )));
    }
    let mut w = u.clone();
    if let Some(f) = forcing {
        if f.shape() != u.shape() {
            return Err(Error::DimensionMismatch(
                "forcing shape differs from u".into(),
            ));
        }
        w -= f * params.d_tau;
    }
    let tau = match params.diffusion_form {
        DiffusionForm::SplitStep => params.d_tau / params.n_tau as f64,
        DiffusionForm::FullStep => params.d_tau,
    };
    let factors: Vec<f64> = basis
        .eigenvalues()
        .iter()
        .map(|&l| 1.0 / (1.0 + tau * l))
        .collect();
    let left = basis.dual().unwrap_or_else(|| basis.eigenvectors());
    for _ in 0..params.n_tau {
        let mut coeffs = left.transpose() * &w;
        for (j, &f) in factors.iter().enumerate() {
            for c in 0..coeffs.ncols() {
                coeffs[(j, c)] *= f;
            }
        }
        w = basis.eigenvectors() * coeffs;
        if let Some(mask) = anchors {
            mask.apply(&mut w);
        }
    }
    Ok(w)
}

/// Argmax thresholding; ties are broken uniformly with the given seed.
pub fn threshold(u_half: &DMatrix<f64>, seed: u64) -> CharacteristicMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    threshold_with_rng(u_half, &mut rng)
}

fn threshold_with_rng(u_half: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> CharacteristicMatrix {
    let (v, k) = u_half.shape();
    let mut values = DMatrix::zeros(v, k);
    let mut ties: Vec<usize> = Vec::with_capacity(k);
    for i in 0..v {
        let mut best = u_half[(i, 0)];
        for c in 1..k {
            if u_half[(i, c)] > best {
                best = u_half[(i, c)];
            }
        }
        ties.clear();
        for c in 0..k {
            if u_half[(i, c)] == best {
                ties.push(c);
            }
        }
        let pick = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        };
        values[(i, pick)] = 1.0;
    }
    CharacteristicMatrix { values }
}

/// Euclidean projection onto the probability simplex (sort-based active set).
///
/// Test oracle for the argmax shortcut; kept independent of the engine path.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &val) in sorted.iter().enumerate() {
        cumulative += val;
        let candidate = (cumulative - 1.0) / (j as f64 + 1.0);
        if val - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.iter().map(|&xi| (xi - theta).max(0.0)).collect()
}

/// Adds must-links to the positive part and cannot-links to the negative
/// part; cancelled entries are dropped.
pub fn apply_must_cannot(graph: &SignedGraph, cs: &ConstraintSet) -> Result<SignedGraph> {
    let v = graph.node_count();
    let mut triples: Vec<(u32, u32, f64)> = graph
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.w))
        .collect();
    if let Some(must) = &cs.must_link {
        for &(i, j, w) in &must.pairs {
            if i as usize >= v || j as usize >= v {
                return Err(Error::DimensionMismatch(format!(
                    "must-link ({i}, {j}) outside {v} nodes"
                )));
            }
            triples.push((i, j, must.trade_off * w));
        }
    }
    if let Some(cannot) = &cs.cannot_link {
        for &(i, j, w) in &cannot.pairs {
            if i as usize >= v || j as usize >= v {
                return Err(Error::DimensionMismatch(format!(
                    "cannot-link ({i}, {j}) outside {v} nodes"
                )));
            }
            triples.push((i, j, -cannot.trade_off * w));
        }
    }
    SignedGraph::from_edges(v, triples)
}

/// Relative row-change stop criterion:
/// `max_i ‖u_i' - u_i‖² / max_i ‖u_i'‖² < eps_stop`.
pub fn stop_check(u_next: &DMatrix<f64>, u_prev: &DMatrix<f64>, eps_stop: f64) -> bool {
    assert_eq!(u_next.shape(), u_prev.shape(), "shapes must match");
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..u_next.nrows() {
        let mut d2 = 0.0;
        let mut n2 = 0.0;
        for c in 0..u_next.ncols() {
            let diff = u_next[(i, c)] - u_prev[(i, c)];
            d2 += diff * diff;
            n2 += u_next[(i, c)] * u_next[(i, c)];
        }
        num = num.max(d2);
        den = den.max(n2);
    }
    if den == 0.0 {
        return num == 0.0;
    }
    num / den < eps_stop
}

/// Per-iteration trace entry, serializable as a JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: u32,
    pub changed_rows: usize,
    pub gl_energy: f64,
    pub stop_ratio: f64,
}

/// Run summary: per-iteration records plus the convergence flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MboTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub iterations: u32,
}

/// Full scheme: constraint edits, Laplacian, reduced basis, eigenvector
/// binning init (unless given), then diffusion/threshold until the
/// assignment stops changing. Hitting `max_iters` is flagged, not an error.
pub fn run_mbo(
    graph: &SignedGraph,
    kind: LaplacianKind,
    k: usize,
    params: &MboParams,
    cs: Option<&ConstraintSet>,
    init: Option<CharacteristicMatrix>,
) -> Result<(Assignment, MboTrace)> {
    let op = if cs.map_or(false, |c| c.has_graph_edits()) {
        build_laplacian(&apply_must_cannot(graph, cs.unwrap())?, kind)?
    } else {
        build_laplacian(graph, kind)?
    };
    run_mbo_with_operator(&op, k, params, cs, init)
}

/// Scheme on a pre-built operator; the evolution and the trace energy both
/// use `op`.
pub fn run_mbo_with_operator(
    op: &LaplacianOperator,
    k: usize,
    params: &MboParams,
    cs: Option<&ConstraintSet>,
    init: Option<CharacteristicMatrix>,
) -> Result<(Assignment, MboTrace)> {
    let v = op.node_count();
    params.validate(v)?;
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    if let Some(c) = cs {
        c.validate(v, k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let eig_seed = rng.next_u64();
    let basis = smallest_eigenpairs(op, params.m, EIG_TOL, eig_seed)?;
    let init = match init {
        Some(u) => {
            if u.node_count() != v || u.cluster_count() != k {
                return Err(Error::DimensionMismatch(format!(
                    "init must be {v}x{k}"
                )));
            }
            u
        }
        None => {
            let pick_seed = rng.next_u64();
            let vec = bottom_nonzero_eigenvector(&basis, basis.default_zero_tol(), pick_seed)?;
            init_from_eigenvector(&vec, k)?
        }
    };
    run_loop(op, &basis, k, params, cs, init, &mut rng)
}

/// Scheme on a pre-built operator and basis (reduced bases computed once and
/// shared across runs). Stochastic choices use a stream seeded from
/// `params.seed`.
pub fn run_mbo_with_basis(
    op: &LaplacianOperator,
    basis: &SpectralBasis,
    k: usize,
    params: &MboParams,
    cs: Option<&ConstraintSet>,
    init: Option<CharacteristicMatrix>,
) -> Result<(Assignment, MboTrace)> {
    let v = op.node_count();
    params.validate(v)?;
    if k < 2 {
        return Err(Error::InvalidParameter("k must be at least 2".into()));
    }
    if let Some(c) = cs {
        c.validate(v, k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let _ = rng.next_u64(); // keep stream layout aligned with run_mbo_with_operator
    let init = match init {
        Some(u) => {
            if u.node_count() != v || u.cluster_count() != k {
                return Err(Error::DimensionMismatch(format!(
                    "init must be {v}x{k}"
                )));
            }
            u
        }
        None => {
            let pick_seed = rng.next_u64();
            let vec = bottom_nonzero_eigenvector(basis, basis.default_zero_tol(), pick_seed)?;
            init_from_eigenvector(&vec, k)?
        }
    };
    run_loop(op, basis, k, params, cs, init, &mut rng)
}

fn run_loop(
    op: &LaplacianOperator,
    basis: &SpectralBasis,
    k: usize,
    params: &MboParams,
    cs: Option<&ConstraintSet>,
    init: CharacteristicMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<(Assignment, MboTrace)> {
    let v = op.node_count();
    let anchors = match cs.and_then(|c| c.anchors.as_ref()) {
        Some(a) => anchored_propagator(a, k, v)?,
        None => AnchorMask::default(),
    };
    let mask = if anchors.is_empty() {
        None
    } else {
        Some(&anchors)
    };

    let mut u = init.values;
    if let Some(m) = mask {
        m.apply(&mut u);
    }

    // Anchors win over soft terms targeting the same node.
    let fidelity = cs.and_then(|c| c.fidelity.as_ref());
    let avoidance = cs.and_then(|c| c.avoidance.as_ref());
    let has_forcing = fidelity.is_some() || avoidance.is_some();

    let mut records = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=params.max_iters {
        iterations = iter;
        let forcing = if has_forcing {
            let mut f = DMatrix::zeros(v, k);
            if let Some(fi) = fidelity {
                for i in 0..v {
                    let w = fi.weights[i];
                    if w > 0.0 && !anchors.contains(i) {
                        for c in 0..k {
                            f[(i, c)] += w * (u[(i, c)] - fi.target[(i, c)]);
                        }
                    }
                }
            }
            if let Some(av) = avoidance {
                for i in 0..v {
                    let w = av.weights[i];
                    if w > 0.0 && !anchors.contains(i) {
                        for c in 0..k {
                            f[(i, c)] += w * av.target[(i, c)];
                        }
                    }
                }
            }
            Some(f)
        } else {
            None
        };

        let w = diffusion_step(basis, &u, params, forcing.as_ref(), mask)?;
        let mut next = threshold_with_rng(&w, rng);
        if let Some(m) = mask {
            m.apply(&mut next.values);
        }

        let changed_rows = (0..v)
            .filter(|&i| (0..k).any(|c| next.values[(i, c)] != u[(i, c)]))
            .count();
        let stop_ratio = stop_ratio(&next.values, &u);
        let u_pm = next.values.map(|x| 2.0 * x - 1.0);
        let gl_energy = signed_gl_energy(op, &u_pm, 1.0);
        records.push(TraceRecord {
            iter,
            changed_rows,
            gl_energy,
            stop_ratio,
        });
        let stop = stop_ratio < params.eps_stop;
        u = next.values;
        if stop {
            converged = true;
            break;
        }
    }

    let labels = CharacteristicMatrix { values: u }.labels();
    Ok((
        labels,
        MboTrace {
            records,
            converged,
            iterations,
        },
    ))
}

fn stop_ratio(u_next: &DMatrix<f64>, u_prev: &DMatrix<f64>) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..u_next.nrows() {
        let mut d2 = 0.0;
        let mut n2 = 0.0;
        for c in 0..u_next.ncols() {
            let diff = u_next[(i, c)] - u_prev[(i, c)];
            d2 += diff * diff;
            n2 += u_next[(i, c)] * u_next[(i, c)];
        }
        num = num.max(d2);
        den = den.max(n2);
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_laplacian;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvector_binning_endpoints() {
        let u = init_from_eigenvector(&DVector::from_vec(vec![0.0, 1.0]), 2).unwrap();
        assert_eq!(u.labels().as_slice(), &[1, 2]);
    }

    #[test]
    fn eigenvector_binning_midpoint_split() {
        let u =
            init_from_eigenvector(&DVector::from_vec(vec![0.0, 0.49, 0.51, 1.0]), 2).unwrap();
        assert_eq!(u.labels().as_slice(), &[1, 1, 2, 2]);
    }

    #[test]
    fn eigenvector_binning_matches_closed_form() {
        let mut rng = crate::testutil::rng(31);
        let k = 5;
        let vec = DVector::from_fn(200, |_, _| crate::testutil::unit_interval(&mut rng));
        let u = init_from_eigenvector(&vec, k).unwrap();
        let labels = u.labels();
        let (lo, hi) = (vec.min(), vec.max());
        let width = (hi - lo) / k as f64;
        let mut histogram = vec![0usize; k];
        for i in 0..vec.len() {
            let expect = (((vec[i] - lo) / width) as usize).min(k - 1);
            assert_eq!(labels.as_slice()[i] as usize - 1, expect);
            histogram[expect] += 1;
        }
        assert_eq!(histogram.iter().sum::<usize>(), 200);
    }

    #[test]
    fn constant_eigenvector_rejected() {
        let err = init_from_eigenvector(&DVector::from_element(4, 0.5), 3);
        assert!(matches!(err, Err(Error::DegenerateEigenvector)));
    }

    #[test]
    fn random_init_deterministic() {
        let a = init_random(50, 4, 99).unwrap();
        let b = init_random(50, 4, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_init_roughly_uniform() {
        let u = init_random(10_000, 4, 7).unwrap();
        let labels = u.labels();
        for cluster in 1..=4u32 {
            let frac = labels.as_slice().iter().filter(|&&l| l == cluster).count() as f64
                / 10_000.0;
            assert!((0.22..=0.28).contains(&frac), "cluster {cluster}: {frac}");
        }
    }

    #[test]
    fn random_init_needs_two_clusters() {
        assert!(init_random(10, 1, 0).is_err());
    }

    #[test]
    fn diffusion_two_node_reference_values() {
        let g = SignedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let op = build_laplacian(&g, LaplacianKind::Signed).unwrap();
        let basis = smallest_eigenpairs(&op, 2, 1e-12, 1).unwrap();
        let mut params = MboParams::for_clusters(2);
        params.n_tau = 1;
        let u = DMatrix::identity(2, 2);
        let w = diffusion_step(&basis, &u, &params, None, None).unwrap();
        assert_relative_eq!(w[(0, 0)], 0.91667, epsilon = 1e-5);
        assert_relative_eq!(w[(0, 1)], 0.08333, epsilon = 1e-5);
        assert_relative_eq!(w[(1, 0)], 0.08333, epsilon = 1e-5);
        assert_relative_eq!(w[(1, 1)], 0.91667, epsilon = 1e-5);
    }

    #[test]
    fn diffusion_preserves_identical_rows() {
        // all-positive graph: the constant vector spans the kernel, so a
        // constant-column input passes through with rows still equal
        let mut rng = crate::testutil::rng(13);
        let mut triples = Vec::new();
        for i in 0..30u32 {
            triples.push((i, (i + 1) % 30, 0.5 + rng.random::<f64>()));
            for j in (i + 2)..30u32 {
                if rng.random::<f64>() < 0.2 {
                    triples.push((i, j, 0.5 + rng.random::<f64>()));
                }
            }
        }
        let g = SignedGraph::from_edges(30, triples).unwrap();
        let op = build_laplacian(&g, LaplacianKind::Signed).unwrap();
        let basis = smallest_eigenpairs(&op, 4, 1e-10, 5).unwrap();
        let mut params = MboParams::for_clusters(3);
        params.m = 4;
        let row = [0.2, 0.5, 0.3];
        let u = DMatrix::from_fn(30, 3, |_, c| row[c]);
        let w = diffusion_step(&basis, &u, &params, None, None).unwrap();
        for i in 1..30 {
            for c in 0..3 {
                assert_relative_eq!(w[(i, c)], w[(0, c)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn diffusion_keeps_identical_rows_rank_one() {
        // signed graph: a constant-column input stays rank one, every output
        // row a scalar multiple of the input row
        let mut rng = crate::testutil::rng(13);
        let g = crate::testutil::random_signed_graph(&mut rng, 30, 0.3);
        let op = build_laplacian(&g, LaplacianKind::Signed).unwrap();
        let basis = smallest_eigenpairs(&op, 4, 1e-10, 5).unwrap();
        let mut params = MboParams::for_clusters(3);
        params.m = 4;
        let row = [0.2, 0.5, 0.3];
        let u = DMatrix::from_fn(30, 3, |_, c| row[c]);
        let w = diffusion_step(&basis, &u, &params, None, None).unwrap();
        for i in 0..30 {
            let scale = w[(i, 0)] / row[0];
            for c in 1..3 {
                assert_relative_eq!(w[(i, c)], scale * row[c], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zero_forcing_equals_no_forcing() {
        let mut rng = crate::testutil::rng(21);
        let g = crate::testutil::random_signed_graph(&mut rng, 20, 0.4);
        let op = build_laplacian(&g, LaplacianKind::SignedSymmetric).unwrap();
        let basis = smallest_eigenpairs(&op, 3, 1e-10, 2).unwrap();
        let params = MboParams {
            m: 3,
            ..MboParams::for_clusters(3)
        };
        let u = init_random(20, 3, 8).unwrap();
        let zero = DMatrix::zeros(20, 3);
        let a = diffusion_step(&basis, u.values(), &params, None, None).unwrap();
        let b = diffusion_step(&basis, u.values(), &params, Some(&zero), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn threshold_unique_argmax() {
        let u = DMatrix::from_row_slice(1, 3, &[0.2, 0.7, 0.1]);
        assert_eq!(threshold(&u, 0).labels().as_slice(), &[2]);
    }

    #[test]
    fn threshold_tie_break_is_uniform() {
        let u = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        let mut first = 0usize;
        for seed in 0..10_000 {
            if threshold(&u, seed).labels().as_slice()[0] == 1 {
                first += 1;
            }
        }
        let frac = first as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "tie frequency {frac}");
    }

    #[test]
    fn threshold_idempotent_on_one_hot() {
        let u = CharacteristicMatrix::from_labels(&[2, 1, 3], 3).unwrap();
        let t = threshold(u.values(), 4);
        assert_eq!(t.values(), u.values());
    }

    #[test]
    fn simplex_projection_barycenter() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for c in p {
            assert_relative_eq!(c, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn simplex_projection_fixes_vertices() {
        assert_eq!(project_simplex(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn simplex_projection_active_set_case() {
        let p = project_simplex(&[2.0, 0.0, 0.0]);
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(p[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn simplex_projection_beats_grid_search() {
        // coarse quadratic-program grid over the K=3 simplex
        let x = [0.9, 0.44, -0.2];
        let p = project_simplex(&x);
        let dist = |y: &[f64]| -> f64 {
            x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let mut best = f64::INFINITY;
        let steps = 100;
        for a in 0..=steps {
            for b in 0..=(steps - a) {
                let y = [
                    a as f64 / steps as f64,
                    b as f64 / steps as f64,
                    (steps - a - b) as f64 / steps as f64,
                ];
                best = best.min(dist(&y));
            }
        }
        assert!(dist(&p) <= best + 1e-12);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn must_cannot_identity_when_empty() {
        let g = SignedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, -2.0)]).unwrap();
        let cs = ConstraintSet::none();
        assert_eq!(apply_must_cannot(&g, &cs).unwrap(), g);
    }

    #[test]
    fn must_link_on_empty_graph() {
        let g = SignedGraph::empty(3);
        let cs = ConstraintSet {
            must_link: Some(LinkSet {
                pairs: vec![(0, 1, 1.0)],
                trade_off: 2.0,
            }),
            ..ConstraintSet::none()
        };
        let out = apply_must_cannot(&g, &cs).unwrap();
        assert_eq!(out.edges(), &[crate::graph::Edge { i: 0, j: 1, w: 2.0 }]);
    }

    #[test]
    fn cancelled_entries_are_dropped() {
        let g = SignedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let cs = ConstraintSet {
            cannot_link: Some(LinkSet {
                pairs: vec![(0, 1, 1.0)],
                trade_off: 1.0,
            }),
            ..ConstraintSet::none()
        };
        assert_eq!(apply_must_cannot(&g, &cs).unwrap().edge_count(), 0);
    }

    #[test]
    fn anchor_mask_overwrites_rows() {
        let anchors = BTreeMap::from([(3u32, 2u32)]);
        let mask = anchored_propagator(&anchors, 4, 5).unwrap();
        let mut m = DMatrix::from_element(5, 4, 0.25);
        mask.apply(&mut m);
        assert_eq!(m[(3, 1)], 1.0);
        assert_eq!(m[(3, 0)], 0.0);
        assert_eq!(m[(3, 2)], 0.0);
        assert_eq!(m[(3, 3)], 0.0);
        assert_eq!(m[(2, 0)], 0.25);
    }

    #[test]
    fn empty_anchor_mask_is_noop() {
        let mask = anchored_propagator(&BTreeMap::new(), 3, 4).unwrap();
        let mut m = DMatrix::from_element(4, 3, 0.5);
        let before = m.clone();
        mask.apply(&mut m);
        assert_eq!(m, before);
    }

    #[test]
    fn stop_check_identical_matrices() {
        let u = CharacteristicMatrix::from_labels(&[1, 2, 1], 2).unwrap();
        assert!(stop_check(u.values(), u.values(), 1e-7));
    }

    #[test]
    fn stop_check_single_flip_fails() {
        let a = CharacteristicMatrix::from_labels(&[1, 2, 1], 2).unwrap();
        let b = CharacteristicMatrix::from_labels(&[1, 2, 2], 2).unwrap();
        assert!(!stop_check(b.values(), a.values(), 1e-7));
    }

    #[test]
    fn stop_ratio_is_two_iff_any_row_changed() {
        let mut rng = crate::testutil::rng(77);
        for _ in 0..20 {
            let k = 4;
            let v = 30;
            let labels_a: Vec<u32> =
                (0..v).map(|_| rng.random_range(1..=k as u32)).collect();
            let mut labels_b = labels_a.clone();
            let flips = rng.random_range(0..5);
            for _ in 0..flips {
                let i = rng.random_range(0..v);
                labels_b[i] = (labels_b[i] % k as u32) + 1;
            }
            let a = CharacteristicMatrix::from_labels(&labels_a, k).unwrap();
            let b = CharacteristicMatrix::from_labels(&labels_b, k).unwrap();
            let r = stop_ratio(b.values(), a.values());
            if labels_a == labels_b {
                assert_eq!(r, 0.0);
            } else {
                assert_eq!(r, 2.0);
            }
        }
    }
}
