//! Bottom eigenpairs of the Laplacian operators.
//!
//! Small problems go through a dense symmetric eigensolve; larger ones use
//! Lanczos with full reorthogonalization and a seeded random start. The
//! random-walk Laplacian is routed through its symmetric similar form and
//! back-transformed, carrying a dual basis so reduced-basis diffusion stays
//! exact.

use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, LaplacianKind, LaplacianOperator};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default problem size below which the dense eigensolver is used.
pub const DENSE_THRESHOLD: usize = 512;

/// The `m` algebraically smallest eigenpairs of a Laplacian.
///
/// Eigenvalues ascend; eigenvector columns are orthonormal for symmetric
/// kinds. For the random-walk kind the columns are unit-norm eigenvectors of
/// the nonsymmetric operator and `dual` holds the matching left basis with
/// `dualᵀ · eigenvectors = I`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    dual: Option<DMatrix<f64>>,
    source_kind: LaplacianKind,
}

impl SpectralBasis {
    pub fn m(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn node_count(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// V×m eigenvector matrix.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Left basis; `None` means the eigenvectors are orthonormal and serve as
    /// their own dual.
    pub fn dual(&self) -> Option<&DMatrix<f64>> {
        self.dual.as_ref()
    }

    pub fn source_kind(&self) -> LaplacianKind {
        self.source_kind
    }

    /// Zero-detection tolerance scaled to the computed spectrum.
    pub fn default_zero_tol(&self) -> f64 {
        1e-8 * self.eigenvalues[self.m() - 1].max(0.0)
    }
}

/// Options for [`smallest_eigenpairs_with`].
#[derive(Debug, Clone)]
pub struct EigsOptions {
    /// Residual tolerance: accept when `‖Lx - λx‖₂ ≤ tol·max(1, λ)`.
    pub tol: f64,
    /// Seed for the Lanczos random start.
    pub seed: u64,
    /// Problem sizes up to this use the dense path.
    pub dense_threshold: usize,
    /// Lanczos iteration cap; `None` picks `min(V, max(200, 6m))`.
    pub max_iters: Option<usize>,
}

impl EigsOptions {
    pub fn new(tol: f64, seed: u64) -> Self {
        Self {
            tol,
            seed,
            dense_threshold: DENSE_THRESHOLD,
            max_iters: None,
        }
    }
}

/// Computes the `m` smallest eigenpairs of `op`.
pub fn smallest_eigenpairs(
    op: &LaplacianOperator,
    m: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectralBasis> {
    smallest_eigenpairs_with(op, m, &EigsOptions::new(tol, seed))
}

/// Computes the `m` smallest eigenpairs with explicit solver options.
pub fn smallest_eigenpairs_with(
    op: &LaplacianOperator,
    m: usize,
    opts: &EigsOptions,
) -> Result<SpectralBasis> {
    let v = op.node_count();
    if m == 0 || m > v {
        return Err(Error::InvalidParameter(format!(
            "m must be in 1..={v}, got {m}"
        )));
    }
    if op.kind == LaplacianKind::SignedRandomWalk {
        return random_walk_basis(op, m, opts);
    }
    let (eigenvalues, mut eigenvectors) = symmetric_smallest(op.matrix(), m, opts)?;
    normalize_signs(&mut eigenvectors, None);
    Ok(SpectralBasis {
        eigenvalues: DVector::from_vec(eigenvalues),
        eigenvectors,
        dual: None,
        source_kind: op.kind,
    })
}

/// Random-walk pairs via the symmetric similar operator:
/// right vectors `D^{-1/2} x_sym`, left vectors `D^{1/2} x_sym`.
fn random_walk_basis(
    op: &LaplacianOperator,
    m: usize,
    opts: &EigsOptions,
) -> Result<SpectralBasis> {
    let v = op.node_count();
    let d = &op.degrees().d_bar;
    // sym_ij = sqrt(d_i) * rw_ij / sqrt(d_j)
    let sqrt_d: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
    let dense_src = op.matrix();
    let mut triplets = Vec::with_capacity(dense_src.nnz());
    for (r, c, val) in csr_iter(dense_src) {
        triplets.push((r as u32, c as u32, sqrt_d[r] * val / sqrt_d[c]));
    }
    let sym = CsrMatrix::from_triplets(v, triplets);
    let (eigenvalues, x_sym) = symmetric_smallest(&sym, m, opts)?;

    let mut right = DMatrix::zeros(v, m);
    let mut dual = DMatrix::zeros(v, m);
    for j in 0..m {
        let mut norm2 = 0.0;
        for i in 0..v {
            let r = x_sym[(i, j)] / sqrt_d[i];
            right[(i, j)] = r;
            norm2 += r * r;
        }
        let c = norm2.sqrt();
        for i in 0..v {
            right[(i, j)] /= c;
            dual[(i, j)] = x_sym[(i, j)] * sqrt_d[i] * c;
        }
    }
    normalize_signs(&mut right, Some(&mut dual));
    Ok(SpectralBasis {
        eigenvalues: DVector::from_vec(eigenvalues),
        eigenvectors: right,
        dual: Some(dual),
        source_kind: LaplacianKind::SignedRandomWalk,
    })
}

fn csr_iter(m: &CsrMatrix) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    (0..m.n()).flat_map(move |r| m.row_entries(r).map(move |(c, v)| (r, c, v)))
}

/// Sign convention: first component of each column larger than
/// `1e-12·‖column‖_∞` is made positive. Keeps seeded runs reproducible.
fn normalize_signs(x: &mut DMatrix<f64>, mut dual: Option<&mut DMatrix<f64>>) {
    let (n, m) = (x.nrows(), x.ncols());
    for j in 0..m {
        let max_abs = (0..n).map(|i| x[(i, j)].abs()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            continue;
        }
        let cutoff = 1e-12 * max_abs;
        for i in 0..n {
            let val = x[(i, j)];
            if val.abs() > cutoff {
                if val < 0.0 {
                    for r in 0..n {
                        x[(r, j)] = -x[(r, j)];
                    }
                    if let Some(d) = dual.as_deref_mut() {
                        for r in 0..n {
                            d[(r, j)] = -d[(r, j)];
                        }
                    }
                }
                break;
            }
        }
    }
}

fn symmetric_smallest(
    matrix: &CsrMatrix,
    m: usize,
    opts: &EigsOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if matrix.n() <= opts.dense_threshold {
        Ok(dense_smallest(&matrix.to_dense(), m))
    } else {
        lanczos_smallest(matrix, m, opts)
    }
}

/// Dense symmetric eigensolve; also the oracle path in tests.
pub fn dense_smallest(matrix: &DMatrix<f64>, m: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let eig = nalgebra::SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().take(m).map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, m);
    for (out, &src) in order.iter().take(m).enumerate() {
        vectors.set_column(out, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Lanczos with full reorthogonalization and seeded random start.
///
/// On (happy) breakdown the basis is extended with a fresh random vector
/// orthogonal to the invariant subspace found so far, which also picks up
/// extra copies of degenerate eigenvalues.
fn lanczos_smallest(
    matrix: &CsrMatrix,
    m: usize,
    opts: &EigsOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.n();
    let cap = opts.max_iters.unwrap_or_else(|| n.min(200.max(6 * m)));
    let cap = cap.max(m).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    basis.push(random_unit(n, &mut rng));
    let mut alphas: Vec<f64> = Vec::with_capacity(cap);
    let mut betas: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![0.0; n];

    // Scale estimate for breakdown detection, refined from the first matvec.
    let mut scale = 1.0f64;

    loop {
        let j = alphas.len();
        matrix.matvec(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        scale = scale.max(alpha.abs());
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 && betas[j - 1] > 0.0 {
            let beta_prev = betas[j - 1];
            axpy(&mut w, -beta_prev, &basis[j - 1]);
        }
        // Full reorthogonalization, two passes.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        let beta = norm(&w);
        alphas.push(alpha);
        let size = alphas.len();
        scale = scale.max(beta);
        let breakdown = beta <= 1e-13 * scale.max(1.0);

        let should_check =
            size >= m && (breakdown || size == cap || size == n || size % 16 == 0);
        if should_check {
            if let Some(result) = try_extract(matrix, &basis, &alphas, &betas, m, opts.tol) {
                return Ok(result);
            }
            if size == n {
                // Full space explored; accept the exact decomposition.
                return Ok(extract_unchecked(&basis, &alphas, &betas, m));
            }
        }
        if size >= cap {
            return Err(Error::NoConvergence(size));
        }

        if breakdown {
            // Invariant subspace reached; continue in its orthogonal complement.
            match fresh_direction(n, &basis, &mut rng) {
                Some(q) => {
                    betas.push(0.0);
                    basis.push(q);
                }
                None => return Ok(extract_unchecked(&basis, &alphas, &betas, m)),
            }
        } else {
            for x in w.iter_mut() {
                *x /= beta;
            }
            betas.push(beta);
            basis.push(w.clone());
        }
    }
}

/// Ritz extraction with residual verification; `None` keeps iterating.
fn try_extract(
    matrix: &CsrMatrix,
    basis: &[Vec<f64>],
    alphas: &[f64],
    betas: &[f64],
    m: usize,
    tol: f64,
) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let size = alphas.len();
    let (theta, s) = tridiag_eigen(alphas, betas);
    let beta_last = if size <= basis.len() && size >= 1 && betas.len() >= size {
        betas[size - 1]
    } else {
        0.0
    };
    for i in 0..m {
        let bound = beta_last.abs() * s[(size - 1, i)].abs();
        if bound > tol * theta[i].abs().max(1.0) {
            return None;
        }
    }
    let (values, vectors) = assemble(basis, &theta, &s, m);
    // Verify the actual residuals before accepting.
    let n = matrix.n();
    let mut lx = vec![0.0; n];
    let mut col = vec![0.0; n];
    for i in 0..m {
        for r in 0..n {
            col[r] = vectors[(r, i)];
        }
        matrix.matvec(&col, &mut lx);
        let mut res2 = 0.0;
        for r in 0..n {
            let d = lx[r] - values[i] * col[r];
            res2 += d * d;
        }
        if res2.sqrt() > tol * values[i].abs().max(1.0) {
            return None;
        }
    }
    Some((values, vectors))
}

fn extract_unchecked(
    basis: &[Vec<f64>],
    alphas: &[f64],
    betas: &[f64],
    m: usize,
) -> (Vec<f64>, DMatrix<f64>) {
    let (theta, s) = tridiag_eigen(alphas, betas);
    assemble(basis, &theta, &s, m)
}

/// Eigendecomposition of the symmetric tridiagonal `T(alphas, betas)`,
/// returned ascending.
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let size = alphas.len();
    let mut t = DMatrix::zeros(size, size);
    for i in 0..size {
        t[(i, i)] = alphas[i];
        if i + 1 < size && i < betas.len() {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut s = DMatrix::zeros(size, size);
    for (out, &src) in order.iter().enumerate() {
        s.set_column(out, &eig.eigenvectors.column(src));
    }
    (theta, s)
}

fn assemble(
    basis: &[Vec<f64>],
    theta: &[f64],
    s: &DMatrix<f64>,
    m: usize,
) -> (Vec<f64>, DMatrix<f64>) {
    let n = basis[0].len();
    let size = theta.len();
    let mut x = DMatrix::zeros(n, m);
    for i in 0..m {
        for (l, q) in basis.iter().enumerate().take(size) {
            let c = s[(l, i)];
            if c != 0.0 {
                for r in 0..n {
                    x[(r, i)] += c * q[r];
                }
            }
        }
    }
    (theta[..m].to_vec(), x)
}

/// Random unit vector orthogonalized against `basis`; `None` when the
/// complement is numerically exhausted.
fn fresh_direction(n: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut q = random_unit(n, rng);
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &q);
                axpy(&mut q, -c, b);
            }
        }
        let nrm = norm(&q);
        if nrm > 1e-8 {
            for x in q.iter_mut() {
                *x /= nrm;
            }
            return Some(q);
        }
    }
    None
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let nrm = norm(&v);
    for x in v.iter_mut() {
        *x /= nrm;
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Eigenvector for the smallest eigenvalue above `zero_tol`.
///
/// When that eigenvalue is numerically degenerate the result is a seeded
/// random unit-norm element of its eigenspace.
pub fn bottom_nonzero_eigenvector(
    basis: &SpectralBasis,
    zero_tol: f64,
    seed: u64,
) -> Result<DVector<f64>> {
    let m = basis.m();
    let first = (0..m)
        .find(|&i| basis.eigenvalues[i] > zero_tol)
        .ok_or(Error::AllZeroSpectrum)?;
    let lambda = basis.eigenvalues[first];
    let group_tol = zero_tol.max(1e-12 * lambda.abs());
    let group_end = (first..m)
        .take_while(|&i| basis.eigenvalues[i] - lambda <= group_tol)
        .last()
        .unwrap()
        + 1;

    let mut vec = if group_end - first == 1 {
        basis.eigenvectors.column(first).into_owned()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut combo = DVector::zeros(basis.node_count());
        for i in first..group_end {
            let c = rng.random::<f64>() * 2.0 - 1.0;
            combo += basis.eigenvectors.column(i) * c;
        }
        combo
    };
    let nrm = vec.norm();
    if nrm == 0.0 {
        return Err(Error::AllZeroSpectrum);
    }
    vec /= nrm;
    // Same sign convention as the basis columns.
    let max_abs = vec.amax();
    for i in 0..vec.len() {
        if vec[i].abs() > 1e-12 * max_abs {
            if vec[i] < 0.0 {
                vec = -vec;
            }
            break;
        }
    }
    Ok(vec)
}

/// Largest eigenpair residual `‖Lx - λx‖₂`; used by tests and diagnostics.
pub fn max_residual(op: &LaplacianOperator, basis: &SpectralBasis) -> f64 {
    let n = op.node_count();
    let mut col = vec![0.0; n];
    let mut lx = vec![0.0; n];
    let mut worst = 0.0f64;
    for j in 0..basis.m() {
        for r in 0..n {
            col[r] = basis.eigenvectors[(r, j)];
        }
        op.matvec(&col, &mut lx);
        let mut res2 = 0.0;
        for r in 0..n {
            let d = lx[r] - basis.eigenvalues[j] * col[r];
            res2 += d * d;
        }
        worst = worst.max(res2.sqrt());
    }
    worst
}
