//! Seeded synthetic benchmarks: signed stochastic block model and signed
//! preferential-attachment graphs, with their planted ground truth.

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::mbo::Assignment;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Planted partition: block labels, one-hot form, and the implicit ±1 block
/// sign structure (materialized lazily).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    labels: Vec<u32>,
    cluster_sizes: Vec<usize>,
}

impl GroundTruth {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    /// 1-based block labels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn assignment(&self) -> Assignment {
        Assignment::new(self.labels.clone(), self.k()).expect("labels consistent by construction")
    }

    /// +1 for same block, -1 across blocks (off-diagonal entries).
    pub fn sign(&self, i: usize, j: usize) -> f64 {
        if self.labels[i] == self.labels[j] {
            1.0
        } else {
            -1.0
        }
    }

    /// V×K one-hot membership matrix.
    pub fn one_hot(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.node_count(), self.k());
        for (i, &label) in self.labels.iter().enumerate() {
            u[(i, label as usize - 1)] = 1.0;
        }
        u
    }

    /// Dense ±1 sign matrix with zero diagonal (small cases only).
    pub fn sign_matrix(&self) -> DMatrix<f64> {
        let v = self.node_count();
        DMatrix::from_fn(v, v, |i, j| if i == j { 0.0 } else { self.sign(i, j) })
    }
}

/// Block labels `1..=K` repeated by cluster size.
pub fn ground_truth(cluster_sizes: &[usize]) -> Result<GroundTruth> {
    if cluster_sizes.is_empty() || cluster_sizes.iter().any(|&c| c == 0) {
        return Err(Error::InvalidParameter(
            "cluster sizes must be nonempty and positive".into(),
        ));
    }
    let mut labels = Vec::with_capacity(cluster_sizes.iter().sum());
    for (block, &size) in cluster_sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(block as u32 + 1).take(size));
    }
    Ok(GroundTruth {
        labels,
        cluster_sizes: cluster_sizes.to_vec(),
    })
}

/// Block model parameters: edge presence probability `sparsity`, sign-flip
/// probability `noise`.
#[derive(Debug, Clone)]
pub struct SsbmParams {
    pub cluster_sizes: Vec<usize>,
    pub sparsity: f64,
    pub noise: f64,
    pub seed: u64,
}

impl SsbmParams {
    /// Equal-size clusters (remainder spread over the leading blocks).
    pub fn equal_clusters(v: usize, k: usize, sparsity: f64, noise: f64, seed: u64) -> Self {
        Self {
            cluster_sizes: split_sizes(v, k),
            sparsity,
            noise,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cluster_sizes.is_empty() || self.cluster_sizes.iter().any(|&c| c == 0) {
            return Err(Error::InvalidParameter(
                "cluster sizes must be nonempty and positive".into(),
            ));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::InvalidParameter(
                "sparsity must lie in (0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidParameter("noise must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

pub fn split_sizes(v: usize, k: usize) -> Vec<usize> {
    let base = v / k;
    let extra = v % k;
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

/// Samples a signed stochastic block model instance.
///
/// Each pair `i < j` independently carries the block sign with probability
/// `(1-noise)·sparsity`, the flipped sign with probability `noise·sparsity`,
/// and is absent otherwise. Draws leaving isolated nodes are regenerated with
/// a fresh sub-seed up to 10 times, since the normalized Laplacians need
/// positive degrees.
pub fn ssbm(params: &SsbmParams) -> Result<(SignedGraph, GroundTruth)> {
    params.validate()?;
    let truth = ground_truth(&params.cluster_sizes)?;
    let v = truth.node_count();
    for attempt in 0..10u32 {
        let seed = retry_seed(params.seed, attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triples = Vec::new();
        let mut degree = vec![0u32; v];
        let keep = params.sparsity * (1.0 - params.noise);
        for i in 0..v as u32 {
            for j in (i + 1)..v as u32 {
                let u: f64 = rng.random();
                if u < params.sparsity {
                    let s = truth.sign(i as usize, j as usize);
                    let w = if u < keep { s } else { -s };
                    triples.push((i, j, w));
                    degree[i as usize] += 1;
                    degree[j as usize] += 1;
                }
            }
        }
        if degree.iter().all(|&d| d > 0) {
            return Ok((SignedGraph::from_edges(v, triples)?, truth));
        }
        log::warn!(
            "block model draw (seed {seed}) produced isolated nodes; regenerating (attempt {})",
            attempt + 1
        );
    }
    Err(Error::DegenerateDraw(10))
}

fn retry_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(attempt as u64))
    }
}

/// Preferential-attachment parameters: `v0`-clique start, `nu` attachments
/// per arriving node, sign-flip probability `noise`.
#[derive(Debug, Clone)]
pub struct BaParams {
    pub v0: usize,
    pub nu: usize,
    pub cluster_sizes: Vec<usize>,
    pub noise: f64,
    pub seed: u64,
}

impl BaParams {
    pub fn equal_clusters(
        v: usize,
        k: usize,
        v0: usize,
        nu: usize,
        noise: f64,
        seed: u64,
    ) -> Self {
        Self {
            v0,
            nu,
            cluster_sizes: split_sizes(v, k),
            noise,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let v: usize = self.cluster_sizes.iter().sum();
        if self.cluster_sizes.is_empty() || self.cluster_sizes.iter().any(|&c| c == 0) {
            return Err(Error::InvalidParameter(
                "cluster sizes must be nonempty and positive".into(),
            ));
        }
        if self.nu == 0 || self.nu > self.v0 {
            return Err(Error::InvalidParameter(
                "attachments per node must satisfy 1 <= nu <= v0".into(),
            ));
        }
        if self.v0 < 2 || self.v0 > v {
            return Err(Error::InvalidParameter(
                "initial clique must satisfy 2 <= v0 <= V".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidParameter("noise must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Grows an unsigned preferential-attachment skeleton from a `v0`-clique
/// (`nu` degree-proportional attachments per arrival, sampled without
/// replacement), then signs each edge with the block sign, flipped with
/// probability `noise`.
pub fn signed_ba(params: &BaParams) -> Result<(SignedGraph, GroundTruth)> {
    params.validate()?;
    let truth = ground_truth(&params.cluster_sizes)?;
    let v = truth.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut triples = Vec::with_capacity(params.v0 * (params.v0 - 1) / 2 + params.nu * v);
    let mut degree = vec![0u64; v];

    let sign_edge = |i: u32, j: u32, rng: &mut ChaCha8Rng| -> (u32, u32, f64) {
        let s = truth.sign(i as usize, j as usize);
        let w = if rng.random::<f64>() < params.noise {
            -s
        } else {
            s
        };
        (i, j, w)
    };

    for i in 0..params.v0 as u32 {
        for j in (i + 1)..params.v0 as u32 {
            triples.push(sign_edge(i, j, &mut rng));
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
    }

    let mut chosen: Vec<u32> = Vec::with_capacity(params.nu);
    for t in params.v0..v {
        chosen.clear();
        for _ in 0..params.nu {
            let total: u64 = (0..t)
                .filter(|j| !chosen.contains(&(*j as u32)))
                .map(|j| degree[j])
                .sum();
            let mut r = rng.random::<f64>() * total as f64;
            let mut pick = None;
            for j in 0..t {
                if chosen.contains(&(j as u32)) {
                    continue;
                }
                r -= degree[j] as f64;
                if r < 0.0 {
                    pick = Some(j as u32);
                    break;
                }
            }
            // guard against floating-point spill past the last candidate
            let pick = pick.unwrap_or_else(|| {
                (0..t)
                    .rev()
                    .find(|j| !chosen.contains(&(*j as u32)))
                    .expect("nu <= v0 <= t candidates available") as u32
            });
            chosen.push(pick);
        }
        for &j in &chosen {
            triples.push(sign_edge(j.min(t as u32), j.max(t as u32), &mut rng));
            degree[j as usize] += 1;
            degree[t] += 1;
        }
    }

    Ok((SignedGraph::from_edges(v, triples)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_two_blocks() {
        let gt = ground_truth(&[2, 2]).unwrap();
        assert_eq!(gt.labels(), &[1, 1, 2, 2]);
    }

    #[test]
    fn single_block_all_positive_signs() {
        let gt = ground_truth(&[3]).unwrap();
        let s = gt.sign_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 1.0 };
                assert_eq!(s[(i, j)], expect);
            }
        }
    }

    #[test]
    fn distinct_singletons_are_negative() {
        let gt = ground_truth(&[1, 1]).unwrap();
        assert_eq!(gt.sign(0, 1), -1.0);
    }

    #[test]
    fn full_noiseless_model_equals_sign_matrix() {
        let params = SsbmParams::equal_clusters(12, 3, 1.0, 0.0, 5);
        let (g, gt) = ssbm(&params).unwrap();
        let a = g.to_dense_adjacency();
        let s = gt.sign_matrix();
        assert_eq!(a, s);
    }

    #[test]
    fn full_flipped_model_equals_negated_sign_matrix() {
        let params = SsbmParams::equal_clusters(12, 3, 1.0, 1.0, 5);
        let (g, gt) = ssbm(&params).unwrap();
        let a = g.to_dense_adjacency();
        let s = gt.sign_matrix();
        assert_eq!(a, -s);
    }

    #[test]
    fn edge_count_concentrates() {
        let params = SsbmParams::equal_clusters(1200, 5, 0.05, 0.1, 9);
        let (g, _) = ssbm(&params).unwrap();
        let pairs: f64 = 1200.0 * 1199.0 / 2.0;
        let mean = 0.05 * pairs;
        let sd = (pairs * 0.05 * 0.95).sqrt();
        let count = g.edge_count() as f64;
        assert!(
            (count - mean).abs() < 3.0 * sd,
            "edge count {count} outside 3 sigma of {mean}"
        );
    }

    #[test]
    fn ssbm_weights_are_unit_and_seeded() {
        let params = SsbmParams::equal_clusters(100, 4, 0.2, 0.3, 123);
        let (a, _) = ssbm(&params).unwrap();
        let (b, _) = ssbm(&params).unwrap();
        assert_eq!(a, b);
        assert!(a.edges().iter().all(|e| e.w == 1.0 || e.w == -1.0));
    }

    #[test]
    fn ssbm_flip_rate_matches_noise() {
        let params = SsbmParams::equal_clusters(1200, 5, 0.05, 0.2, 31);
        let (g, gt) = ssbm(&params).unwrap();
        let mut flipped = 0usize;
        for e in g.edges() {
            if e.w != gt.sign(e.i as usize, e.j as usize) {
                flipped += 1;
            }
        }
        let n = g.edge_count() as f64;
        let sd = (n * 0.2 * 0.8).sqrt();
        assert!(
            (flipped as f64 - 0.2 * n).abs() < 3.0 * sd,
            "flip count {flipped} of {n}"
        );
    }

    #[test]
    fn ba_edge_count_is_structural() {
        let params = BaParams::equal_clusters(300, 3, 6, 4, 0.2, 7);
        let (g, _) = signed_ba(&params).unwrap();
        assert_eq!(g.edge_count(), 6 * 5 / 2 + 4 * (300 - 6));
    }

    #[test]
    fn ba_noiseless_signs_match_blocks() {
        let params = BaParams::equal_clusters(200, 4, 5, 3, 0.0, 11);
        let (g, gt) = signed_ba(&params).unwrap();
        for e in g.edges() {
            assert_eq!(e.w, gt.sign(e.i as usize, e.j as usize));
        }
    }

    #[test]
    fn ba_is_connected() {
        let params = BaParams::equal_clusters(400, 2, 5, 2, 0.4, 3);
        let (g, _) = signed_ba(&params).unwrap();
        // breadth-first reachability over the undirected skeleton
        let mut adjacency = vec![Vec::new(); 400];
        for e in g.edges() {
            adjacency[e.i as usize].push(e.j as usize);
            adjacency[e.j as usize].push(e.i as usize);
        }
        let mut seen = vec![false; 400];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(node) = queue.pop() {
            for &next in &adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push(next);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
