//! Partition quality metrics and the k-means++ spectral baseline.

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::mbo::Assignment;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cross-partition counts `p_ij` with row/column sums.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn build(pred: &Assignment, truth: &Assignment) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch {
                expected: truth.len(),
                got: pred.len(),
            });
        }
        let k1 = pred.as_slice().iter().copied().max().unwrap_or(0) as usize;
        let k2 = truth.as_slice().iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![vec![0u64; k2]; k1];
        for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
            counts[p as usize - 1][t as usize - 1] += 1;
        }
        let row_sums: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..k2)
            .map(|j| counts.iter().map(|row| row[j]).sum())
            .collect();
        let total = row_sums.iter().sum();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total,
        })
    }
}

fn choose2(n: u64) -> u128 {
    (n as u128) * (n as u128 - u128::from(n > 0)) / 2
}

/// Adjusted Rand index from the contingency table; 1 iff the partitions are
/// identical up to relabeling, ~0 for independent partitions.
///
/// Binomial sums use exact integer arithmetic and convert to float only at
/// the end, so counts keep full precision at every scale used here.
pub fn ari(pred: &Assignment, truth: &Assignment) -> Result<f64> {
    let table = ContingencyTable::build(pred, truth)?;
    let sum_p: u128 = table
        .counts
        .iter()
        .flat_map(|row| row.iter().map(|&c| choose2(c)))
        .sum();
    let sum_a: u128 = table.row_sums.iter().map(|&a| choose2(a)).sum();
    let sum_b: u128 = table.col_sums.iter().map(|&b| choose2(b)).sum();
    let pairs = choose2(table.total);
    if pairs == 0 {
        return Ok(1.0);
    }
    let expected = (sum_a as f64) * (sum_b as f64) / (pairs as f64);
    let numerator = sum_p as f64 - expected;
    let denominator = 0.5 * (sum_a as f64 + sum_b as f64) - expected;
    if denominator == 0.0 {
        // both partitions trivial (all singletons or a single cluster)
        return Ok(1.0);
    }
    Ok(numerator / denominator)
}

/// Balanced normalized cut: `Σ_c x_cᵀ(D⁺ - A)x_c / x_cᵀ D̄ x_c` over the
/// cluster indicators. Evaluation only; lower is better.
pub fn bnc_objective(assign: &Assignment, graph: &SignedGraph) -> Result<f64> {
    let v = graph.node_count();
    if assign.len() != v {
        return Err(Error::LengthMismatch {
            expected: v,
            got: assign.len(),
        });
    }
    let degrees = graph.degrees();
    if let Some(i) = degrees.d_bar.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedNode(i as u32));
    }
    let k = assign.as_slice().iter().copied().max().unwrap() as usize;
    let mut plus_deg = vec![0.0f64; k];
    let mut bar_deg = vec![0.0f64; k];
    let mut members = vec![0usize; k];
    for (i, &label) in assign.as_slice().iter().enumerate() {
        let c = label as usize - 1;
        plus_deg[c] += degrees.d_plus[i];
        bar_deg[c] += degrees.d_bar[i];
        members[c] += 1;
    }
    if let Some(c) = members.iter().position(|&m| m == 0) {
        return Err(Error::EmptyCluster(c as u32 + 1));
    }
    // x_cᵀ A x_c accumulated per cluster from the edge list
    let labels = assign.as_slice();
    let mut internal = vec![0.0f64; k];
    for e in graph.edges() {
        let (li, lj) = (labels[e.i as usize], labels[e.j as usize]);
        if li == lj {
            internal[li as usize - 1] += 2.0 * e.w;
        }
    }
    let mut objective = 0.0;
    for c in 0..k {
        objective += (plus_deg[c] - internal[c]) / bar_deg[c];
    }
    Ok(objective)
}

/// Seeded k-means++ on the rows of `embedding`: D²-weighted seeding, Lloyd
/// iterations, best of `restarts` runs by within-cluster sum of squares
/// (ties keep the earliest restart).
pub fn kmeans_pp(
    embedding: &DMatrix<f64>,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<Assignment> {
    let v = embedding.nrows();
    if k == 0 || k > v {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={v}, got {k}"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be positive".into()));
    }
    let mut best: Option<(f64, Vec<u32>)> = None;
    for restart in 0..restarts {
        let restart_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(restart as u64));
        let (wcss, labels) = lloyd_run(embedding, k, restart_seed);
        match &best {
            Some((best_wcss, _)) if wcss >= *best_wcss => {}
            _ => best = Some((wcss, labels)),
        }
    }
    let (_, labels) = best.unwrap();
    Assignment::new(labels, k)
}

fn lloyd_run(points: &DMatrix<f64>, k: usize, seed: u64) -> (f64, Vec<u32>) {
    let v = points.nrows();
    let dim = points.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sq_dist = |i: usize, centroid: &[f64]| -> f64 {
        let mut acc = 0.0;
        for d in 0..dim {
            let diff = points[(i, d)] - centroid[d];
            acc += diff * diff;
        }
        acc
    };

    // D²-weighted seeding
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..v);
    centroids.push((0..dim).map(|d| points[(first, d)]).collect());
    let mut nearest = vec![f64::INFINITY; v];
    while centroids.len() < k {
        let newest = centroids.last().unwrap();
        let mut total = 0.0;
        for i in 0..v {
            let d2 = sq_dist(i, newest);
            if d2 < nearest[i] {
                nearest[i] = d2;
            }
            total += nearest[i];
        }
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = v - 1;
            for (i, &w) in nearest.iter().enumerate() {
                r -= w;
                if r < 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..v)
        };
        centroids.push((0..dim).map(|d| points[(pick, d)]).collect());
    }

    let mut labels = vec![0u32; v];
    for _ in 0..100 {
        let mut changed = false;
        for i in 0..v {
            let mut best_c = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d2 = sq_dist(i, centroid);
                if d2 < best_d {
                    best_d = d2;
                    best_c = c;
                }
            }
            let new_label = best_c as u32 + 1;
            if labels[i] != new_label {
                labels[i] = new_label;
                changed = true;
            }
        }
        // recompute centroids; repopulate empty clusters with the worst-fit point
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0f64; dim]; k];
        for i in 0..v {
            let c = labels[i] as usize - 1;
            counts[c] += 1;
            for d in 0..dim {
                sums[c][d] += points[(i, d)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..v)
                    .max_by(|&a, &b| {
                        let da = sq_dist(a, &centroids[labels[a] as usize - 1]);
                        let db = sq_dist(b, &centroids[labels[b] as usize - 1]);
                        da.total_cmp(&db)
                    })
                    .unwrap();
                let old = labels[far] as usize - 1;
                counts[old] -= 1;
                for d in 0..dim {
                    sums[old][d] -= points[(far, d)];
                }
                labels[far] = c as u32 + 1;
                counts[c] = 1;
                for d in 0..dim {
                    sums[c][d] = points[(far, d)];
                }
                changed = true;
            }
        }
        for c in 0..k {
            for d in 0..dim {
                centroids[c][d] = sums[c][d] / counts[c] as f64;
            }
        }
        if !changed {
            break;
        }
    }

    let wcss: f64 = (0..v)
        .map(|i| sq_dist(i, &centroids[labels[i] as usize - 1]))
        .sum();
    (wcss, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn assignment(labels: &[u32]) -> Assignment {
        let k = labels.iter().copied().max().unwrap() as usize;
        Assignment::new(labels.to_vec(), k).unwrap()
    }

    #[test]
    fn ari_identical_partitions() {
        let a = assignment(&[1, 2, 3, 1, 2, 3]);
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ari_worked_example_is_zero() {
        let pred = assignment(&[1, 1, 2, 2]);
        let truth = assignment(&[1, 1, 1, 2]);
        assert_eq!(ari(&pred, &truth).unwrap(), 0.0);
    }

    #[test]
    fn ari_invariant_under_relabeling() {
        let truth = assignment(&[1, 1, 2, 2, 3, 3]);
        let relabeled = assignment(&[3, 3, 1, 1, 2, 2]);
        assert_eq!(ari(&relabeled, &truth).unwrap(), 1.0);
    }

    #[test]
    fn ari_symmetric_in_arguments() {
        let mut rng = crate::testutil::rng(2);
        for _ in 0..50 {
            let a = assignment(
                &(0..40)
                    .map(|_| rng.random_range(1..=4u32))
                    .collect::<Vec<_>>(),
            );
            let b = assignment(
                &(0..40)
                    .map(|_| rng.random_range(1..=3u32))
                    .collect::<Vec<_>>(),
            );
            assert_eq!(ari(&a, &b).unwrap(), ari(&b, &a).unwrap());
        }
    }

    #[test]
    fn ari_of_random_assignments_is_near_zero() {
        let truth = assignment(
            &(0..1200)
                .map(|i| (i / 240 + 1) as u32)
                .collect::<Vec<_>>(),
        );
        let mut rng = crate::testutil::rng(8);
        let mut total = 0.0;
        for _ in 0..100 {
            let pred = assignment(
                &(0..1200)
                    .map(|_| rng.random_range(1..=5u32))
                    .collect::<Vec<_>>(),
            );
            total += ari(&pred, &truth).unwrap();
        }
        let mean = total / 100.0;
        assert!(mean.abs() < 0.02, "mean ARI of random labels: {mean}");
    }

    #[test]
    fn ari_length_mismatch() {
        let a = assignment(&[1, 2]);
        let b = assignment(&[1, 2, 1]);
        assert!(matches!(ari(&a, &b), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn bnc_single_cluster_all_positive_is_zero() {
        let g = SignedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 1.0)])
            .unwrap();
        let a = Assignment::new(vec![1, 1, 1, 1], 1).unwrap();
        assert_relative_eq!(bnc_objective(&a, &g).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bnc_invariant_under_relabeling() {
        let mut rng = crate::testutil::rng(14);
        let g = crate::testutil::random_signed_graph(&mut rng, 30, 0.3);
        let labels: Vec<u32> = (0..30).map(|_| rng.random_range(1..=3u32)).collect();
        let a = assignment(&labels);
        let swapped: Vec<u32> = labels.iter().map(|&l| (l % 3) + 1).collect();
        let b = assignment(&swapped);
        assert_relative_eq!(
            bnc_objective(&a, &g).unwrap(),
            bnc_objective(&b, &g).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bnc_empty_cluster_rejected() {
        let g = SignedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let a = Assignment::new(vec![1, 1, 1], 3).unwrap();
        let labels_without_cluster_two = Assignment::new(vec![1, 3, 3], 3).unwrap();
        assert!(bnc_objective(&a, &g).is_ok()); // max label 1: clusters 2,3 not counted
        assert!(matches!(
            bnc_objective(&labels_without_cluster_two, &g),
            Err(Error::EmptyCluster(2))
        ));
    }

    #[test]
    fn kmeans_recovers_separated_clouds() {
        let mut rng = crate::testutil::rng(3);
        let mut pts = DMatrix::zeros(60, 2);
        let mut truth = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            let center = [(0.0, 0.0), (100.0, 0.0), (0.0, 100.0)][c];
            pts[(i, 0)] = center.0 + rng.random::<f64>();
            pts[(i, 1)] = center.1 + rng.random::<f64>();
            truth.push(c as u32 + 1);
        }
        let out = kmeans_pp(&pts, 3, 11, 5).unwrap();
        assert_eq!(ari(&out, &assignment(&truth)).unwrap(), 1.0);
    }

    #[test]
    fn kmeans_k_equals_v_is_exact() {
        let pts = DMatrix::from_row_slice(4, 1, &[0.0, 10.0, 20.0, 30.0]);
        let out = kmeans_pp(&pts, 4, 0, 3).unwrap();
        let mut seen: Vec<u32> = out.as_slice().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2, 3, 4]);
    }

    #[test]
    fn kmeans_two_gaussian_blobs() {
        for seed in 0..20u64 {
            let mut rng = crate::testutil::rng(1000 + seed);
            let mut gauss = |sigma: f64| {
                // Box-Muller
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            let mut pts = DMatrix::zeros(200, 2);
            let mut truth = Vec::new();
            for i in 0..200 {
                let c = i % 2;
                let cx = if c == 0 { 0.0 } else { 5.0 };
                pts[(i, 0)] = cx + gauss(0.1);
                pts[(i, 1)] = gauss(0.1);
                truth.push(c as u32 + 1);
            }
            let out = kmeans_pp(&pts, 2, seed, 10).unwrap();
            assert_eq!(
                ari(&out, &assignment(&truth)).unwrap(),
                1.0,
                "seed {seed} failed"
            );
        }
    }
}
