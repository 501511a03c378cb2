//! Seeded helpers shared by unit and integration tests. Not part of the API.

use crate::graph::SignedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_interval(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

/// Erdős–Rényi-style signed graph: each pair present with probability `p`,
/// weight uniform in [-1, 1]. Nodes left isolated get one extra random edge
/// so normalized Laplacians are defined.
pub fn random_signed_graph(rng: &mut ChaCha8Rng, v: usize, p: f64) -> SignedGraph {
    assert!(v >= 2);
    let mut triples = Vec::new();
    let mut degree = vec![0usize; v];
    for i in 0..v as u32 {
        for j in (i + 1)..v as u32 {
            if rng.random::<f64>() < p {
                let w = rng.random::<f64>() * 2.0 - 1.0;
                if w != 0.0 {
                    triples.push((i, j, w));
                    degree[i as usize] += 1;
                    degree[j as usize] += 1;
                }
            }
        }
    }
    for i in 0..v {
        if degree[i] == 0 {
            let mut j = rng.random_range(0..v);
            while j == i {
                j = rng.random_range(0..v);
            }
            let w = if rng.random::<bool>() { 0.5 } else { -0.5 };
            triples.push((i.min(j) as u32, i.max(j) as u32, w));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    SignedGraph::from_edges(v, triples).unwrap()
}
