//! The row argmax used by the engine must select the same vertex as the
//! projection-then-nearest-vertex route, for both the probability simplex
//! and its ±1 counterpart. Distances are formed with a shared squared norm
//! so exact ties in the input stay exact ties in the comparison.

use rand::Rng;
use signed_mbo::mbo::project_simplex;
use signed_mbo::testutil;

fn argmax_set(x: &[f64]) -> Vec<usize> {
    let best = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the probability-simplex vertices nearest to the projection.
fn nearest_vertex_set_via_projection(x: &[f64]) -> Vec<usize> {
    let p = project_simplex(x);
    let norm2: f64 = p.iter().map(|v| v * v).sum();
    let dists: Vec<f64> = p.iter().map(|&pk| norm2 - 2.0 * pk + 1.0).collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    dists
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == best)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the ± simplex vertices nearest to `x` directly.
fn nearest_pm_vertex_set(x: &[f64]) -> Vec<usize> {
    let k = x.len();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let sum: f64 = x.iter().sum();
    // ‖x - e±_k‖² = ‖x‖² - 2(2x_k - sum) + K
    let dists: Vec<f64> = x
        .iter()
        .map(|&xk| norm2 - 2.0 * (2.0 * xk - sum) + k as f64)
        .collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    dists
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == best)
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn argmax_agrees_with_projection_route() {
    let mut rng = testutil::rng(20_000);
    for k in 2..=10usize {
        for row in 0..1000 {
            let mut x: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            // sprinkle deliberate exact ties
            if row % 20 == 0 {
                let dup = rng.random_range(0..k);
                let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                x[dup] = max;
            }
            let direct = argmax_set(&x);
            let projected = nearest_vertex_set_via_projection(&x);
            let pm = nearest_pm_vertex_set(&x);
            assert_eq!(direct, projected, "K={k} row={row} x={x:?}");
            assert_eq!(direct, pm, "K={k} row={row} x={x:?}");
        }
    }
}

#[test]
fn all_equal_row_ties_every_vertex() {
    let x = vec![0.25; 4];
    assert_eq!(argmax_set(&x), vec![0, 1, 2, 3]);
    assert_eq!(nearest_vertex_set_via_projection(&x), vec![0, 1, 2, 3]);
    assert_eq!(nearest_pm_vertex_set(&x), vec![0, 1, 2, 3]);
}
