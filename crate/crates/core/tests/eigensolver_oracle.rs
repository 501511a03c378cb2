//! Iterative eigensolver against the dense oracle, plus determinism and
//! basis invariants.

use signed_mbo::graph::{build_laplacian, LaplacianKind};
use signed_mbo::spectral::{
    dense_smallest, max_residual, smallest_eigenpairs_with, EigsOptions,
};
use signed_mbo::testutil;

fn forced_iterative(tol: f64, seed: u64) -> EigsOptions {
    let mut opts = EigsOptions::new(tol, seed);
    opts.dense_threshold = 0;
    opts
}

#[test]
fn iterative_matches_dense_on_random_graphs() {
    let mut rng = testutil::rng(314);
    for round in 0..8u64 {
        let v = 80 + (round as usize * 17) % 120;
        let g = testutil::random_signed_graph(&mut rng, v, 0.12);
        let kind = if round % 2 == 0 {
            LaplacianKind::Signed
        } else {
            LaplacianKind::SignedSymmetric
        };
        let op = build_laplacian(&g, kind).unwrap();
        let basis = smallest_eigenpairs_with(&op, 10, &forced_iterative(1e-9, round)).unwrap();
        let (oracle, _) = dense_smallest(&op.to_dense(), 10);
        for i in 0..10 {
            assert!(
                (basis.eigenvalues()[i] - oracle[i]).abs() < 1e-8,
                "round {round} pair {i}: {} vs {}",
                basis.eigenvalues()[i],
                oracle[i]
            );
        }
        assert!(max_residual(&op, &basis) < 1e-8);
        let gram = basis.eigenvectors().transpose() * basis.eigenvectors();
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - expect).abs() < 1e-8,
                    "orthonormality defect at ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn same_seed_is_bitwise_identical() {
    let mut rng = testutil::rng(11);
    let g = testutil::random_signed_graph(&mut rng, 150, 0.1);
    let op = build_laplacian(&g, LaplacianKind::Signed).unwrap();
    let a = smallest_eigenpairs_with(&op, 8, &forced_iterative(1e-9, 42)).unwrap();
    let b = smallest_eigenpairs_with(&op, 8, &forced_iterative(1e-9, 42)).unwrap();
    assert_eq!(a.eigenvalues().as_slice(), b.eigenvalues().as_slice());
    assert_eq!(a.eigenvectors().as_slice(), b.eigenvectors().as_slice());
}

#[test]
fn block_model_bottom_pairs_match_oracle() {
    // clustered spectra (tight bottom group, wide gap) exercise the
    // restart/deflation path differently from homogeneous random graphs
    let params = signed_mbo::generators::SsbmParams::equal_clusters(200, 5, 0.3, 0.1, 77);
    let (g, _) = signed_mbo::generators::ssbm(&params).unwrap();
    let op = build_laplacian(&g, LaplacianKind::SignedSymmetric).unwrap();
    let basis = smallest_eigenpairs_with(&op, 5, &forced_iterative(1e-9, 5)).unwrap();
    let (oracle, _) = dense_smallest(&op.to_dense(), 5);
    for i in 0..5 {
        assert!((basis.eigenvalues()[i] - oracle[i]).abs() < 1e-8);
    }
}
