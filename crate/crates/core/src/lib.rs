//! Clustering of signed graphs by threshold dynamics on graph Laplacians.
//!
//! The pipeline: build a signed Laplacian ([`graph`]), take its bottom
//! eigenpairs ([`spectral`]), then alternate reduced-basis diffusion with
//! row-wise argmax thresholding until the assignment stops changing
//! ([`mbo`]). Semi-supervision enters as weighted must/cannot edges, as
//! fidelity/avoidance forcing on the assignment matrix, or as anchored rows.
//!
//! [`generators`] provides seeded block-model and preferential-attachment
//! benchmarks, [`metrics`] the adjusted Rand index, a balanced-cut objective,
//! and a k-means++ baseline, and [`pipelines`] the image / time-series /
//! count-matrix ingestion transforms. [`io`] covers Matrix Market and CSV.

pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod mbo;
pub mod metrics;
pub mod pipelines;
pub mod spectral;

#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
pub use graph::{
    build_laplacian, quadratic_form, signed_gl_energy, DegreeMatrices, Edge, LaplacianKind,
    LaplacianOperator, SignedGraph,
};
pub use mbo::{
    anchored_propagator, apply_must_cannot, diffusion_step, init_from_eigenvector, init_random,
    project_simplex, run_mbo, stop_check, threshold, AnchorMask, Assignment,
    CharacteristicMatrix, ConstraintSet, DiffusionForm, MboParams, MboTrace, TraceRecord,
};
pub use spectral::{bottom_nonzero_eigenvector, smallest_eigenpairs, EigsOptions, SpectralBasis};
