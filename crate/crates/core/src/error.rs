use thiserror::Error;

/// Errors produced by graph construction, spectral solvers, the threshold
/// dynamics engine, and the data-ingestion transforms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: u32, j: u32, reason: String },

    #[error("node {0} is isolated (zero signed degree); normalized Laplacians are undefined")]
    IsolatedNode(u32),

    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("no eigenvalue exceeds the zero tolerance; spectrum is numerically zero")]
    AllZeroSpectrum,

    #[error("eigenvector is constant; equal-width binning is undefined")]
    DegenerateEigenvector,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(u32),

    #[error("row {0} has zero variance; correlation is undefined")]
    ZeroVarianceRow(usize),

    #[error("non-positive price at instrument {instrument}, time {time}")]
    NonPositivePrice { instrument: usize, time: usize },

    #[error("degenerate image: all candidate color differences are equal")]
    DegenerateImage,

    #[error("count matrix has no nonzero entries")]
    EmptyMatrix,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generator produced isolated nodes in {0} consecutive attempts")]
    DegenerateDraw(u32),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
