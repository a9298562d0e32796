use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coupling set: {0}")]
    InvalidCoupling(String),

    #[error("undersampled harmonic content: grid_size {grid_size} < 4*R = {min}")]
    Undersampled { grid_size: usize, min: usize },

    #[error("loop through origin: winding undefined (critical point), r_min = {r_min:e}")]
    LoopThroughOrigin { r_min: f64 },

    #[error("inconsistent winding: accumulated {accumulated}, quadrature {quadrature}")]
    InconsistentWinding { accumulated: f64, quadrature: f64 },

    #[error("gauge singularity at k = {k}, phi = {phi}")]
    GaugeSingularity { k: f64, phi: f64 },

    #[error("band touching at k = {k}, phi = {phi}")]
    BandTouching { k: f64, phi: f64 },

    #[error("Chern undefined at criticality, r_min = {r_min:e}")]
    ChernAtCriticality { r_min: f64 },

    #[error("inconsistent Chern number: raw value {raw}")]
    InconsistentChern { raw: f64 },

    #[error("chain shorter than interaction range: n_sites {n_sites} <= R {range}")]
    ChainTooShort { n_sites: usize, range: usize },

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("matrix is not finite and symmetric: {0}")]
    BadMatrix(String),

    #[error("projectors overlap: edge_depth {edge_depth} > N/2 with N = {n_sites}")]
    ProjectorsOverlap { edge_depth: usize, n_sites: usize },

    #[error("isolated-site structure only guaranteed for pure cases")]
    NotPure,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
