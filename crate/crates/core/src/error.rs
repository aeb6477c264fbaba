use thiserror::Error;

/// Errors raised while parsing or validating a periodic graph description.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Malformed(String),

    #[error("graph dimension must be at least 1")]
    ZeroDimension,

    #[error("graph has no vertices")]
    NoVertices,

    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),

    #[error("edge {edge} references unknown vertex `{label}`")]
    UnknownVertex { edge: usize, label: String },

    #[error("index dimension mismatch on edge {edge}: expected {expected}, found {found}")]
    IndexDimensionMismatch {
        edge: usize,
        expected: usize,
        found: usize,
    },

    #[error("disconnected quotient graph")]
    DisconnectedQuotient,

    #[error("graph is not {dimension}-periodic: bridge indices span only {rank} direction(s)")]
    InsufficientPeriodRank { rank: usize, dimension: usize },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

/// Errors raised by spectral and effective-mass computations.
///
/// These are refusals rather than bugs: the requested quantity is not
/// defined (degenerate eigenvalue, resonant energy) or the inputs fall
/// outside the method's domain.
#[derive(Debug, Error)]
pub enum ComputeError {
    #[error("degenerate band edge: eigenvalue gap {gap:.3e} below tolerance at band {band}")]
    DegenerateEdge { band: usize, gap: f64 },

    #[error("band {0} is flat; it has no isolated extremizer")]
    FlatBand(usize),

    #[error("band index {band} out of range (graph has {count} bands)")]
    BandOutOfRange { band: usize, count: usize },

    #[error("grid resolution {0} too coarse; need at least 8 points per axis")]
    GridTooCoarse(usize),

    #[error("quasimomentum has {found} components, graph dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error("finite-difference step {0} outside (0, 0.1]")]
    InvalidStep(f64),

    #[error("degenerate effective mass: the form matrix is singular")]
    SingularForm,

    #[error("resonance point: energy {0} lies on the Dirichlet lattice (pi k)^2")]
    ResonantEnergy(f64),

    #[error("metric spectrum requires the normalized flavor")]
    NotNormalized,

    #[error("density-of-states mass is defined for dimension 3, got {0}")]
    DosDimension(usize),

    #[error("density-of-states mass requires positive mass eigenvalues")]
    NonPositiveMass,
}
