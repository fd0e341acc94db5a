use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Model-level failures raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator `{label}` is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NonHermitianInput { label: String, deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid duration {0}: must be finite and non-negative")]
    InvalidDuration(f64),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("Hilbert-space dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("no generator bound to time index {0}")]
    MissingGenerator(usize),

    #[error("time index {index} out of range for {n_times} time coordinates")]
    TimeIndexOutOfRange { index: usize, n_times: usize },

    #[error("invalid temporal metric: {0}")]
    InvalidMetric(String),

    #[error("target is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NonUnitaryTarget { deviation: f64 },

    #[error("eigenphase {phase} lies on the principal-branch cut at -pi; logarithm is ambiguous")]
    DegenerateBranch { phase: f64 },

    #[error("eigendecomposition failed to converge")]
    Decomposition,

    #[error("energy budget must be positive, got {0}")]
    NonPositiveBudget(f64),

    #[error("edge {edge} references missing node `{node}`")]
    DanglingEdge { edge: usize, node: String },

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid edge {edge}: {reason}")]
    InvalidEdge { edge: usize, reason: String },

    #[error("negative input: {0}")]
    NegativeInput(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("invalid rate {from} -> {to}: {reason}")]
    InvalidRate {
        from: String,
        to: String,
        reason: String,
    },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("time grid is not ascending at sample {0}")]
    NonAscendingGrid(usize),

    #[error("no unique stationary distribution: closed classes {classes:?}")]
    NoStationaryDistribution { classes: Vec<Vec<String>> },

    #[error("equilibrium not reached within horizon {horizon}")]
    NotReachedWithinGrid { horizon: f64 },

    #[error("invalid epsilon {0}: must lie in (0, 1)")]
    InvalidEpsilon(f64),

    #[error(
        "energy ordering violated: energy({a}) = {energy_a} must exceed energy({b}) = {energy_b}"
    )]
    OrderingViolation {
        a: String,
        b: String,
        energy_a: f64,
        energy_b: f64,
    },

    #[error("no real fourth curvature: radicand {0} is negative")]
    ComplexRoots(f64),

    #[error("root quadruple violates the Descartes relation (residual {0:e})")]
    InvalidRoot(f64),
}
