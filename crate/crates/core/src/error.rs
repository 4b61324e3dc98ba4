use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| entry = {max_deviation:e})")]
    NonHermitianInput { max_deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator has no spectral gap: every eigenvalue lies in the ground band")]
    NoGap,
    #[error("no spectral gap at step {step} (s = {s})")]
    NoGapAtStep { step: usize, s: f64 },
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("support index {index} out of range for {n_qubits} qubits")]
    SupportOutOfRange { index: usize, n_qubits: usize },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("term is not normalized: eigenvalues span [{min:e}, {max:e}], expected [0, 1] with minimum 0")]
    NotNormalizedTerm { min: f64, max: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("success probability is zero; no post-measurement state exists")]
    ZeroSuccessProbability,
    #[error("state has zero overlap with the ground space")]
    ZeroGroundOverlap,
    #[error("adaptive repetition reached k_max = {k_max} at trace distance {distance:e} (target {target:e})")]
    KMaxExceeded {
        k_max: u64,
        distance: f64,
        target: f64,
    },
    #[error("required step count did not converge below 2^18 steps")]
    NonConvergent,
    #[error("path has zero step differences everywhere")]
    DegeneratePath,
    #[error("stabilizer generators {0} and {1} do not commute")]
    NonCommutingGenerators(usize, usize),
    #[error("stabilizer generators are not independent")]
    DependentGenerators,
    #[error("instance is unsatisfiable")]
    UnsatisfiableInstance,
    #[error("instance construction failed: {0}")]
    ConstructionFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}
