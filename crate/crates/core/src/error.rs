use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical kernels.
///
/// Variants split into two families: precondition/validation failures
/// (bad sizes, bad parameters, non-Hermitian input) and numerical-check
/// failures (an asserted invariant did not hold). [`Error::is_numerical`]
/// tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} is out of range for a {n_sites}-site register")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("site indices must be distinct, got {0:?}")]
    RepeatedSite(Vec<usize>),

    #[error("register size {0} is unsupported (expected 1..=8 sites)")]
    RegisterSize(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("expected {expected} Yangian weights, got {got}")]
    WeightCount { expected: usize, got: usize },

    #[error("cluster size {0} is not supported here (expected 3 or 4 sites)")]
    UnsupportedClusterSize(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("couplings are not in the commutant of Q (max |[Q,H]| = {norm:.3e})")]
    NotInCommutant { norm: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("state is not a spin eigenstate: {0}")]
    NotSpinEigenstate(String),

    #[error("mixing angle undefined: B and delta are both zero")]
    DegenerateAngle,

    #[error("numerical check failed: {0}")]
    NumericalCheck(String),

    #[error("integration unstable at t = {t}: {detail}; increase the number of steps")]
    Unstable { t: f64, detail: String },
}

impl Error {
    /// True for failures of an asserted numerical invariant, as opposed to
    /// invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalCheck(_) | Error::Unstable { .. })
    }
}
