use thiserror::Error;

/// Errors raised by state construction, circuit evaluation and benchmarks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),

    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("variances ({var_x}, {var_p}) violate the uncertainty bound var_x * var_p >= 1")]
    Unphysical { var_x: f64, var_p: f64 },

    #[error("covariance matrix is not symmetric")]
    Asymmetric,

    #[error("covariance violates cov + i*Omega >= 0 (min eigenvalue {0})")]
    NotPhysical(f64),

    #[error("degenerate measurement marginal (variance {0})")]
    DegenerateMarginal(f64),

    #[error("clone covariance has x-p correlation {0}; only diagonal covariances are supported")]
    NonDiagonal(f64),

    #[error("expected a {expected}-mode state, got {got}")]
    ModeCount { expected: usize, got: usize },

    #[error("known-phase alphabet requires unit amplitude gain, got {0}")]
    KnownPhaseGain(f64),

    #[error("alphabet cannot be sampled: {0}")]
    NotSamplable(&'static str),

    #[error("trajectory count must be positive")]
    EmptyBatch,

    #[error("unsupported combination: {0}")]
    Unsupported(&'static str),

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if value < lo || value > hi {
        return Err(Error::OutOfRange { name, value, range });
    }
    Ok(())
}
