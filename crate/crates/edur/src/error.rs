use thiserror::Error;

/// Errors surfaced by the simulator.
#[derive(Debug, Clone, Error)]
pub enum EdurError {
    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("{what} = {value} outside valid range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid density matrix: {reason}")]
    InvalidState { reason: String },

    #[error("measurement family is not complete (deviation {deviation:.3e})")]
    IncompleteFamily { deviation: f64 },

    #[error("internal consistency check failed: general and binary forms disagree by {delta:.3e}")]
    InternalConsistency { delta: f64 },

    #[error("negative radicand {radicand:.3e} in inequality evaluation")]
    NegativeRadicand { radicand: f64 },

    #[error("quadrature failed to converge (last refinement moved result by {residual:.3e})")]
    QuadratureAccuracy { residual: f64 },

    #[error("count table carries no events")]
    EmptyData,

    #[error("three-state run is incomplete: {missing}")]
    ProtocolIncomplete { missing: &'static str },

    #[error("conditioning projector has zero probability on this state")]
    ZeroConditioningProbability,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, EdurError>;
