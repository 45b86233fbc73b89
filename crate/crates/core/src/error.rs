//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Spectral parameter outside the half-plane where the principal
    /// operator's denominators stay positive.
    #[error("spectral parameter out of domain: Re(E) = {re_e} lies above the sector threshold {threshold}")]
    DomainViolation { re_e: f64, threshold: f64 },

    #[error("mode ceiling exceeded: catalog would hold {needed} modes, ceiling is {ceiling}")]
    ModeCeiling { needed: usize, ceiling: usize },

    #[error("sector dimension ceiling exceeded: dimension {dim} is above {ceiling}")]
    DimensionCeiling { dim: usize, ceiling: usize },

    #[error("spectral sum did not converge: tail bound {tail:.3e} still above tolerance at the internal term ceiling")]
    SpectralSumTail { tail: f64 },

    #[error(
        "quadrature tolerance not met: error estimate {error:.3e} above requested {requested:.3e}"
    )]
    QuadratureTolerance { error: f64, requested: f64 },

    /// No root bracket: the lowest eigenvalue curve does not change sign
    /// below the sector threshold, so the truncation binds no state.
    #[error("no sign change in bracket [{lo}, {hi}]: omega0(lo) = {omega_lo:.6e}, omega0(hi) = {omega_hi:.6e}; no bound state below threshold {threshold} in this truncation")]
    NoBinding {
        lo: f64,
        hi: f64,
        omega_lo: f64,
        omega_hi: f64,
        threshold: f64,
    },

    #[error("matrix is singular at the requested spectral parameter (Re(E) = {re_e})")]
    SingularAt { re_e: f64 },

    #[error("iteration limit reached in {context} after {iterations} steps")]
    IterationLimit {
        context: &'static str,
        iterations: usize,
    },

    #[error(
        "eigenvector tracking lost: adjacent-grid overlap {overlap:.3} below 0.9 after refinement"
    )]
    TrackingLost { overlap: f64 },

    #[error("Feynman-Hellmann derivative is non-negative ({value:.3e}); eigenvalue flow must be strictly decreasing")]
    NonNegativeDerivative { value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
