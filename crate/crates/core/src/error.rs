//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The scalar equilibrium residual has no sign change on the scan bracket.
    #[error("no root bracketed on [{lo} mV, {hi} mV]")]
    NoRootInBracket { lo: f64, hi: f64 },

    /// More than one stable equilibrium (or none) found on the bracket.
    #[error("equilibrium is not unique and stable: {0}")]
    AmbiguousEquilibrium(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    /// The drift matrix has real eigenvalues; the rotation normal form needs a
    /// complex-conjugate pair.
    #[error("drift matrix has real eigenvalues (lambda^2 - det = {discriminant:.6e} >= 0)")]
    RealEigenvalues { discriminant: f64 },

    /// Transform to rescaled coordinates requires nonzero noise amplitude.
    #[error("degenerate transform: noise amplitude sigma = 0")]
    DegenerateTransform,

    /// A constructed linearized system failed one of its algebraic identities.
    #[error("linearization invariant violated: {0}")]
    InvariantViolated(String),

    /// Rate queries are meaningless for the hard-threshold firing rule.
    #[error("hard-threshold firing has no pointwise hazard rate")]
    HardThresholdHasNoRate,

    /// A thinning proposal exceeded its local bound; the step size is too
    /// coarse for the configured hazard.
    #[error("thinning bound exceeded: hazard {rate:.6e} > bound {bound:.6e} at r = {r:.4}")]
    ThinningBoundExceeded { rate: f64, bound: f64, r: f64 },

    #[error("need at least {need} quiescent segments, got {got}")]
    InsufficientSegments { need: usize, got: usize },

    #[error("degenerate regression data: {0}")]
    DegenerateData(String),

    #[error("parameter file: {0}")]
    ParameterFile(String),

    #[error("{0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
