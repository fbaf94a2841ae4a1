use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The realization has no interferers, so the rate-control threshold is
    /// unbounded. Callers decide the resample-vs-abort policy.
    #[error("realization has no interferers; the SIR threshold is unbounded")]
    EmptyRealization,

    /// An operation needed the k nearest interferers but the realization has
    /// fewer points.
    #[error("realization has {have} interferers, need at least {need}")]
    InsufficientInterferers { have: usize, need: usize },

    /// Interference is exactly zero, so the partial-information threshold is
    /// undefined.
    #[error("interference power is zero; partial-information threshold undefined")]
    ZeroInterference,

    /// Log-gamma evaluated at a pole (non-positive integer).
    #[error("log-gamma pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature error estimate {error:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureFailure { error: f64, tol: f64 },

    /// Alternating-sum reconstruction lost too many digits.
    #[error("binomial-mixture weight {min_weight:.3e} below cancellation floor")]
    CancellationError { min_weight: f64 },

    /// A quasi-closed form is only available for path-loss exponent 4.
    #[error("no quasi-closed form for path-loss exponent {alpha}; only alpha = 4 is supported")]
    UnsupportedExponent { alpha: f64 },

    /// Series evaluation outside its documented accuracy range.
    #[error("argument {argument} exceeds the reliable range (limit {limit})")]
    AccuracyLoss { argument: f64, limit: f64 },

    /// A domain-type invariant was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
