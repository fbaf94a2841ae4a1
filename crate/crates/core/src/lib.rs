//! SIR meta distribution toolkit for Poisson bipolar networks.
//!
//! The library computes, bounds, and Monte Carlo-validates three families of
//! quantities for interference-limited Poisson bipolar networks with
//! Rayleigh fading:
//!
//! - the **meta distribution** of the SIR: the distribution, over network
//!   realizations, of the per-link conditional success probability;
//! - the **rate-control threshold distribution**: the distribution of the
//!   per-link SIR threshold that pins every link at a target reliability,
//!   together with its ultrareliable and partial-information quasi-closed
//!   forms and the k-nearest-interferer lower bound;
//! - **throughput densities** under rate control and under a deterministic
//!   SIR threshold.
//!
//! Exact per-realization computations live in [`model`], Poisson sampling in
//! [`pointproc`], closed-form and semi-analytic results in [`analytics`],
//! and the seeded parallel Monte Carlo engine in [`mc`].

// `!(x > 0.0)` is the deliberate parameter-guard idiom here: unlike
// `x <= 0.0`, it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod mc;
pub mod model;
pub mod pointproc;
pub mod quad;
pub mod special;

pub use analytics::{
    CurveKind, DistributionCurve, ExpectedLogRate, GilPelaezOutcome, LogRateMethod,
    ThroughputDensities,
};
pub use error::{Error, Result};
pub use mc::{
    DualityReport, Figure2Curves, Figure2Data, Figure3Data, McConfig, McCurve, McEstimate,
    ThresholdInfo, ThroughputEstimate, ThroughputTable,
};
pub use model::{
    InterferencePower, LinkRecord, NetworkParams, Realization, ReliabilityTarget, SirThreshold,
    SuccessProfile,
};
pub use pointproc::{Rect, SamplingConfig};

/// Complex scalar used for imaginary moment orders.
pub use num_complex::Complex64;
