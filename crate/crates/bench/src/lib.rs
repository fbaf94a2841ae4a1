//! Shared fixtures for the benchmark targets.

use metasir::{NetworkParams, Realization, SamplingConfig};

pub fn fig_params() -> NetworkParams {
    NetworkParams::new(1.0, 4.0, 0.5).unwrap()
}

/// One realization at the default curve-estimation window (~6e3 points).
pub fn standard_realization(seed: u64) -> Realization {
    let p = fig_params();
    let cfg = SamplingConfig::from_tolerance(&p, 1e-4, seed).unwrap();
    metasir::pointproc::sample_realization(&p, &cfg)
}
