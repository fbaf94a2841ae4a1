//! Seeded, parallel Monte Carlo experiments: empirical meta-distribution and
//! threshold-ccdf curves, the per-realization duality verifier, throughput
//! estimators, interference-law validation, and figure-data generation.
//!
//! Reproducibility contract: every estimate is a deterministic function of
//! (inputs, master_seed), independent of the worker count. Each realization
//! index derives its own stream via `pointproc::mix_seed`; per-index results
//! are collected in index order and reduced serially.

use rayon::prelude::*;

use crate::analytics::{self, CurveKind, DistributionCurve, ThroughputDensities};
use crate::error::{Error, Result};
use crate::model::{
    self, LinkRecord, NetworkParams, Realization, ReliabilityTarget, SirThreshold,
    SuccessProfile,
};
use crate::pointproc::{self, Rect, SamplingConfig};

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    n_realizations: usize,
    master_seed: u64,
    truncation_tol: f64,
    worker_hint: Option<usize>,
}

impl McConfig {
    /// Defaults: truncation tolerance 1e-4 (tightened by ultrareliable
    /// callers), global worker pool.
    pub fn new(n_realizations: usize, master_seed: u64) -> Result<Self> {
        if n_realizations == 0 {
            return Err(Error::InvalidParameter(
                "n_realizations must be >= 1".into(),
            ));
        }
        Ok(Self {
            n_realizations,
            master_seed,
            truncation_tol: 1e-4,
            worker_hint: None,
        })
    }

    pub fn with_truncation_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(
                "truncation_tol must be positive".into(),
            ));
        }
        self.truncation_tol = tol;
        Ok(self)
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.worker_hint = workers.filter(|&w| w > 0);
        self
    }

    pub fn n_realizations(&self) -> usize {
        self.n_realizations
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    pub fn worker_hint(&self) -> Option<usize> {
        self.worker_hint
    }
}

/// One scalar Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation / sqrt(n).
    pub std_error: f64,
    pub n: usize,
    /// Empty-realization resamples consumed while producing the n samples.
    pub resample_count: usize,
}

/// A Monte Carlo ccdf with per-point estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct McCurve {
    curve: DistributionCurve,
    estimates: Vec<McEstimate>,
}

impl McCurve {
    pub fn curve(&self) -> &DistributionCurve {
        &self.curve
    }

    pub fn estimates(&self) -> &[McEstimate] {
        &self.estimates
    }

    pub fn resample_count(&self) -> usize {
        self.estimates.first().map_or(0, |e| e.resample_count)
    }
}

/// Which information the threshold estimator may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdInfo {
    /// Exact root-solve over every interferer in the window.
    Full,
    /// AM-GM bound from the k nearest interferers.
    KNearest(usize),
    /// The k -> infinity limit log(1/(1-eps)) R^-alpha / I.
    PartialInfoLimit,
}

// ---------------------------------------------------------------------------
// Parallel driver
// ---------------------------------------------------------------------------

/// Maps `f` over realization indices, honoring the worker hint. Results come
/// back in index order so downstream reductions are order-fixed.
fn run_indexed<T: Send>(cfg: &McConfig, f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    let n = cfg.n_realizations() as u64;
    match cfg.worker_hint() {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("worker pool")
            .install(|| (0..n).into_par_iter().map(&f).collect()),
        None => (0..n).into_par_iter().map(&f).collect(),
    }
}

const MAX_RESAMPLES: usize = 100_000;

fn resample_cap_error() -> Error {
    Error::InvalidParameter(format!(
        "exceeded {MAX_RESAMPLES} consecutive empty realizations; window too small"
    ))
}

/// Samples until the predicate accepts, counting rejected attempts.
fn sample_until(
    params: &NetworkParams,
    window: &SamplingConfig,
    master_seed: u64,
    index: u64,
    accept: impl Fn(&Realization) -> bool,
) -> Result<(Realization, usize)> {
    for attempt in 0..MAX_RESAMPLES {
        let seed = pointproc::mix_seed(master_seed, index, attempt as u64);
        let r = pointproc::sample_realization(params, &window.with_seed(seed));
        if accept(&r) {
            return Ok((r, attempt));
        }
    }
    Err(resample_cap_error())
}

fn window_config(params: &NetworkParams, cfg: &McConfig) -> Result<SamplingConfig> {
    SamplingConfig::from_tolerance(params, cfg.truncation_tol(), cfg.master_seed())
}

// ---------------------------------------------------------------------------
// Streaming radial path
// ---------------------------------------------------------------------------

// The full-information solve and the interference functional only need the
// interferer distances. For ultrareliable targets the per-realization point
// counts reach ~1e6, where materializing and sorting points dominates; the
// streaming path folds each squared distance into eight power sums
// S_k = sum c^k as it is drawn. Every series argument t*c stays below
// eps/(1-eps) <= X_CUT, so the truncated log1p series is exact to ~1e-11
// relative (see model::series_neg_log).
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialTally {
    sums: [f64; 8],
    c_max: f64,
    n: usize,
}

impl RadialTally {
    pub(crate) fn new() -> Self {
        Self {
            sums: [0.0; 8],
            c_max: 0.0,
            n: 0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, c: f64) {
        if c > self.c_max {
            self.c_max = c;
        }
        self.n += 1;
        let c2 = c * c;
        let c3 = c2 * c;
        let c4 = c2 * c2;
        let s = &mut self.sums;
        s[0] += c;
        s[1] += c2;
        s[2] += c3;
        s[3] += c4;
        s[4] += c4 * c;
        s[5] += c4 * c2;
        s[6] += c4 * c3;
        s[7] += c4 * c4;
    }

    /// Bisection for P_s(t*) = nu on the power-sum series; the bracket
    /// [0, (e^L - 1)/c_max] always contains the root because a single factor
    /// already exceeds the target at its upper end.
    pub(crate) fn solve_threshold(&self, target: ReliabilityTarget) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::EmptyRealization);
        }
        let l = target.log_inv_reliability();
        let x_ub = l.exp_m1();
        debug_assert!(
            x_ub <= model::X_CUT,
            "streaming solve outside its series gate"
        );
        let mut lo = 0.0f64;
        let mut hi = x_ub / self.c_max;
        if model::series_neg_log(&self.sums, hi) <= l {
            // guard against the single-factor bound being flattened by
            // rounding; one doubling step restores the bracket
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if model::series_neg_log(&self.sums, mid) > l {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-10 * lo {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// True when the power-sum series covers every bracketed evaluation.
fn streaming_gate(target: ReliabilityTarget) -> bool {
    target.log_inv_reliability().exp_m1() <= model::X_CUT
}

/// One streamed realization folded into a tally; alpha = 4 gets the cheap
/// coefficient kernel.
fn stream_tally(
    params: &NetworkParams,
    window_radius: f64,
    seed: u64,
) -> RadialTally {
    let mut tally = RadialTally::new();
    let alpha = params.path_loss_exponent();
    let r = params.link_distance();
    if alpha == 4.0 {
        let r4 = (r * r) * (r * r);
        pointproc::stream_radii_sq(params, window_radius, seed, &mut |r2| {
            tally.push(r4 / (r2 * r2));
        });
    } else {
        let ra = model::pow_alpha(r, alpha);
        let half_alpha = 0.5 * alpha;
        pointproc::stream_radii_sq(params, window_radius, seed, &mut |r2| {
            tally.push(ra * r2.powf(-half_alpha));
        });
    }
    tally
}

// ---------------------------------------------------------------------------
// Curve assembly
// ---------------------------------------------------------------------------

fn indicator_estimate(count: usize, n: usize, resample_count: usize) -> McEstimate {
    let p = count as f64 / n as f64;
    let var = if n > 1 {
        p * (1.0 - p) * n as f64 / (n as f64 - 1.0)
    } else {
        0.0
    };
    McEstimate {
        value: p,
        std_error: (var / n as f64).sqrt(),
        n,
        resample_count,
    }
}

/// Empirical ccdf of `samples` on `grid` (strict ">", per-point standard
/// errors from the indicator variance).
fn ccdf_curve(
    mut samples: Vec<f64>,
    grid: &[f64],
    kind: CurveKind,
    resample_count: usize,
) -> Result<McCurve> {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len();
    let mut values = Vec::with_capacity(grid.len());
    let mut estimates = Vec::with_capacity(grid.len());
    for &x in grid {
        let count = n - samples.partition_point(|&v| v <= x);
        let est = indicator_estimate(count, n, resample_count);
        values.push(est.value);
        estimates.push(est);
    }
    Ok(McCurve {
        curve: DistributionCurve::new(grid.to_vec(), values, kind)?,
        estimates,
    })
}

fn mean_estimate(samples: &[f64], resample_count: usize) -> McEstimate {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    McEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        n,
        resample_count,
    }
}

fn validate_grid(grid: &[f64], lo: f64, hi: f64, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("empty {what} grid")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "{what} grid must be strictly ascending"
        )));
    }
    if grid.iter().any(|&g| !(g > lo && g < hi)) {
        return Err(Error::InvalidParameter(format!(
            "{what} grid must lie in ({lo}, {hi})"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Mean conditional success probability E[P_s(theta)], the Monte Carlo
/// counterpart of `analytics::standard_success_probability`.
pub fn estimate_success_probability(
    params: &NetworkParams,
    theta: SirThreshold,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let window = window_config(params, cfg)?;
    let samples: Vec<f64> = run_indexed(cfg, |i| {
        let seed = pointproc::mix_seed(cfg.master_seed(), i, 0);
        let r = pointproc::sample_realization(params, &window.with_seed(seed));
        model::conditional_success(&r, params, theta)
    });
    Ok(mean_estimate(&samples, 0))
}

/// Empirical meta distribution: fraction of realizations with
/// P_s(theta) > x per grid point. Empty realizations are legitimate samples
/// here (P_s = 1).
pub fn estimate_md(
    params: &NetworkParams,
    theta: SirThreshold,
    x_grid: &[f64],
    cfg: &McConfig,
) -> Result<McCurve> {
    validate_grid(x_grid, 0.0, 1.0, "reliability")?;
    let window = window_config(params, cfg)?;
    let samples: Vec<f64> = run_indexed(cfg, |i| {
        let seed = pointproc::mix_seed(cfg.master_seed(), i, 0);
        let r = pointproc::sample_realization(params, &window.with_seed(seed));
        model::conditional_success(&r, params, theta)
    });
    ccdf_curve(samples, x_grid, CurveKind::MetaDistribution, 0)
}

/// Empirical ccdf of the rate-control threshold under the selected
/// information model. Empty (or too-small, for k-nearest) realizations are
/// resampled with the next counter seed and counted.
pub fn estimate_threshold_ccdf(
    params: &NetworkParams,
    target: ReliabilityTarget,
    t_grid: &[f64],
    cfg: &McConfig,
    info: ThresholdInfo,
) -> Result<McCurve> {
    validate_grid(t_grid, 0.0, f64::INFINITY, "threshold")?;
    let window = window_config(params, cfg)?;
    let stream = streaming_gate(target) && !matches!(info, ThresholdInfo::KNearest(_));

    let results: Vec<Result<(f64, usize)>> = run_indexed(cfg, |i| {
        if stream {
            for attempt in 0..MAX_RESAMPLES {
                let seed = pointproc::mix_seed(cfg.master_seed(), i, attempt as u64);
                let tally = stream_tally(params, window.window_radius(), seed);
                if tally.n == 0 {
                    continue;
                }
                let t = match info {
                    ThresholdInfo::Full => tally.solve_threshold(target)?,
                    ThresholdInfo::PartialInfoLimit => {
                        // T = L R^-alpha / I = L / S_1
                        target.log_inv_reliability() / tally.sums[0]
                    }
                    ThresholdInfo::KNearest(_) => unreachable!("k-nearest never streams"),
                };
                return Ok((t, attempt));
            }
            return Err(resample_cap_error());
        }
        let need = match info {
            ThresholdInfo::KNearest(k) => k.max(1),
            _ => 1,
        };
        let (r, resamples) =
            sample_until(params, &window, cfg.master_seed(), i, |r| r.len() >= need)?;
        let t = match info {
            ThresholdInfo::Full => model::threshold_for_reliability(&r, params, target)?.value(),
            ThresholdInfo::KNearest(k) => {
                model::threshold_lower_bound_k(&r, params, target, k)?.value()
            }
            ThresholdInfo::PartialInfoLimit => {
                let i_pow = model::interference_no_fading(&r, params);
                model::threshold_partial_info(i_pow, params, target)?.value()
            }
        };
        Ok((t, resamples))
    });

    let mut samples = Vec::with_capacity(results.len());
    let mut resample_count = 0usize;
    for r in results {
        let (t, attempts) = r?;
        samples.push(t);
        resample_count += attempts;
    }
    ccdf_curve(samples, t_grid, CurveKind::ThresholdCcdf, resample_count)
}

/// Empirical ccdf of the interference without fading; always streamed (the
/// functional only needs distances). Empty realizations contribute I = 0.
pub fn estimate_interference_ccdf(
    params: &NetworkParams,
    x_grid: &[f64],
    cfg: &McConfig,
) -> Result<McCurve> {
    validate_grid(x_grid, 0.0, f64::INFINITY, "interference")?;
    let window = window_config(params, cfg)?;
    let alpha = params.path_loss_exponent();
    let half_alpha = 0.5 * alpha;
    let alpha4 = alpha == 4.0;
    let samples: Vec<f64> = run_indexed(cfg, |i| {
        let seed = pointproc::mix_seed(cfg.master_seed(), i, 0);
        let mut sum = 0.0f64;
        if alpha4 {
            pointproc::stream_radii_sq(params, window.window_radius(), seed, &mut |r2| {
                sum += 1.0 / (r2 * r2);
            });
        } else {
            pointproc::stream_radii_sq(params, window.window_radius(), seed, &mut |r2| {
                sum += r2.powf(-half_alpha);
            });
        }
        sum
    });
    ccdf_curve(samples, x_grid, CurveKind::InterferenceCcdf, 0)
}

/// Per-realization equivalence report for the two indicator readings
/// 1{P_s(theta) > nu} and 1{T(nu) > theta}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualityReport {
    pub n: usize,
    pub violations: usize,
    /// Realizations skipped because |P_s(theta) - nu| < 1e-9 (solver guard).
    pub guard_band_exclusions: usize,
    pub resample_count: usize,
}

pub fn verify_duality(
    params: &NetworkParams,
    theta: SirThreshold,
    target: ReliabilityTarget,
    cfg: &McConfig,
) -> Result<DualityReport> {
    let window = window_config(params, cfg)?;
    let results: Vec<Result<(bool, bool, usize)>> = run_indexed(cfg, |i| {
        let (r, resamples) =
            sample_until(params, &window, cfg.master_seed(), i, |r| !r.is_empty())?;
        let profile = SuccessProfile::new(&r, params, theta.value().max(1.0));
        let ps = profile.success_probability(theta.value());
        if (ps - target.nu()).abs() < 1e-9 {
            return Ok((false, true, resamples));
        }
        let t_star = profile.solve_threshold(target)?.value();
        let violated = (ps > target.nu()) != (t_star > theta.value());
        Ok((violated, false, resamples))
    });
    let mut report = DualityReport {
        n: cfg.n_realizations(),
        violations: 0,
        guard_band_exclusions: 0,
        resample_count: 0,
    };
    for r in results {
        let (violated, excluded, resamples) = r?;
        report.violations += violated as usize;
        report.guard_band_exclusions += excluded as usize;
        report.resample_count += resamples;
    }
    Ok(report)
}

/// Throughput estimates for one approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    pub s: McEstimate,
    pub s_rel: McEstimate,
}

/// Monte Carlo throughput table: rate control is theta-invariant, the
/// deterministic approach is estimated per grid threshold from the same
/// realizations (paired design).
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputTable {
    pub theta: Vec<f64>,
    pub rate_control: ThroughputEstimate,
    pub deterministic: Vec<ThroughputEstimate>,
    pub resample_count: usize,
}

pub fn estimate_throughput(
    params: &NetworkParams,
    target: ReliabilityTarget,
    theta_grid: &[f64],
    cfg: &McConfig,
) -> Result<ThroughputTable> {
    validate_grid(theta_grid, 0.0, f64::INFINITY, "theta")?;
    let window = window_config(params, cfg)?;
    let t_hint = theta_grid.last().copied().unwrap_or(1.0).max(1.0);

    struct Row {
        rate: f64,
        det: Vec<(f64, f64)>,
        resamples: usize,
    }

    let results: Vec<Result<Row>> = run_indexed(cfg, |i| {
        let (r, resamples) =
            sample_until(params, &window, cfg.master_seed(), i, |r| !r.is_empty())?;
        let profile = SuccessProfile::new(&r, params, t_hint);
        let t_star = profile.solve_threshold(target)?.value();
        // rate control pins every link at the target reliability
        let achieved = profile.success_probability(t_star);
        assert!(
            (achieved - target.nu()).abs() <= 1e-9,
            "rate-control sample missed its reliability: {achieved} vs {}",
            target.nu()
        );
        let det = theta_grid
            .iter()
            .map(|&theta| {
                let rate = theta.ln_1p();
                let ps = profile.success_probability(theta);
                (rate * ps, rate * f64::from(ps >= target.nu()) )
            })
            .collect();
        Ok(Row {
            rate: t_star.ln_1p(),
            det,
            resamples,
        })
    });

    let mut rates = Vec::with_capacity(cfg.n_realizations());
    let mut det_s = vec![Vec::with_capacity(cfg.n_realizations()); theta_grid.len()];
    let mut det_rel = vec![Vec::with_capacity(cfg.n_realizations()); theta_grid.len()];
    let mut resample_count = 0usize;
    for r in results {
        let row = r?;
        rates.push(row.rate);
        for (j, &(s, s_rel)) in row.det.iter().enumerate() {
            det_s[j].push(s);
            det_rel[j].push(s_rel);
        }
        resample_count += row.resamples;
    }

    let lambda = params.density();
    let scale = |e: McEstimate, factor: f64| McEstimate {
        value: factor * e.value,
        std_error: factor.abs() * e.std_error,
        ..e
    };
    let rate_mean = mean_estimate(&rates, resample_count);
    // S = (1-eps) S_rel holds per sample, so derive S from S_rel exactly
    let s_rel = scale(rate_mean, lambda);
    let rate_control = ThroughputEstimate {
        s: scale(s_rel, 1.0 - target.epsilon()),
        s_rel,
    };
    let deterministic = (0..theta_grid.len())
        .map(|j| ThroughputEstimate {
            s: scale(mean_estimate(&det_s[j], resample_count), lambda),
            s_rel: scale(mean_estimate(&det_rel[j], resample_count), lambda),
        })
        .collect();

    Ok(ThroughputTable {
        theta: theta_grid.to_vec(),
        rate_control,
        deterministic,
        resample_count,
    })
}

/// All-links report over a rectangle window: every transmitter interferes
/// with every other link's receiver. Links near the border see truncated
/// interference, so their reliabilities are biased high; the typical-link
/// estimators above avoid this by construction.
pub fn realization_report(
    params: &NetworkParams,
    theta: SirThreshold,
    target: ReliabilityTarget,
    window: &Rect,
    cfg: &McConfig,
) -> Result<Vec<LinkRecord>> {
    let links = pointproc::sample_bipolar_links_rect(
        params,
        window,
        pointproc::mix_seed(cfg.master_seed(), 0, 0),
    );
    let alpha = params.path_loss_exponent();
    let r_link = params.link_distance();
    let mut records = Vec::with_capacity(links.len());
    for (i, &(tx, rx)) in links.iter().enumerate() {
        let mut coeffs: Vec<f64> = links
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(other_tx, _))| {
                let dx = other_tx[0] - rx[0];
                let dy = other_tx[1] - rx[1];
                let d = (dx * dx + dy * dy).sqrt();
                model::pow_alpha(r_link / d, alpha)
            })
            .collect();
        coeffs.sort_unstable_by(|a, b| b.total_cmp(a));
        let profile = SuccessProfile::from_coefficients(coeffs, theta.value().max(1.0));
        let (reliability, threshold) = if profile.interferer_count() == 0 {
            (1.0, f64::INFINITY)
        } else {
            (
                profile.success_probability(theta.value()),
                profile.solve_threshold(target)?.value(),
            )
        };
        records.push(LinkRecord {
            tx,
            rx,
            reliability,
            threshold,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

/// Accuracy-of-the-bound data: per density, the exact threshold ccdf via
/// Gil-Pelaez (duality reading), the empirical k-nearest bound curves, and
/// the partial-information quasi-closed form.
#[derive(Debug, Clone)]
pub struct Figure2Data {
    pub t_grid: Vec<f64>,
    pub per_density: Vec<Figure2Curves>,
}

#[derive(Debug, Clone)]
pub struct Figure2Curves {
    pub density: f64,
    pub exact: DistributionCurve,
    pub partial_info: DistributionCurve,
    pub k_nearest: Vec<(usize, McCurve)>,
}

pub fn figure2_data(
    params: &NetworkParams,
    target: ReliabilityTarget,
    density_list: &[f64],
    k_list: &[usize],
    t_grid: &[f64],
    cfg: &McConfig,
) -> Result<Figure2Data> {
    validate_grid(t_grid, 0.0, f64::INFINITY, "threshold")?;
    if density_list.is_empty() {
        return Err(Error::InvalidParameter("empty density list".into()));
    }
    let mut per_density = Vec::with_capacity(density_list.len());
    for &density in density_list {
        let p = NetworkParams::new(
            density,
            params.path_loss_exponent(),
            params.link_distance(),
        )?;
        let exact: Vec<f64> = t_grid
            .iter()
            .map(|&t| analytics::md_gil_pelaez(&p, SirThreshold::new(t)?, target.nu()))
            .collect::<Result<_>>()?;
        let partial: Vec<f64> = t_grid
            .iter()
            .map(|&t| analytics::threshold_ccdf_partial_info(&p, target, SirThreshold::new(t)?))
            .collect::<Result<_>>()?;
        let k_nearest = k_list
            .iter()
            .map(|&k| {
                estimate_threshold_ccdf(&p, target, t_grid, cfg, ThresholdInfo::KNearest(k))
                    .map(|c| (k, c))
            })
            .collect::<Result<Vec<_>>>()?;
        per_density.push(Figure2Curves {
            density,
            exact: DistributionCurve::new(t_grid.to_vec(), exact, CurveKind::ThresholdCcdf)?,
            partial_info: DistributionCurve::new(
                t_grid.to_vec(),
                partial,
                CurveKind::ThresholdCcdf,
            )?,
            k_nearest,
        });
    }
    Ok(Figure2Data {
        t_grid: t_grid.to_vec(),
        per_density,
    })
}

/// Throughput-density curves: analytic rate-control and deterministic
/// values, with Monte Carlo estimates alongside when a config is supplied.
#[derive(Debug, Clone)]
pub struct Figure3Data {
    pub theta: Vec<f64>,
    pub rate_control: ThroughputDensities,
    pub deterministic: Vec<ThroughputDensities>,
    pub mc: Option<ThroughputTable>,
}

pub fn figure3_data(
    params: &NetworkParams,
    target: ReliabilityTarget,
    theta_grid: &[f64],
    cfg: Option<&McConfig>,
) -> Result<Figure3Data> {
    validate_grid(theta_grid, 0.0, f64::INFINITY, "theta")?;
    let rate_control = analytics::throughput_rate_control(params, target)?;
    let deterministic = theta_grid
        .iter()
        .map(|&theta| {
            analytics::throughput_deterministic(params, SirThreshold::new(theta)?, target)
        })
        .collect::<Result<Vec<_>>>()?;
    let mc = match cfg {
        Some(cfg) => Some(estimate_throughput(params, target, theta_grid, cfg)?),
        None => None,
    };
    Ok(Figure3Data {
        theta: theta_grid.to_vec(),
        rate_control,
        deterministic,
        mc,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NetworkParams {
        NetworkParams::new(1.0, 4.0, 0.5).unwrap()
    }

    fn thr(t: f64) -> SirThreshold {
        SirThreshold::new(t).unwrap()
    }

    fn nu(v: f64) -> ReliabilityTarget {
        ReliabilityTarget::from_nu(v).unwrap()
    }

    fn cfg(n: usize, seed: u64, tol: f64) -> McConfig {
        McConfig::new(n, seed)
            .unwrap()
            .with_truncation_tol(tol)
            .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 1).is_err());
        assert!(McConfig::new(10, 1).unwrap().with_truncation_tol(0.0).is_err());
    }

    #[test]
    fn md_at_zero_threshold_is_one() {
        let c = cfg(200, 3, 1e-2);
        let curve = estimate_md(&params(), thr(0.0), &[0.1, 0.5, 0.9], &c).unwrap();
        assert!(curve.curve().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn md_deterministic_across_worker_counts() {
        let p = params();
        let base = cfg(500, 42, 1e-2);
        let grid = [0.2, 0.5, 0.8];
        let a = estimate_md(&p, thr(1.0), &grid, &base.with_workers(Some(1))).unwrap();
        let b = estimate_md(&p, thr(1.0), &grid, &base.with_workers(Some(4))).unwrap();
        let c = estimate_md(&p, thr(1.0), &grid, &base.with_workers(Some(8))).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn md_matches_gil_pelaez_loosely() {
        // tight agreement is the acceptance suite's job; this pins the wiring
        let p = params();
        let c = cfg(4000, 7, 1e-3);
        let curve = estimate_md(&p, thr(1.0), &[0.5, 0.9], &c).unwrap();
        for (i, &x) in [0.5, 0.9].iter().enumerate() {
            let want = analytics::md_gil_pelaez(&p, thr(1.0), x).unwrap();
            let got = curve.curve().values()[i];
            let se = curve.estimates()[i].std_error.max(1e-4);
            assert!(
                (got - want).abs() <= 4.0 * se,
                "x = {x}: MC {got} vs analytic {want} (se {se})"
            );
        }
    }

    #[test]
    fn success_probability_estimate_matches_formula() {
        let p = params();
        let c = cfg(4000, 11, 1e-3);
        let est = estimate_success_probability(&p, thr(1.0), &c).unwrap();
        let want = analytics::standard_success_probability(&p, thr(1.0));
        assert!(
            (est.value - want).abs() <= 4.0 * est.std_error,
            "MC {} vs formula {want} (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn threshold_ccdf_near_zero_threshold() {
        let p = params();
        let c = cfg(300, 5, 1e-2);
        let curve =
            estimate_threshold_ccdf(&p, nu(0.9), &[1e-12, 1.0], &c, ThresholdInfo::Full).unwrap();
        assert_eq!(curve.curve().values()[0], 1.0);
    }

    #[test]
    fn threshold_ccdf_duality_cross_estimator() {
        // the threshold ccdf at nu equals the meta distribution at x = nu on
        // a shared grid (independent seeds)
        let p = params();
        let t_grid = [0.5, 1.0, 2.0];
        let tcurve = estimate_threshold_ccdf(
            &p,
            nu(0.9),
            &t_grid,
            &cfg(4000, 100, 1e-3),
            ThresholdInfo::Full,
        )
        .unwrap();
        for (i, &t) in t_grid.iter().enumerate() {
            let md = estimate_md(&p, thr(t), &[0.9], &cfg(4000, 200 + i as u64, 1e-3)).unwrap();
            let a = tcurve.curve().values()[i];
            let b = md.curve().values()[0];
            let se = (tcurve.estimates()[i].std_error.powi(2)
                + md.estimates()[0].std_error.powi(2))
            .sqrt();
            assert!(
                (a - b).abs() <= 3.5 * se,
                "t = {t}: threshold ccdf {a} vs md {b} (se {se})"
            );
        }
    }

    #[test]
    fn streaming_solver_matches_profile_solver() {
        // identical coefficient sets through both solve paths
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(9);
        let target = ReliabilityTarget::from_epsilon(5e-3).unwrap();
        assert!(streaming_gate(target));
        for _ in 0..20 {
            let mut coeffs: Vec<f64> = (0..400)
                .map(|_| {
                    let d: f64 = rng.random_range(0.5f64..30.0);
                    (0.5 / d).powi(4)
                })
                .collect();
            coeffs.sort_unstable_by(|a, b| b.total_cmp(a));
            let mut tally = RadialTally::new();
            for &c in &coeffs {
                tally.push(c);
            }
            let stream_t = tally.solve_threshold(target).unwrap();
            let profile_t = SuccessProfile::from_coefficients(coeffs, 1.0)
                .solve_threshold(target)
                .unwrap()
                .value();
            assert!(
                (stream_t - profile_t).abs() <= 1e-9 * profile_t,
                "streaming {stream_t:.15e} vs profile {profile_t:.15e}"
            );
        }
    }

    #[test]
    fn streaming_estimator_consistent_with_materialized_distribution() {
        // same distribution through the streamed and materialized pipelines
        // (independent draws, so the comparison is statistical)
        let p = params();
        let target = ReliabilityTarget::from_epsilon(5e-3).unwrap();
        let grid = [1e-4, 5e-4, 2e-3];
        let streamed = estimate_threshold_ccdf(
            &p,
            target,
            &grid,
            &cfg(3000, 77, 1e-3),
            ThresholdInfo::Full,
        )
        .unwrap();
        // materialized pipeline: sample + full root-solve per realization
        let window = SamplingConfig::from_tolerance(&p, 1e-3, 0).unwrap();
        let mut samples = Vec::new();
        for i in 0..3000u64 {
            let seed = pointproc::mix_seed(555, i, 0);
            let r = pointproc::sample_realization(&p, &window.with_seed(seed));
            if r.is_empty() {
                continue;
            }
            samples.push(model::threshold_for_reliability(&r, &p, target).unwrap().value());
        }
        let n = samples.len();
        samples.sort_unstable_by(f64::total_cmp);
        for (i, &t) in grid.iter().enumerate() {
            let mat = (n - samples.partition_point(|&v| v <= t)) as f64 / n as f64;
            let est = &streamed.estimates()[i];
            let se = (2.0f64).sqrt() * est.std_error.max(2e-3);
            assert!(
                (est.value - mat).abs() <= 4.0 * se,
                "t = {t}: streamed {} vs materialized {mat}",
                est.value
            );
        }
    }

    #[test]
    fn duality_holds_with_zero_violations() {
        let p = params();
        let report = verify_duality(&p, thr(1.0), nu(0.9), &cfg(2000, 21, 1e-3)).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.guard_band_exclusions < 10);
        assert_eq!(report.n, 2000);
        let again = verify_duality(&p, thr(1.0), nu(0.9), &cfg(2000, 21, 1e-3)).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn throughput_identities_and_analytic_agreement() {
        let p = params();
        let target = ReliabilityTarget::from_epsilon(0.01).unwrap();
        let grid = [0.1, 1.0, 10.0];
        let table = estimate_throughput(&p, target, &grid, &cfg(4000, 31, 1e-3)).unwrap();

        // Eq-style identity: S = (1-eps) S_rel holds exactly by construction
        let rc = &table.rate_control;
        assert_eq!(rc.s.value, (1.0 - target.epsilon()) * rc.s_rel.value);

        let analytic = analytics::throughput_rate_control(&p, target).unwrap();
        assert!(
            (rc.s_rel.value - analytic.s_rel).abs() <= 4.0 * rc.s_rel.std_error,
            "rate-control MC {} vs analytic {}",
            rc.s_rel.value,
            analytic.s_rel
        );

        for (j, &theta) in grid.iter().enumerate() {
            let det = analytics::throughput_deterministic(&p, thr(theta), target).unwrap();
            let mc = &table.deterministic[j];
            assert!(
                (mc.s.value - det.s).abs() <= 4.0 * mc.s.std_error + 1e-12,
                "theta = {theta}: S MC {} vs analytic {}",
                mc.s.value,
                det.s
            );
            assert!(
                (mc.s_rel.value - det.s_rel).abs() <= 4.0 * mc.s_rel.std_error + 1e-12,
                "theta = {theta}: S_rel MC {} vs analytic {}",
                mc.s_rel.value,
                det.s_rel
            );
        }
    }

    #[test]
    fn interference_ccdf_matches_levy_law() {
        let p = params();
        let c = cfg(30_000, 13, 1e-5);
        let grid: Vec<f64> = (1..40).map(|i| 2.0 * i as f64).collect();
        let curve = estimate_interference_ccdf(&p, &grid, &c).unwrap();
        let mut worst = 0.0f64;
        for (i, &x) in grid.iter().enumerate() {
            let want = analytics::levy_interference_ccdf(&p, x).unwrap();
            worst = worst.max((curve.curve().values()[i] - want).abs());
        }
        assert!(worst <= 0.02, "sup diff = {worst}");
    }

    #[test]
    fn interference_scaling_with_density() {
        // at alpha = 4, I scales like lambda^2: quadruple under 2x density
        let p1 = params();
        let p2 = NetworkParams::new(2.0, 4.0, 0.5).unwrap();
        let n = 6000usize;
        let sample = |p: &NetworkParams, seed: u64| -> Vec<f64> {
            let window = SamplingConfig::from_tolerance(p, 1e-5, 0).unwrap();
            let mut out: Vec<f64> = (0..n as u64)
                .map(|i| {
                    let mut sum = 0.0;
                    pointproc::stream_radii_sq(
                        p,
                        window.window_radius(),
                        pointproc::mix_seed(seed, i, 0),
                        &mut |r2| sum += 1.0 / (r2 * r2),
                    );
                    sum
                })
                .collect();
            out.sort_unstable_by(f64::total_cmp);
            out
        };
        let i1 = sample(&p1, 1);
        let i2 = sample(&p2, 2);
        // two-sample KS on 4*I_1 vs I_2 at the 1% level
        let mut ks = 0.0f64;
        for (k, &v) in i2.iter().enumerate() {
            let f1 = i1.partition_point(|&w| 4.0 * w <= v) as f64 / n as f64;
            let f2 = (k + 1) as f64 / n as f64;
            ks = ks.max((f1 - f2).abs());
        }
        let crit = 1.628 * (2.0 / n as f64).sqrt();
        assert!(ks <= crit, "KS = {ks}, crit = {crit}");
    }

    #[test]
    fn realization_report_links_obey_duality() {
        let p = NetworkParams::new(1.0 / 40.0, 4.0, 2.0).unwrap();
        let rect = Rect::centered(40.0, 30.0).unwrap();
        let c = cfg(1, 2026, 1e-4);
        let records = realization_report(&p, thr(1.0), nu(0.9), &rect, &c).unwrap();
        assert!(records.len() > 10, "only {} links", records.len());
        for rec in &records {
            let d = ((rec.tx[0] - rec.rx[0]).powi(2) + (rec.tx[1] - rec.rx[1]).powi(2)).sqrt();
            assert!((d - 2.0).abs() <= 1e-9 * 2.0);
            assert!((0.0..=1.0).contains(&rec.reliability));
            assert!(rec.threshold > 0.0);
            if (rec.reliability - 0.9).abs() >= 1e-9 {
                assert_eq!(rec.reliability > 0.9, rec.threshold > 1.0, "{rec:?}");
            }
        }
        let again = realization_report(&p, thr(1.0), nu(0.9), &rect, &c).unwrap();
        assert_eq!(records, again);
    }

    #[test]
    fn figure2_k3_tracks_exact_closer_than_k1_on_lower_half() {
        let p = params();
        let t_grid: Vec<f64> = (-8..=0).map(|e| 10f64.powf(e as f64 / 2.0)).collect();
        let data = figure2_data(
            &p,
            nu(0.9),
            &[1.0],
            &[1, 3],
            &t_grid,
            &cfg(3000, 17, 1e-3),
        )
        .unwrap();
        let curves = &data.per_density[0];
        let exact = curves.exact.values();
        let k1 = curves.k_nearest[0].1.curve().values();
        let k3 = curves.k_nearest[1].1.curve().values();
        let half = t_grid.len() / 2;
        for i in 0..half {
            assert!(
                (k3[i] - exact[i]).abs() <= (k1[i] - exact[i]).abs() + 0.02,
                "t = {}: k3 {} vs k1 {} (exact {})",
                t_grid[i],
                k3[i],
                k1[i],
                exact[i]
            );
        }
    }

    #[test]
    fn figure3_rate_control_beats_deterministic_reliable_throughput() {
        let p = params();
        let target = ReliabilityTarget::from_epsilon(0.01).unwrap();
        let grid = [0.01, 0.1, 1.0, 10.0, 100.0];
        let data = figure3_data(&p, target, &grid, None).unwrap();
        for (j, det) in data.deterministic.iter().enumerate() {
            assert!(
                data.rate_control.s_rel >= det.s_rel,
                "theta = {}: rate-control {} < deterministic {}",
                grid[j],
                data.rate_control.s_rel,
                det.s_rel
            );
        }
        assert!(data.mc.is_none());
    }

    #[test]
    fn std_errors_shrink_like_sqrt_n() {
        let p = params();
        let a = estimate_md(&p, thr(1.0), &[0.5], &cfg(2000, 4, 1e-2)).unwrap();
        let b = estimate_md(&p, thr(1.0), &[0.5], &cfg(4000, 4, 1e-2)).unwrap();
        let ratio = a.estimates()[0].std_error / b.estimates()[0].std_error;
        assert!(
            (ratio - std::f64::consts::SQRT_2).abs() <= 0.15 * std::f64::consts::SQRT_2,
            "se ratio = {ratio}"
        );
    }

    #[test]
    fn resampling_counts_empty_realizations() {
        // a deliberately tiny window (mean count ~0.6) makes empty draws common
        let p = NetworkParams::new(0.01, 4.0, 0.5).unwrap();
        let c = McConfig::new(200, 9).unwrap().with_truncation_tol(1e-4).unwrap();
        let curve =
            estimate_threshold_ccdf(&p, nu(0.9), &[0.1], &c, ThresholdInfo::Full).unwrap();
        assert!(curve.resample_count() > 0);
    }
}
