//! Closed-form and semi-analytic results: the standard success probability,
//! complex SIR moments, meta-distribution reconstruction by Gil-Pelaez
//! inversion and by binomial mixtures, the Levy interference law at
//! alpha = 4, the ultrareliable and partial-information threshold ccdfs, and
//! throughput densities.
//!
//! All probability outputs are clamped to [0, 1]; the detailed entry points
//! keep the pre-clamp value for diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{NetworkParams, ReliabilityTarget, SirThreshold};
use crate::quad;
use crate::special;

/// Which quantity a sampled curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// ccdf of the conditional success probability at fixed SIR threshold.
    MetaDistribution,
    /// ccdf of the rate-control SIR threshold at fixed reliability.
    ThresholdCcdf,
    /// ccdf of the interference without fading.
    InterferenceCcdf,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::MetaDistribution => "meta_distribution",
            CurveKind::ThresholdCcdf => "threshold_ccdf",
            CurveKind::InterferenceCcdf => "interference_ccdf",
        }
    }
}

/// A ccdf sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCurve {
    abscissa: Vec<f64>,
    values: Vec<f64>,
    kind: CurveKind,
}

impl DistributionCurve {
    /// Validates the curve invariants: equal lengths, probabilities in
    /// [0, 1], non-increasing within a 1e-9 slack for quadrature noise.
    pub fn new(abscissa: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if abscissa.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "curve length mismatch: {} abscissae, {} values",
                abscissa.len(),
                values.len()
            )));
        }
        if abscissa.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("abscissa must be ascending".into()));
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "curve value {v} outside [0, 1]"
                )));
            }
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            return Err(Error::InvalidParameter(
                "ccdf values must be non-increasing".into(),
            ));
        }
        Ok(Self { abscissa, values, kind })
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }
}

/// Throughput density S and reliable throughput density S_rel, both in nats
/// per unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputDensities {
    pub s: f64,
    pub s_rel: f64,
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// lambda pi R^2 theta^delta, the spatial-contention scale every moment
/// shares.
fn contention(params: &NetworkParams, theta: f64) -> f64 {
    params.density()
        * std::f64::consts::PI
        * params.link_distance()
        * params.link_distance()
        * theta.powf(params.delta())
}

/// Standard (mean) success probability
///   p_s(theta) = exp(-lambda pi R^2 theta^delta Gamma(1+delta) Gamma(1-delta)).
pub fn standard_success_probability(params: &NetworkParams, theta: SirThreshold) -> f64 {
    if theta.value() == 0.0 {
        return 1.0;
    }
    let delta = params.delta();
    let g = special::gamma(1.0 + delta).expect("0 < 1+delta < 2")
        * special::gamma(1.0 - delta).expect("0 < 1-delta < 1");
    (-contention(params, theta.value()) * g).exp()
}

/// Complex moment M_b = E[P_s(theta)^b]
///   = exp(-lambda pi R^2 theta^delta Gamma(1-delta) Gamma(b+delta)/Gamma(b)),
/// the gamma ratio evaluated as b Gamma(b+delta)/Gamma(1+b) so b = 0 is
/// regular. Requires Re(b) >= 0 (purely imaginary orders included).
pub fn sir_moment(params: &NetworkParams, theta: SirThreshold, b: Complex64) -> Result<Complex64> {
    if b.re < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "moment order must have Re(b) >= 0, got {b}"
        )));
    }
    if theta.value() == 0.0 || (b.re == 0.0 && b.im == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let delta = params.delta();
    let g1d = special::gamma(1.0 - delta).expect("0 < 1-delta < 1");
    let ratio = (special::log_gamma_complex(b + delta)?
        - special::log_gamma_complex(b + 1.0)?)
    .exp()
        * b;
    Ok((-contention(params, theta.value()) * g1d * ratio).exp())
}

// ---------------------------------------------------------------------------
// Gil-Pelaez inversion
// ---------------------------------------------------------------------------

/// Gil-Pelaez evaluation with the pre-clamp value kept for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct GilPelaezOutcome {
    /// Clamped to [0, 1].
    pub value: f64,
    /// Raw quadrature result before clamping.
    pub raw: f64,
    /// Absolute error estimate of the quadrature.
    pub quad_error: f64,
}

/// Meta distribution by Gil-Pelaez inversion:
///   F(P_s(theta) > x) = 1/2 + (1/pi) int_0^inf Im(e^{-ju ln x} M_ju) du/u.
pub fn md_gil_pelaez(params: &NetworkParams, theta: SirThreshold, x: f64) -> Result<f64> {
    Ok(md_gil_pelaez_detailed(params, theta, x)?.value)
}

pub fn md_gil_pelaez_detailed(
    params: &NetworkParams,
    theta: SirThreshold,
    x: f64,
) -> Result<GilPelaezOutcome> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reliability threshold x must be in (0, 1), got {x}"
        )));
    }
    if theta.value() <= 0.0 {
        return Err(Error::InvalidParameter(
            "Gil-Pelaez inversion needs theta > 0".into(),
        ));
    }
    let delta = params.delta();
    let a = contention(params, theta.value());
    let g1d = special::gamma(1.0 - delta).expect("0 < 1-delta < 1");
    let gd = special::gamma(delta).expect("0 < delta < 1");
    let ln_x = x.ln();

    // log of the moment M_ju as an analytic function of u
    let log_moment = |u: f64| -> Complex64 {
        let b = Complex64::new(0.0, u);
        let ratio = (special::log_gamma_complex(b + delta).expect("no poles for Re >= delta")
            - special::log_gamma_complex(b + 1.0).expect("no poles for Re >= 1"))
        .exp()
            * b;
        -a * g1d * ratio
    };

    let mut integrand = |u: f64| -> f64 {
        if u == 0.0 {
            // analytic limit of the 0/0 form
            return -ln_x - a * g1d * gd;
        }
        (Complex64::new(0.0, -u * ln_x).exp() * log_moment(u).exp()).im / u
    };

    // |M_ju| decays like exp(-a g1d cos(pi delta/2) u^delta); the envelope
    // reaches 1e-12 at u_env.
    let envelope = a * g1d * (std::f64::consts::FRAC_PI_2 * delta).cos();
    let u_env = (27.631_021_115_928_55 / envelope).powf(1.0 / delta);

    // Oscillation count up to u: the e^{-ju ln x} kernel plus the moment's
    // own phase drift.
    let two_pi = 2.0 * std::f64::consts::PI;
    let phase_drift = a * g1d * (std::f64::consts::FRAC_PI_2 * delta).sin();
    let cycles = |u: f64| (u * ln_x.abs() + phase_drift * u.powf(delta)) / two_pi;

    // For weak contention (small theta or density) the envelope decays so
    // slowly that resolving every oscillation out to u_env is hopeless.
    // The integrand has no stationary phase there, so the tail beyond a
    // budget point u0 collapses under integration by parts:
    //   int_{u0}^inf e^psi du = -e^psi (1/psi' + psi''/psi'^3) + O(next),
    // with psi(u) = -ju ln x + log M_ju - ln u.
    const MAX_CYCLES: f64 = 2000.0;
    let (u_cut, tail, tail_err) = if cycles(u_env) <= MAX_CYCLES {
        (u_env, 0.0, 0.0)
    } else {
        // smallest u reaching the cycle budget (cycles is increasing)
        let mut lo = 1.0f64;
        let mut hi = u_env;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cycles(mid) > MAX_CYCLES {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-6 * hi {
                break;
            }
        }
        let u0 = hi.max(100.0);

        let psi = |u: f64| log_moment(u) + Complex64::new(-(u.ln()), -u * ln_x);
        let h = 1e-3 * u0;
        let f0 = psi(u0).exp();
        let psi_p = (psi(u0 + h) - psi(u0 - h)) / (2.0 * h);
        let psi_pp = (psi(u0 + h) - 2.0 * psi(u0) + psi(u0 - h)) / (h * h);
        let t1 = -f0 / psi_p;
        let t2 = t1 * psi_pp / (psi_p * psi_p);
        let ratio = t2.norm() / t1.norm().max(1e-300);
        if ratio > 0.3 {
            return Err(Error::QuadratureFailure {
                error: ratio,
                tol: 0.3,
            });
        }
        // the neglected third term shrinks by roughly the same ratio again
        ((u0), (t1 + t2).im, t2.norm() * ratio * 4.0)
    };

    let initial = ((4.0 * cycles(u_cut)) as usize + 64).clamp(16, 16_384);
    let r = quad::adaptive(&mut integrand, 0.0, u_cut, 1e-10, 1e-4, initial, 60_000)?;

    let raw = 0.5 + (r.value + tail) / std::f64::consts::PI;
    Ok(GilPelaezOutcome {
        value: raw.clamp(0.0, 1.0),
        raw,
        quad_error: (r.error + tail_err) / std::f64::consts::PI,
    })
}

// ---------------------------------------------------------------------------
// Binomial mixtures
// ---------------------------------------------------------------------------

/// Mixture weights beta_{n,k} = C(n,k) sum_j (-1)^j C(n-k,j) M_{k+j}
/// (= E[C(n,k) P^k (1-P)^{n-k}]), computed with compensated summation.
/// Hard cap n <= 30: the alternating sums lose roughly a digit every few
/// moments.
pub fn binomial_mixture_weights(
    params: &NetworkParams,
    theta: SirThreshold,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 || n > 30 {
        return Err(Error::InvalidParameter(format!(
            "moment count n must be in 1..=30, got {n}"
        )));
    }
    let delta = params.delta();
    let a = contention(params, theta.value());
    let g1d = special::gamma(1.0 - delta).expect("0 < 1-delta < 1");

    // integer moments M_0..M_n
    let mut moments = Vec::with_capacity(n + 1);
    moments.push(1.0);
    for m in 1..=n {
        let mf = m as f64;
        let ratio = (special::ln_gamma(mf + delta)? - special::ln_gamma(mf)?).exp();
        moments.push((-a * g1d * ratio).exp());
    }

    let choose = pascal_triangle(n);
    let mut weights = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64; // Neumaier correction
        for j in 0..=(n - k) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * choose[n - k][j] * moments[k + j];
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        weights.push(choose[n][k] * (sum + comp));
    }

    let min_weight = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_weight < -1e-6 {
        return Err(Error::CancellationError { min_weight });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::CancellationError {
            min_weight: total - 1.0,
        });
    }
    Ok(weights)
}

fn pascal_triangle(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0f64; n + 1]; n + 1];
    for (i, row) in c.iter_mut().enumerate() {
        row[0] = 1.0;
        row[i] = 1.0;
    }
    for i in 2..=n {
        for j in 1..i {
            c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
        }
    }
    c
}

/// Meta distribution reconstructed from the first n integer moments as a
/// mixture of binomial tails: F(x) ~ sum_{k > n x} beta_{n,k}.
///
/// The reconstruction is a staircase with jumps at x = k/n. Exactly at a
/// jump the two one-sided sums differ by beta_{n,k}; the midpoint is
/// returned there, which halves the worst-case deviation from the smooth
/// curve on grids that hit the jumps.
pub fn md_binomial_mixture(
    params: &NetworkParams,
    theta: SirThreshold,
    x: f64,
    n: usize,
) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reliability threshold x must be in (0, 1), got {x}"
        )));
    }
    let weights = binomial_mixture_weights(params, theta, n)?;
    let kf = n as f64 * x;
    let nearest = kf.round();
    let tail: f64 = if (kf - nearest).abs() < 1e-9 * n as f64 && nearest >= 1.0 {
        let k = nearest as usize;
        weights.iter().skip(k + 1).sum::<f64>() + 0.5 * weights[k]
    } else {
        weights.iter().skip(kf.floor() as usize + 1).sum()
    };
    Ok(tail.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Interference law and threshold ccdfs (alpha = 4)
// ---------------------------------------------------------------------------

fn require_alpha4(params: &NetworkParams) -> Result<()> {
    if params.path_loss_exponent() != 4.0 {
        return Err(Error::UnsupportedExponent {
            alpha: params.path_loss_exponent(),
        });
    }
    Ok(())
}

/// ccdf of the interference without fading for alpha = 4:
///   F_I(x) = erf(pi^{3/2} lambda / (2 sqrt(x))),
/// the Levy(1/2) stable law of the planar PPP.
pub fn levy_interference_ccdf(params: &NetworkParams, x: f64) -> Result<f64> {
    require_alpha4(params)?;
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "interference level must be positive, got {x}"
        )));
    }
    let arg = std::f64::consts::PI.powf(1.5) * params.density() / (2.0 * x.sqrt());
    Ok(special::erf(arg))
}

/// Ultrareliable (eps -> 0) threshold ccdf for alpha = 4:
///   F_T(t) ~ erfc(sqrt(t/eps) pi^{3/2} lambda R^2 / 2).
/// The asymptotic is meaningful for small outage; callers should treat
/// eps > 0.1 as out of its validity range.
pub fn threshold_ccdf_ultrareliable(
    params: &NetworkParams,
    target: ReliabilityTarget,
    t: SirThreshold,
) -> Result<f64> {
    require_alpha4(params)?;
    if !(t.value() > 0.0) {
        return Err(Error::InvalidParameter(
            "threshold ccdf needs t > 0".into(),
        ));
    }
    Ok(special::erfc(
        (t.value() / target.epsilon()).sqrt() * threshold_scale(params),
    ))
}

/// Partial-information threshold ccdf for alpha = 4:
///   F_T(t) ~ erfc(sqrt(t/log(1/(1-eps))) pi^{3/2} lambda R^2 / 2),
/// i.e. the ultrareliable form with eps replaced by log(1/(1-eps)); the two
/// coincide as eps -> 0. By duality this also approximates the meta
/// distribution F(P_s(t) > nu) as a function of t.
pub fn threshold_ccdf_partial_info(
    params: &NetworkParams,
    target: ReliabilityTarget,
    t: SirThreshold,
) -> Result<f64> {
    require_alpha4(params)?;
    if !(t.value() > 0.0) {
        return Err(Error::InvalidParameter(
            "threshold ccdf needs t > 0".into(),
        ));
    }
    Ok(special::erfc(
        (t.value() / target.log_inv_reliability()).sqrt() * threshold_scale(params),
    ))
}

/// pi^{3/2} lambda R^2 / 2
fn threshold_scale(params: &NetworkParams) -> f64 {
    std::f64::consts::PI.powf(1.5) * params.density() * params.link_distance()
        * params.link_distance()
        / 2.0
}

// ---------------------------------------------------------------------------
// Expected log-rate and throughput densities
// ---------------------------------------------------------------------------

/// How E[log(1+T)] was requested / actually evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogRateMethod {
    /// Adaptive quadrature of the Gaussian-substituted integral (production
    /// path).
    Quadrature,
    /// The 2F2/erfi closed form (cross-check only; cancels catastrophically
    /// for C > 20).
    ClosedForm,
}

/// E[log(1+T)] under rate control, with the method actually used: requests
/// for the closed form fall back to quadrature when C > 20.
#[derive(Debug, Clone, Copy)]
pub struct ExpectedLogRate {
    pub value: f64,
    pub method_used: LogRateMethod,
    /// The cancellation parameter C = pi^3 lambda^2 R^4 / (4 log(1/(1-eps))).
    pub c: f64,
}

/// Mean rate E[log(1+T)] ~ (1/sqrt(pi)) int_0^inf u^{-1/2} e^{-u}
/// log(1 + u/C) du for alpha = 4.
///
/// Quadrature substitutes u = v^2 to remove the endpoint singularity and
/// integrates the Gaussian-weighted integrand adaptively. The closed form
///   -2C 2F2([1,1],[3/2,2],C) + pi C erfi(sqrt(C)) - (gamma + 2 log 2 + log C)
/// cancels like e^C and is only evaluated for C <= 20.
pub fn expected_log_rate(
    params: &NetworkParams,
    target: ReliabilityTarget,
    method: LogRateMethod,
) -> Result<ExpectedLogRate> {
    require_alpha4(params)?;
    let lam_r2 = params.density() * params.link_distance() * params.link_distance();
    let c = std::f64::consts::PI.powi(3) * lam_r2 * lam_r2 / (4.0 * target.log_inv_reliability());

    if method == LogRateMethod::ClosedForm && c <= 20.0 {
        let value = -2.0 * c * special::hyp2f2(c)?
            + std::f64::consts::PI * c * special::erfi(c.sqrt())
            - (special::EULER_GAMMA + 2.0 * std::f64::consts::LN_2 + c.ln());
        return Ok(ExpectedLogRate {
            value,
            method_used: LogRateMethod::ClosedForm,
            c,
        });
    }

    // (2/sqrt(pi)) int_0^inf e^{-v^2} log(1 + v^2/C) dv; e^{-v^2} is below
    // 1e-33 beyond v = 8.7
    let mut f = |v: f64| (-v * v).exp() * (v * v / c).ln_1p();
    let r = quad::adaptive(&mut f, 0.0, 8.7, 1e-12, 1e-9, 16, 20_000)?;
    Ok(ExpectedLogRate {
        value: 2.0 / std::f64::consts::PI.sqrt() * r.value,
        method_used: LogRateMethod::Quadrature,
        c,
    })
}

/// Rate-control throughput densities: every link holds reliability nu, so
///   S_rel = lambda E[log(1+T)],  S = (1-eps) S_rel.
pub fn throughput_rate_control(
    params: &NetworkParams,
    target: ReliabilityTarget,
) -> Result<ThroughputDensities> {
    let rate = expected_log_rate(params, target, LogRateMethod::Quadrature)?;
    let s_rel = params.density() * rate.value;
    Ok(ThroughputDensities {
        s: (1.0 - target.epsilon()) * s_rel,
        s_rel,
    })
}

/// Deterministic-threshold throughput densities:
///   S = lambda log(1+theta) p_s(theta),
///   S_rel = lambda log(1+theta) F(P_s(theta) > 1-eps)  (Gil-Pelaez).
pub fn throughput_deterministic(
    params: &NetworkParams,
    theta: SirThreshold,
    target: ReliabilityTarget,
) -> Result<ThroughputDensities> {
    if theta.value() == 0.0 {
        return Ok(ThroughputDensities { s: 0.0, s_rel: 0.0 });
    }
    let rate = params.density() * theta.value().ln_1p();
    let s = rate * standard_success_probability(params, theta);
    let md = md_gil_pelaez(params, theta, target.nu())?;
    Ok(ThroughputDensities { s, s_rel: rate * md })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
