//! Domain types and exact per-realization computations: the conditional
//! success probability, the rate-control threshold root-solve, the
//! interference functional, and the k-nearest-interferer bounds.
//!
//! Everything here is a pure function of its inputs; `Realization` values
//! are immutable after construction and safe to share across workers.

use crate::error::{Error, Result};

/// Network-wide parameters of a Poisson bipolar network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    density: f64,
    path_loss_exponent: f64,
    link_distance: f64,
}

impl NetworkParams {
    /// `density` is the transmitter intensity per unit area, `alpha` the
    /// path-loss exponent (> 2 so interference has finite mean), `link_distance`
    /// the fixed transmitter-receiver separation.
    pub fn new(density: f64, alpha: f64, link_distance: f64) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be positive, got {density}"
            )));
        }
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path_loss_exponent must exceed 2, got {alpha}"
            )));
        }
        if !(link_distance > 0.0) || !link_distance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "link_distance must be positive, got {link_distance}"
            )));
        }
        Ok(Self {
            density,
            path_loss_exponent: alpha,
            link_distance,
        })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn link_distance(&self) -> f64 {
        self.link_distance
    }

    /// delta = 2/alpha, always in (0, 1).
    pub fn delta(&self) -> f64 {
        2.0 / self.path_loss_exponent
    }
}

/// Target reliability nu with outage epsilon = 1 - nu.
///
/// Both representations are stored so that ultrareliable targets keep full
/// precision in epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget {
    nu: f64,
    epsilon: f64,
}

impl ReliabilityTarget {
    pub fn from_nu(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "reliability nu must be in (0, 1), got {nu}"
            )));
        }
        Ok(Self { nu, epsilon: 1.0 - nu })
    }

    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "outage epsilon must be in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self { nu: 1.0 - epsilon, epsilon })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// log(1/(1-eps)), computed through ln_1p so tiny outages keep their
    /// precision.
    pub fn log_inv_reliability(&self) -> f64 {
        -(-self.epsilon).ln_1p()
    }
}

/// A linear (not dB) SIR threshold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SirThreshold(f64);

impl SirThreshold {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SIR threshold must be finite and >= 0, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Interference power without fading, sum of |y|^-alpha over interferers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InterferencePower(f64);

impl InterferencePower {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "interference power must be >= 0, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// One sampled interferer configuration around the typical link: the typical
/// receiver sits at the origin, its transmitter at (link_distance, 0), and
/// `interferer_points` holds every other transmitter inside the sampling
/// window.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    interferer_points: Vec<[f64; 2]>,
    window_radius: f64,
    sorted_distances: Vec<f64>,
}

impl Realization {
    /// Builds a realization, caching the ascending distances from the origin.
    /// Every point must lie inside the window and away from the origin.
    pub fn from_points(interferer_points: Vec<[f64; 2]>, window_radius: f64) -> Result<Self> {
        if !(window_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window_radius must be positive, got {window_radius}"
            )));
        }
        let mut sorted_distances = Vec::with_capacity(interferer_points.len());
        for p in &interferer_points {
            let d = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if d == 0.0 {
                return Err(Error::InvalidParameter(
                    "interferer coincides with the typical receiver".into(),
                ));
            }
            if d > window_radius * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "interferer at distance {d} outside window radius {window_radius}"
                )));
            }
            sorted_distances.push(d);
        }
        sorted_distances.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            interferer_points,
            window_radius,
            sorted_distances,
        })
    }

    pub fn interferer_points(&self) -> &[[f64; 2]] {
        &self.interferer_points
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    /// Distances from the origin, ascending.
    pub fn sorted_distances(&self) -> &[f64] {
        &self.sorted_distances
    }

    pub fn len(&self) -> usize {
        self.interferer_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interferer_points.is_empty()
    }
}

/// One link of an all-links realization report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRecord {
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    /// Conditional success probability at the report's fixed threshold.
    pub reliability: f64,
    /// SIR threshold pinning this link at the report's target reliability.
    pub threshold: f64,
}

/// base^alpha with the cheap integer-exponent path; path-loss exponents are
/// usually small integers.
#[inline]
pub(crate) fn pow_alpha(base: f64, alpha: f64) -> f64 {
    if alpha == alpha.trunc() && alpha.abs() <= 32.0 {
        base.powi(alpha as i32)
    } else {
        base.powf(alpha)
    }
}

// ---------------------------------------------------------------------------
// Conditional success probability and the threshold root-solve
// ---------------------------------------------------------------------------

/// P_s(t) = prod_n 1/(1 + t (R/r_n)^alpha): fading averaged out, the product
/// over interferers evaluated in the log domain. Farthest interferers are
/// accumulated first so the smallest terms add before the largest.
pub fn conditional_success(
    realization: &Realization,
    params: &NetworkParams,
    t: SirThreshold,
) -> f64 {
    let alpha = params.path_loss_exponent();
    let r_link = params.link_distance();
    let tv = t.value();
    let mut g = 0.0;
    for &d in realization.sorted_distances().iter().rev() {
        g += (tv * pow_alpha(r_link / d, alpha)).ln_1p();
    }
    (-g).exp()
}

// The threshold solver splits the interference product into a small exact
// head and a far-field tail. Tail factors satisfy t*c <= X_CUT, where the
// truncated log1p series below is exact to machine precision:
// sum_n x_n^{K+1}/(K+1) <= X_CUT^K/(K+1) * sum_n x_n ~ 1e-17 * g.
pub(crate) const X_CUT: f64 = 0.01;
const SERIES_ORDER: usize = 8;

/// sum_k (-1)^{k+1} S_k t^k / k for power sums S_k = sum_n c_n^k.
#[inline]
pub(crate) fn series_neg_log(sums: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, s) in sums.iter().enumerate().rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = sign * s / (k + 1) as f64 + t * acc;
    }
    t * acc
}

/// Precomputed view of one realization's conditional success curve:
/// supports repeated fast evaluation of P_s(t) and the reliability
/// root-solve without touching every interferer per evaluation.
#[derive(Debug, Clone)]
pub struct SuccessProfile {
    /// (R/r_n)^alpha, descending (nearest interferer first).
    coeffs: Vec<f64>,
    head_len: usize,
    tail_sums: [f64; SERIES_ORDER],
    /// Largest t for which the cached split is valid.
    split_cap: f64,
}

impl SuccessProfile {
    /// `t_hint` sizes the cached head: evaluations up to that threshold reuse
    /// it, larger ones recompute a local split.
    pub fn new(realization: &Realization, params: &NetworkParams, t_hint: f64) -> Self {
        let alpha = params.path_loss_exponent();
        let r_link = params.link_distance();
        let coeffs: Vec<f64> = realization
            .sorted_distances()
            .iter()
            .map(|&d| pow_alpha(r_link / d, alpha))
            .collect();
        Self::from_coefficients(coeffs, t_hint)
    }

    /// `coeffs` are the per-interferer factors t-multipliers (R/r_n)^alpha in
    /// descending order.
    pub fn from_coefficients(coeffs: Vec<f64>, t_hint: f64) -> Self {
        debug_assert!(coeffs.windows(2).all(|w| w[0] >= w[1]));
        let cap = t_hint.max(1.0);
        let (head_len, tail_sums) = split(&coeffs, cap);
        Self {
            coeffs,
            head_len,
            tail_sums,
            split_cap: cap,
        }
    }

    pub fn interferer_count(&self) -> usize {
        self.coeffs.len()
    }

    /// -ln P_s(t), monotone increasing in t.
    pub fn neg_log_success(&self, t: f64) -> f64 {
        if t <= self.split_cap {
            self.g_split(self.head_len, &self.tail_sums, t)
        } else {
            let (head_len, sums) = split(&self.coeffs, t);
            self.g_split(head_len, &sums, t)
        }
    }

    pub fn success_probability(&self, t: f64) -> f64 {
        (-self.neg_log_success(t)).exp()
    }

    fn g_split(&self, head_len: usize, sums: &[f64; SERIES_ORDER], t: f64) -> f64 {
        let mut g = series_neg_log(sums, t);
        for &c in self.coeffs[..head_len].iter().rev() {
            g += (t * c).ln_1p();
        }
        g
    }

    /// Solves P_s(t*) = nu by bracketed bisection on the monotone
    /// g(t) = -ln P_s(t) - log(1/(1-eps)): the upper bracket doubles from 1
    /// until g > 0, then bisection runs to 1e-10 relative width in t*.
    pub fn solve_threshold(&self, target: ReliabilityTarget) -> Result<SirThreshold> {
        if self.coeffs.is_empty() {
            return Err(Error::EmptyRealization);
        }
        let l = target.log_inv_reliability();

        let mut head_len = self.head_len;
        let mut sums = self.tail_sums;
        let mut cap = self.split_cap;

        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        loop {
            if hi > cap {
                let s = split(&self.coeffs, hi);
                head_len = s.0;
                sums = s.1;
                cap = hi;
            }
            if self.g_split(head_len, &sums, hi) > l {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }

        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.g_split(head_len, &sums, mid) > l {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-10 * lo {
                break;
            }
        }
        SirThreshold::new(0.5 * (lo + hi))
    }
}

fn split(coeffs: &[f64], t_cap: f64) -> (usize, [f64; SERIES_ORDER]) {
    let cut = X_CUT / t_cap;
    let head_len = coeffs.partition_point(|&c| c > cut);
    let mut sums = [0.0f64; SERIES_ORDER];
    // ascending magnitude: smallest coefficients first
    for &c in coeffs[head_len..].iter().rev() {
        let mut p = c;
        for s in sums.iter_mut() {
            *s += p;
            p *= c;
        }
    }
    (head_len, sums)
}

/// The unique t* with conditional_success(t*) = nu, to 1e-10 relative.
pub fn threshold_for_reliability(
    realization: &Realization,
    params: &NetworkParams,
    target: ReliabilityTarget,
) -> Result<SirThreshold> {
    if realization.is_empty() {
        return Err(Error::EmptyRealization);
    }
    SuccessProfile::new(realization, params, 1.0).solve_threshold(target)
}

/// Interference without fading, I = sum_n r_n^-alpha, accumulated from the
/// farthest interferer inward so small terms add first.
pub fn interference_no_fading(
    realization: &Realization,
    params: &NetworkParams,
) -> InterferencePower {
    let alpha = params.path_loss_exponent();
    let mut sum = 0.0;
    for &d in realization.sorted_distances().iter().rev() {
        sum += pow_alpha(d, -alpha);
    }
    InterferencePower(sum)
}

/// The exact reliability threshold computed from only the k nearest
/// interferers: the root-solve with the interference product truncated at k.
/// This is what a link can actually compute under local information, and the
/// quantity the AM-GM bound below never exceeds.
pub fn threshold_for_reliability_k_nearest(
    realization: &Realization,
    params: &NetworkParams,
    target: ReliabilityTarget,
    k: usize,
) -> Result<SirThreshold> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if realization.len() < k {
        return Err(Error::InsufficientInterferers {
            have: realization.len(),
            need: k,
        });
    }
    let alpha = params.path_loss_exponent();
    let r_link = params.link_distance();
    let coeffs: Vec<f64> = realization.sorted_distances()[..k]
        .iter()
        .map(|&d| pow_alpha(r_link / d, alpha))
        .collect();
    SuccessProfile::from_coefficients(coeffs, 1.0).solve_threshold(target)
}

/// AM-GM lower bound on the k-nearest-information threshold:
///   k R^-alpha ((1/(1-eps))^{1/k} - 1) / sum_{n=1..k} R_n^-alpha.
///
/// Never exceeds `threshold_for_reliability_k_nearest` at the same k (for
/// k = 1 the two coincide), and converges to it as eps -> 0. Note it is an
/// approximation of, not a bound on, the full-information threshold: the
/// single-factor case k = 1 always lies above it when other interferers
/// exist.
pub fn threshold_lower_bound_k(
    realization: &Realization,
    params: &NetworkParams,
    target: ReliabilityTarget,
    k: usize,
) -> Result<SirThreshold> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if realization.len() < k {
        return Err(Error::InsufficientInterferers {
            have: realization.len(),
            need: k,
        });
    }
    let alpha = params.path_loss_exponent();
    let l = target.log_inv_reliability();
    let numer =
        k as f64 * pow_alpha(params.link_distance(), -alpha) * (l / k as f64).exp_m1();
    let mut denom = 0.0;
    for &d in realization.sorted_distances()[..k].iter().rev() {
        denom += pow_alpha(d, -alpha);
    }
    SirThreshold::new(numer / denom)
}

/// Partial-information approximation T ~ log(1/(1-eps)) R^-alpha / I, the
/// k -> infinity limit of the AM-GM bound. Feeding an I computed from only
/// the k nearest interferers realizes the local-information mode.
pub fn threshold_partial_info(
    interference: InterferencePower,
    params: &NetworkParams,
    target: ReliabilityTarget,
) -> Result<SirThreshold> {
    if interference.value() == 0.0 {
        return Err(Error::ZeroInterference);
    }
    let alpha = params.path_loss_exponent();
    SirThreshold::new(
        target.log_inv_reliability() * pow_alpha(params.link_distance(), -alpha)
            / interference.value(),
    )
}

/// Bandwidth-normalized rate log(1 + t) in nats per channel use.
pub fn link_rate(t: SirThreshold) -> f64 {
    t.value().ln_1p()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
