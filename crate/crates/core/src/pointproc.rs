//! Sampling of Poisson bipolar realizations around the typical link.
//!
//! The typical receiver sits at the origin; interferers are a homogeneous
//! PPP restricted to a disk window whose radius is sized so the mean
//! interference truncated away stays below a caller-chosen fraction of the
//! desired-signal power scale R^-alpha (Campbell's formula gives the mean
//! interference beyond radius w as 2 pi lambda w^{2-alpha} / (alpha - 2)).
//!
//! Sampling is pure given (params, config); per-realization streams derive
//! from a counter-mixed master seed so parallel and serial runs agree
//! bit-for-bit.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Poisson};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::model::{NetworkParams, Realization};

/// Sampling window and stream for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    window_radius: f64,
    truncation_tol: f64,
    seed: u64,
}

impl SamplingConfig {
    /// Window sized from the relative truncated-interference tolerance.
    pub fn from_tolerance(params: &NetworkParams, truncation_tol: f64, seed: u64) -> Result<Self> {
        if !(truncation_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation_tol must be positive, got {truncation_tol}"
            )));
        }
        Ok(Self {
            window_radius: required_window_radius(params, truncation_tol),
            truncation_tol,
            seed,
        })
    }

    /// Explicit window radius; `truncation_tol` is kept for bookkeeping only.
    pub fn with_radius(window_radius: f64, truncation_tol: f64, seed: u64) -> Result<Self> {
        if !(window_radius > 0.0) || !(truncation_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "window_radius and truncation_tol must be positive".into(),
            ));
        }
        Ok(Self {
            window_radius,
            truncation_tol,
            seed,
        })
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Axis-aligned rectangle for all-links realization reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::InvalidParameter(
                "rectangle must have positive width and height".into(),
            ));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn centered(width: f64, height: f64) -> Result<Self> {
        Self::new(-0.5 * width, 0.5 * width, -0.5 * height, 0.5 * height)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Radius at which the mean truncated interference
/// 2 pi lambda w^{2-alpha} / (alpha - 2) equals tol * R^-alpha:
///   w = (2 pi lambda R^alpha / ((alpha - 2) tol))^{1/(alpha-2)}.
pub fn required_window_radius(params: &NetworkParams, truncation_tol: f64) -> f64 {
    let alpha = params.path_loss_exponent();
    let base = 2.0 * std::f64::consts::PI * params.density()
        * crate::model::pow_alpha(params.link_distance(), alpha)
        / ((alpha - 2.0) * truncation_tol);
    base.powf(1.0 / (alpha - 2.0))
}

/// Derives an independent stream seed for (realization index, resample
/// attempt) from the master seed: a Weyl combination pushed through the
/// SplitMix64 finalizer.
pub fn mix_seed(master: u64, index: u64, attempt: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(attempt.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stream_rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn sample_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Draws N ~ Poisson(lambda pi w^2) interferers independently uniform in the
/// disk of radius w around the typical receiver. The typical transmitter at
/// (R, 0) is not part of the interferer set. Deterministic given the seed.
pub fn sample_realization(params: &NetworkParams, config: &SamplingConfig) -> Realization {
    let mut rng = stream_rng(config.seed());
    let w = config.window_radius();
    let n = sample_count(&mut rng, params.density() * std::f64::consts::PI * w * w);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        // rejection from the enclosing square: uniform in the disk, no trig
        let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let y: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let s = x * x + y * y;
        if s <= 1.0 && s > 0.0 {
            points.push([x * w, y * w]);
        }
    }
    Realization::from_points(points, w).expect("sampled points satisfy window invariants")
}

/// Transmitter PPP in the disk window with a receiver at distance R in an
/// independent uniform direction per transmitter (all-links mode).
pub fn sample_bipolar_links(
    params: &NetworkParams,
    config: &SamplingConfig,
) -> Vec<([f64; 2], [f64; 2])> {
    let mut rng = stream_rng(config.seed());
    let w = config.window_radius();
    let n = sample_count(&mut rng, params.density() * std::f64::consts::PI * w * w);
    sample_links_into(&mut rng, params.link_distance(), n, |rng| loop {
        let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let y: f64 = rng.random::<f64>() * 2.0 - 1.0;
        if x * x + y * y <= 1.0 {
            return [x * w, y * w];
        }
    })
}

/// Rectangle-window variant used by the realization report.
pub fn sample_bipolar_links_rect(
    params: &NetworkParams,
    rect: &Rect,
    seed: u64,
) -> Vec<([f64; 2], [f64; 2])> {
    let mut rng = stream_rng(seed);
    let n = sample_count(&mut rng, params.density() * rect.area());
    let (wx, wy) = (rect.x_max - rect.x_min, rect.y_max - rect.y_min);
    sample_links_into(&mut rng, params.link_distance(), n, |rng| {
        [
            rect.x_min + rng.random::<f64>() * wx,
            rect.y_min + rng.random::<f64>() * wy,
        ]
    })
}

fn sample_links_into<R: Rng>(
    rng: &mut R,
    link_distance: f64,
    n: usize,
    mut place: impl FnMut(&mut R) -> [f64; 2],
) -> Vec<([f64; 2], [f64; 2])> {
    let mut links = Vec::with_capacity(n);
    for _ in 0..n {
        let tx = place(rng);
        let phi = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
        let rx = [
            tx[0] + link_distance * phi.cos(),
            tx[1] + link_distance * phi.sin(),
        ];
        links.push((tx, rx));
    }
    links
}

/// First k entries of the ascending distance list.
pub fn nearest_k_distances(realization: &Realization, k: usize) -> Result<&[f64]> {
    if realization.len() < k {
        return Err(Error::InsufficientInterferers {
            have: realization.len(),
            need: k,
        });
    }
    Ok(&realization.sorted_distances()[..k])
}

/// Streams the squared distances of one PPP realization without
/// materializing points: given N, the squared radii are iid uniform on
/// (0, w^2]. Distributionally identical to `sample_realization` for every
/// distance-based functional; used by the ultrareliable Monte Carlo paths
/// where materializing ~1e6 points per realization would dominate runtime.
/// Returns the point count.
pub(crate) fn stream_radii_sq(
    params: &NetworkParams,
    window_radius: f64,
    seed: u64,
    visit: &mut impl FnMut(f64),
) -> usize {
    let mut rng = stream_rng(seed);
    let w2 = window_radius * window_radius;
    let n = sample_count(
        &mut rng,
        params.density() * std::f64::consts::PI * w2,
    );
    let scale = w2 / 9_007_199_254_740_992.0; // 2^53
    for _ in 0..n {
        // (0, 1] * w^2: never exactly zero, so distances stay positive
        let u = ((rng.next_u64() >> 11) + 1) as f64;
        visit(u * scale);
    }
    n
}
