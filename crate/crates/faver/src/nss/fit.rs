//! Moment-matching fits of (asymmetric) generalized Gaussian distributions.
//!
//! The generalized Gaussian density with shape `alpha` and standard deviation
//! `sigma` is
//!
//! ```text
//! f(x) = alpha / (2 beta Gamma(1/alpha)) * exp(-(|x|/beta)^alpha),
//! beta  = sigma * sqrt(Gamma(1/alpha) / Gamma(3/alpha)).
//! ```
//!
//! Fits invert the moment ratio `r(alpha) = Gamma(2/alpha) /
//! sqrt(Gamma(1/alpha) Gamma(3/alpha))`, which equals `E|x| / sqrt(E[x^2])`,
//! over a precomputed grid of shapes. The same grid serves the asymmetric
//! model, whose ratio is `r(alpha)^2` after the usual left/right-spread
//! correction.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Inclusive shape-search range and grid step.
pub const ALPHA_MIN: f64 = 0.05;
pub const ALPHA_MAX: f64 = 10.0;
pub const ALPHA_STEP: f64 = 0.001;

/// Generalized Gaussian parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdParams {
    /// Shape; 2 is Gaussian, 1 is Laplacian.
    pub alpha: f64,
    /// Standard deviation.
    pub sigma: f64,
}

/// Asymmetric generalized Gaussian parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggdParams {
    /// Shape shared by both sides.
    pub nu: f64,
    /// Mean of the distribution.
    pub eta: f64,
    /// Spread left of the origin.
    pub sigma_l: f64,
    /// Spread right of the origin.
    pub sigma_r: f64,
}

pub(crate) fn gamma_fn(x: f64) -> f64 {
    ln_gamma(x).exp()
}

struct AlphaGrid {
    alphas: Vec<f64>,
    /// `r(alpha)`, strictly increasing with alpha.
    ratios: Vec<f64>,
}

fn alpha_grid() -> &'static AlphaGrid {
    static GRID: OnceLock<AlphaGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let steps = ((ALPHA_MAX - ALPHA_MIN) / ALPHA_STEP).round() as usize;
        let mut alphas = Vec::with_capacity(steps + 1);
        let mut ratios = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let a = ALPHA_MIN + i as f64 * ALPHA_STEP;
            alphas.push(a);
            ratios.push((ln_gamma(2.0 / a) - 0.5 * (ln_gamma(1.0 / a) + ln_gamma(3.0 / a))).exp());
        }
        AlphaGrid { alphas, ratios }
    })
}

/// Grid cell whose `key(r)` is closest to `target`; `key` must be monotone.
fn invert_ratio(target: f64, key: impl Fn(f64) -> f64) -> f64 {
    let grid = alpha_grid();
    let idx = grid.ratios.partition_point(|&r| key(r) < target);
    let lo = idx.saturating_sub(1);
    let hi = idx.min(grid.ratios.len() - 1);
    if (key(grid.ratios[lo]) - target).abs() <= (key(grid.ratios[hi]) - target).abs() {
        grid.alphas[lo]
    } else {
        grid.alphas[hi]
    }
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < 64 {
        return Err(Error::InvalidInput(format!(
            "{} samples; at least 64 are required for a stable fit",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite sample".into()));
    }
    Ok(())
}

/// Fits a zero-mean generalized Gaussian by moment matching.
pub fn fit_ggd(samples: &[f64]) -> Result<GgdParams> {
    check_samples(samples)?;
    let first = samples[0];
    if samples.iter().all(|&v| v == first) {
        return Err(Error::DegenerateInput("all samples identical".into()));
    }
    let n = samples.len() as f64;
    let mean_abs = samples.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean_sq = samples.iter().map(|v| v * v).sum::<f64>() / n;
    if mean_sq <= 0.0 {
        return Err(Error::DegenerateInput("zero second moment".into()));
    }
    let gamma_hat = mean_abs / mean_sq.sqrt();
    let alpha = invert_ratio(gamma_hat, |r| r);
    Ok(GgdParams { alpha, sigma: mean_sq.sqrt() })
}

/// Fits an asymmetric generalized Gaussian by moment matching.
///
/// Left and right spreads come from the second moments of the negative and
/// positive samples; the shared shape comes from the spread-corrected moment
/// ratio inverted over the shape grid; the mean parameter is
/// `eta = (beta_r - beta_l) * Gamma(2/nu) / Gamma(1/nu)`.
pub fn fit_aggd(samples: &[f64]) -> Result<AggdParams> {
    check_samples(samples)?;
    let mut neg_sq = 0.0;
    let mut neg_n = 0usize;
    let mut pos_sq = 0.0;
    let mut pos_n = 0usize;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &v in samples {
        abs_sum += v.abs();
        sq_sum += v * v;
        if v < 0.0 {
            neg_sq += v * v;
            neg_n += 1;
        } else if v > 0.0 {
            pos_sq += v * v;
            pos_n += 1;
        }
    }
    if neg_n == 0 || pos_n == 0 {
        return Err(Error::DegenerateInput(
            "need at least one negative and one positive sample".into(),
        ));
    }
    let n = samples.len() as f64;
    let left_std = (neg_sq / neg_n as f64).sqrt();
    let right_std = (pos_sq / pos_n as f64).sqrt();
    let gamma_hat = left_std / right_std;
    let r_hat = (abs_sum / n).powi(2) / (sq_sum / n);
    let r_norm = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0)
        / (gamma_hat * gamma_hat + 1.0).powi(2);
    let nu = invert_ratio(r_norm, |r| r * r);

    let beta_scale = (gamma_fn(1.0 / nu) / gamma_fn(3.0 / nu)).sqrt();
    let beta_l = left_std * beta_scale;
    let beta_r = right_std * beta_scale;
    let eta = (beta_r - beta_l) * gamma_fn(2.0 / nu) / gamma_fn(1.0 / nu);
    Ok(AggdParams { nu, eta, sigma_l: left_std, sigma_r: right_std })
}
