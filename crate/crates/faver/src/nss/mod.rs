//! The shared 34-dimensional natural-scene-statistics feature extractor.
//!
//! For one image map, the extractor produces, in fixed order:
//!
//! | index   | features                             | source                       |
//! |---------|--------------------------------------|------------------------------|
//! | f1–f2   | GGD (alpha, sigma)                   | MSCN coefficients            |
//! | f3–f4   | (phi, rho)                           | sigma field                  |
//! | f5–f8   | AGGD (nu, eta, sigma_l, sigma_r)     | horizontal products          |
//! | f9–f12  | AGGD (nu, eta, sigma_l, sigma_r)     | vertical products            |
//! | f13–f16 | AGGD (nu, eta, sigma_l, sigma_r)     | main-diagonal products       |
//! | f17–f20 | AGGD (nu, eta, sigma_l, sigma_r)     | secondary-diagonal products  |
//! | f21–f34 | GGD (alpha, sigma) x 7               | log-derivative maps D1–D7    |
//!
//! Degenerate fits (flat maps, one-sided products) never abort extraction;
//! they fall back to fixed, finite defaults so downstream regression never
//! sees a NaN.

mod fit;
mod maps;
mod mscn;

pub use fit::{fit_aggd, fit_ggd, AggdParams, GgdParams, ALPHA_MAX, ALPHA_MIN, ALPHA_STEP};
pub use maps::{log_derivatives, paired_products, sigma_stats, LOG_OFFSET, RHO_SENTINEL};
pub use mscn::{compute_mscn, MscnResult, MSCN_C, MSCN_RADIUS, MSCN_SIGMA};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Number of features per image map.
pub const NSS_DIM: usize = 34;

/// Fallback `(alpha, sigma)` when a GGD fit is degenerate.
pub const GGD_FALLBACK: (f64, f64) = (10.0, 0.0);

/// Fallback `(nu, eta, sigma_l, sigma_r)` when an AGGD fit is degenerate.
pub const AGGD_FALLBACK: (f64, f64, f64, f64) = (10.0, 0.0, 0.0, 0.0);

/// The 34-dimensional feature vector for one image map.
#[derive(Debug, Clone, PartialEq)]
pub struct Nss34 {
    values: [f64; NSS_DIM],
}

impl Nss34 {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values.to_vec()
    }
}

fn ggd_or_fallback(samples: &[f64]) -> (f64, f64) {
    match fit_ggd(samples) {
        Ok(p) => (p.alpha, p.sigma),
        Err(_) => GGD_FALLBACK,
    }
}

fn aggd_or_fallback(samples: &[f64]) -> (f64, f64, f64, f64) {
    match fit_aggd(samples) {
        Ok(p) => (p.nu, p.eta, p.sigma_l, p.sigma_r),
        Err(_) => AGGD_FALLBACK,
    }
}

/// Runs the full NSS-34 extractor on one plane (at least 16x16).
pub fn extract_nss34(plane: &Plane) -> Result<Nss34> {
    if plane.height() < 16 || plane.width() < 16 {
        return Err(Error::InvalidInput(format!(
            "plane {}x{} is smaller than the 16x16 extractor minimum",
            plane.height(),
            plane.width()
        )));
    }
    let mscn = compute_mscn(plane)?;
    let mut values = [0.0; NSS_DIM];
    let mut at = 0usize;
    let mut push = |vals: &[f64], values: &mut [f64; NSS_DIM]| {
        values[at..at + vals.len()].copy_from_slice(vals);
        at += vals.len();
    };

    let (alpha, sigma) = ggd_or_fallback(mscn.mscn.data());
    push(&[alpha, sigma], &mut values);

    let (phi, rho) = sigma_stats(&mscn.sigma);
    push(&[phi, rho], &mut values);

    for map in paired_products(&mscn.mscn)?.iter() {
        let (nu, eta, sl, sr) = aggd_or_fallback(map.data());
        push(&[nu, eta, sl, sr], &mut values);
    }

    for map in log_derivatives(&mscn.mscn)?.iter() {
        let (alpha, sigma) = ggd_or_fallback(map.data());
        push(&[alpha, sigma], &mut values);
    }

    debug_assert_eq!(at, NSS_DIM);
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(Nss34 { values })
}
