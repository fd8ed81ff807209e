//! Mean-subtracted contrast-normalized (MSCN) coefficients.
//!
//! Every sample is debiased by a local Gaussian-weighted mean and divisively
//! normalized by the local Gaussian-weighted standard deviation plus a
//! saturation constant:
//!
//! ```text
//! mscn(i,j) = (I(i,j) - mu(i,j)) / (sigma(i,j) + C)
//! ```
//!
//! The weighting window is a 7x7 circularly symmetric Gaussian sampled out to
//! three standard deviations and rescaled to unit volume.

use crate::error::{Error, Result};
use crate::plane::{correlate_separable_symmetric, gaussian_taps, Plane};

/// Saturation constant in the divisive normalization.
pub const MSCN_C: f64 = 1.0;

/// Half-width of the weighting window (7x7 support).
pub const MSCN_RADIUS: usize = 3;

/// Gaussian sigma of the weighting window, chosen so the 7-tap support spans
/// roughly three standard deviations.
pub const MSCN_SIGMA: f64 = 7.0 / 6.0;

/// MSCN coefficients together with the local mean and sigma fields they were
/// normalized by.
#[derive(Debug, Clone)]
pub struct MscnResult {
    pub mscn: Plane,
    pub mu: Plane,
    pub sigma: Plane,
}

/// Computes MSCN coefficients of a plane.
///
/// `mu` is the Gaussian-weighted local mean, `sigma` the square root of the
/// Gaussian-weighted local variance (clamped at zero before the root), and
/// borders are handled by symmetric reflection. Requires a finite plane of at
/// least 7x7 samples.
pub fn compute_mscn(plane: &Plane) -> Result<MscnResult> {
    let span = 2 * MSCN_RADIUS + 1;
    if plane.height() < span || plane.width() < span {
        return Err(Error::InvalidInput(format!(
            "plane {}x{} is smaller than the {span}x{span} normalization window",
            plane.height(),
            plane.width()
        )));
    }
    if !plane.all_finite() {
        return Err(Error::Numeric("non-finite sample in plane".into()));
    }
    let taps = gaussian_taps(MSCN_SIGMA, MSCN_RADIUS);
    // Work on globally centered samples: the local variance is unchanged but
    // its cancellation error no longer scales with the plane's DC level, so
    // constant planes of any value come out with exactly zero sigma.
    let global_mean = plane.mean();
    let centered = plane.map(|v| v - global_mean);
    let mu0 = correlate_separable_symmetric(&centered, &taps);
    let ex2 = correlate_separable_symmetric(&centered.map(|v| v * v), &taps);

    let n = plane.len();
    let mut mu = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut mscn = Vec::with_capacity(n);
    for i in 0..n {
        let m0 = mu0.data()[i];
        let var = (ex2.data()[i] - m0 * m0).max(0.0);
        let s = var.sqrt();
        mu.push(m0 + global_mean);
        sigma.push(s);
        mscn.push((centered.data()[i] - m0) / (s + MSCN_C));
    }
    Ok(MscnResult {
        mscn: Plane::from_raw(plane.height(), plane.width(), mscn),
        mu: Plane::from_raw(plane.height(), plane.width(), mu),
        sigma: Plane::from_raw(plane.height(), plane.width(), sigma),
    })
}
