//! Derived maps fitted by the NSS extractor: pairwise neighbor products,
//! log-derivative maps, and sigma-field statistics.

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Offset added inside the logarithm after shifting samples nonnegative.
pub const LOG_OFFSET: f64 = 0.1;

/// Sentinel returned for `rho` when the sigma field has zero variance.
pub const RHO_SENTINEL: f64 = 1e6;

/// Products of adjacent MSCN coefficients along the horizontal, vertical,
/// main-diagonal, and secondary-diagonal directions. Outputs cover the valid
/// region only, so shapes shrink by one along the paired axes.
pub fn paired_products(mscn: &Plane) -> Result<[Plane; 4]> {
    let (h, w) = (mscn.height(), mscn.width());
    if h < 2 || w < 2 {
        return Err(Error::InvalidInput(format!("plane {h}x{w} has no adjacent pairs")));
    }
    let horizontal = Plane::from_fn(h, w - 1, |i, j| mscn.get(i, j) * mscn.get(i, j + 1));
    let vertical = Plane::from_fn(h - 1, w, |i, j| mscn.get(i, j) * mscn.get(i + 1, j));
    let diag_main = Plane::from_fn(h - 1, w - 1, |i, j| mscn.get(i, j) * mscn.get(i + 1, j + 1));
    let diag_secondary =
        Plane::from_fn(h - 1, w - 1, |i, j| mscn.get(i, j + 1) * mscn.get(i + 1, j));
    Ok([horizontal, vertical, diag_main, diag_secondary])
}

/// Log-domain gradient maps along seven orientations.
///
/// The plane is shifted so its minimum is zero, offset by [`LOG_OFFSET`], and
/// logged; the seven difference stencils below are then evaluated on the
/// valid region:
///
/// ```text
/// D1 J(i,j+1) - J(i,j)                        D5 J(i-1,j) + J(i+1,j) - J(i,j-1) - J(i,j+1)
/// D2 J(i+1,j) - J(i,j)                        D6 J(i,j) + J(i+1,j+1) - J(i,j+1) - J(i+1,j)
/// D3 J(i+1,j+1) - J(i,j)                      D7 J(i-1,j-1) + J(i+1,j+1) - J(i-1,j+1) - J(i+1,j-1)
/// D4 J(i+1,j-1) - J(i,j)
/// ```
pub fn log_derivatives(mscn: &Plane) -> Result<[Plane; 7]> {
    let (h, w) = (mscn.height(), mscn.width());
    if h < 3 || w < 3 {
        return Err(Error::InvalidInput(format!("plane {h}x{w} is too small for 3x3 stencils")));
    }
    let shift = -mscn.min();
    let j = mscn.map(|v| (v + shift + LOG_OFFSET).ln());

    let d1 = Plane::from_fn(h, w - 1, |i, c| j.get(i, c + 1) - j.get(i, c));
    let d2 = Plane::from_fn(h - 1, w, |i, c| j.get(i + 1, c) - j.get(i, c));
    let d3 = Plane::from_fn(h - 1, w - 1, |i, c| j.get(i + 1, c + 1) - j.get(i, c));
    let d4 = Plane::from_fn(h - 1, w - 1, |i, c| j.get(i + 1, c) - j.get(i, c + 1));
    let d5 = Plane::from_fn(h - 2, w - 2, |i, c| {
        let (i, c) = (i + 1, c + 1);
        j.get(i - 1, c) + j.get(i + 1, c) - j.get(i, c - 1) - j.get(i, c + 1)
    });
    let d6 = Plane::from_fn(h - 1, w - 1, |i, c| {
        j.get(i, c) + j.get(i + 1, c + 1) - j.get(i, c + 1) - j.get(i + 1, c)
    });
    let d7 = Plane::from_fn(h - 2, w - 2, |i, c| {
        let (i, c) = (i + 1, c + 1);
        j.get(i - 1, c - 1) + j.get(i + 1, c + 1) - j.get(i - 1, c + 1) - j.get(i + 1, c - 1)
    });
    Ok([d1, d2, d3, d4, d5, d6, d7])
}

/// Mean `phi` and squared inverse coefficient of variation `rho` of the sigma
/// field; statistics use the population (divide-by-N) convention. `rho` is
/// capped at [`RHO_SENTINEL`]: a flat field (zero or vanishing variance)
/// returns exactly the cap, and the feature stays finite for any input.
pub fn sigma_stats(sigma: &Plane) -> (f64, f64) {
    let n = sigma.len() as f64;
    let phi = sigma.data().iter().sum::<f64>() / n;
    let var = sigma.data().iter().map(|&v| (v - phi) * (v - phi)).sum::<f64>() / n;
    let omega = var.sqrt();
    let rho = if omega > 0.0 { (phi / omega).powi(2).min(RHO_SENTINEL) } else { RHO_SENTINEL };
    (phi, rho)
}
