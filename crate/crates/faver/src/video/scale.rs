//! Spatial rescaling primitives used by both feature paths.

use crate::error::{Error, Result};
use crate::plane::{correlate_separable_symmetric, gaussian_taps, Plane};

/// Gaussian sigma applied before each 2x decimation. The 3-sigma truncation
/// at this width gives a 3-tap kernel.
pub const DOWNSCALE_SIGMA: f64 = 0.5;

/// Halves a plane: Gaussian smoothing (sigma 0.5, truncated at 3 sigma,
/// unit sum) followed by taking every second row and column starting at 0.
/// Output shape is `(ceil(h/2), ceil(w/2))`.
pub fn downscale_half(plane: &Plane) -> Result<Plane> {
    if plane.height() < 2 || plane.width() < 2 {
        return Err(Error::InvalidInput(format!(
            "plane {}x{} is too small to downscale",
            plane.height(),
            plane.width()
        )));
    }
    let radius = (3.0 * DOWNSCALE_SIGMA).floor() as usize; // 1
    let taps = gaussian_taps(DOWNSCALE_SIGMA, radius);
    let smoothed = correlate_separable_symmetric(plane, &taps);
    let oh = plane.height().div_ceil(2);
    let ow = plane.width().div_ceil(2);
    Ok(Plane::from_fn(oh, ow, |r, c| smoothed.get(2 * r, 2 * c)))
}

/// Bilinearly resizes a plane down to `target_height`, keeping the aspect
/// ratio (`width = round(w * target/h)`). Planes already at or below the
/// target height are returned unchanged — this path never upscales.
///
/// Sampling maps output pixel centers onto input pixel centers and clamps
/// coordinates to the edges.
pub fn resize_to_height(plane: &Plane, target_height: usize) -> Result<Plane> {
    if target_height < 16 {
        return Err(Error::InvalidInput(format!(
            "target height {target_height} is below the 16-pixel minimum"
        )));
    }
    let (h, w) = (plane.height(), plane.width());
    if h <= target_height {
        return Ok(plane.clone());
    }
    let oh = target_height;
    let ow = ((w as f64 * target_height as f64 / h as f64).round() as usize).max(1);
    let scale_y = h as f64 / oh as f64;
    let scale_x = w as f64 / ow as f64;
    let out = Plane::from_fn(oh, ow, |r, c| {
        let sy = ((r as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f64);
        let sx = ((c as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f64);
        let y0 = sy.floor() as usize;
        let x0 = sx.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let x1 = (x0 + 1).min(w - 1);
        let fy = sy - y0 as f64;
        let fx = sx - x0 as f64;
        let top = plane.get(y0, x0) * (1.0 - fx) + plane.get(y0, x1) * fx;
        let bottom = plane.get(y1, x0) * (1.0 - fx) + plane.get(y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_plane_downscales_to_same_constant() {
        let p = Plane::constant(9, 13, 77.5);
        let half = downscale_half(&p).unwrap();
        assert_eq!((half.height(), half.width()), (5, 7));
        for &v in half.data() {
            assert!((v - 77.5).abs() < 1e-9);
        }
    }

    #[test]
    fn downscale_shapes() {
        let p = Plane::zeros(1080, 1920);
        let half = downscale_half(&p).unwrap();
        assert_eq!((half.height(), half.width()), (540, 960));
    }

    #[test]
    fn resize_1080p_to_512() {
        let p = Plane::zeros(1080, 1920);
        let out = resize_to_height(&p, 512).unwrap();
        assert_eq!((out.height(), out.width()), (512, 910));
    }

    #[test]
    fn resize_never_upscales() {
        let p = Plane::from_fn(480, 640, |r, c| (r + c) as f64);
        let out = resize_to_height(&p, 512).unwrap();
        assert_eq!((out.height(), out.width()), (480, 640));
        assert_eq!(out, p);
    }

    #[test]
    fn resize_preserves_constants() {
        let p = Plane::constant(600, 800, 12.25);
        let out = resize_to_height(&p, 512).unwrap();
        for &v in out.data() {
            assert!((v - 12.25).abs() < 1e-12);
        }
    }
}
