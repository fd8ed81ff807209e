//! The spatial feature path: NSS-34 on Y/U/V at two scales plus gradient
//! magnitude and Laplacian-of-Gaussian maps at the half scale, averaged over
//! the sampled frames. Eight blocks of 34 features give the 272-dimensional
//! spatial vector; the block order is frozen in [`crate::schema`].

use crate::error::{Error, Result};
use crate::nss::{extract_nss34, NSS_DIM};
use crate::plane::{correlate2_symmetric, Plane};
use crate::video::{downscale_half, PlanarFrame};

/// Spatial feature dimensionality: 3 maps x 2 scales + 2 maps x 1 scale, 34 each.
pub const SPATIAL_DIM: usize = 8 * NSS_DIM;

/// Gaussian sigma of the 9x9 Laplacian-of-Gaussian kernel.
pub const LOG_SIGMA: f64 = 1.5;

/// Support of the Laplacian-of-Gaussian kernel.
pub const LOG_WINDOW: usize = 9;

const SOBEL_X: [[f64; 3]; 3] = [[1.0, 0.0, -1.0], [2.0, 0.0, -2.0], [1.0, 0.0, -1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]];

/// The 272-dimensional spatial feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFeatures {
    values: Vec<f64>,
}

impl SpatialFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

fn kernel_from(rows: &[[f64; 3]; 3]) -> Plane {
    Plane::from_fn(3, 3, |r, c| rows[r][c])
}

/// Sobel gradient magnitude with symmetric border handling; output has the
/// input shape.
pub fn gradient_magnitude(plane: &Plane) -> Result<Plane> {
    if plane.height() < 3 || plane.width() < 3 {
        return Err(Error::InvalidInput(format!(
            "plane {}x{} is too small for the 3x3 Sobel kernels",
            plane.height(),
            plane.width()
        )));
    }
    let gx = correlate2_symmetric(plane, &kernel_from(&SOBEL_X));
    let gy = correlate2_symmetric(plane, &kernel_from(&SOBEL_Y));
    let data = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    Ok(Plane::from_raw(plane.height(), plane.width(), data))
}

/// The sampled 9x9 Laplacian-of-Gaussian kernel,
/// `(x^2 + y^2 - 2 sigma^2) / (2 pi sigma^6) * exp(-(x^2+y^2)/(2 sigma^2))`,
/// mean-subtracted so its taps sum to exactly zero.
pub fn log_kernel() -> Plane {
    let r = (LOG_WINDOW / 2) as isize;
    let s2 = LOG_SIGMA * LOG_SIGMA;
    let mut k = Plane::from_fn(LOG_WINDOW, LOG_WINDOW, |row, col| {
        let y = row as isize as f64 - r as f64;
        let x = col as isize as f64 - r as f64;
        let rr = x * x + y * y;
        (rr - 2.0 * s2) / (2.0 * std::f64::consts::PI * s2 * s2 * s2) * (-rr / (2.0 * s2)).exp()
    });
    let mean = k.mean();
    for v in k.data_mut() {
        *v -= mean;
    }
    k
}

/// Laplacian-of-Gaussian response map with symmetric border handling.
pub fn laplacian_of_gaussian(plane: &Plane) -> Result<Plane> {
    if plane.height() < LOG_WINDOW || plane.width() < LOG_WINDOW {
        return Err(Error::InvalidInput(format!(
            "plane {}x{} is too small for the {LOG_WINDOW}x{LOG_WINDOW} kernel",
            plane.height(),
            plane.width()
        )));
    }
    Ok(correlate2_symmetric(plane, &log_kernel()))
}

/// Spatial features of a single frame, in schema order:
/// `[Y@1, Y@1/2, U@1, U@1/2, V@1, V@1/2, GM@1/2, LoG@1/2] x 34`.
///
/// Chroma planes are processed at their stored resolution; for 4:2:0 video
/// they are not upsampled to luma size.
pub fn frame_spatial_features(frame: &PlanarFrame) -> Result<Vec<f64>> {
    frame.validate()?;
    let y_half = downscale_half(&frame.y)?;
    let u_half = downscale_half(&frame.u)?;
    let v_half = downscale_half(&frame.v)?;
    let gm = gradient_magnitude(&y_half)?;
    let log = laplacian_of_gaussian(&y_half)?;

    let maps: [&Plane; 8] =
        [&frame.y, &y_half, &frame.u, &u_half, &frame.v, &v_half, &gm, &log];
    let mut values = Vec::with_capacity(SPATIAL_DIM);
    for map in maps {
        values.extend_from_slice(extract_nss34(map)?.as_slice());
    }
    Ok(values)
}

/// Extracts spatial features from a frame sequence: per-frame NSS blocks,
/// averaged elementwise over frames in index order.
pub fn extract_spatial(frames: &[PlanarFrame]) -> Result<SpatialFeatures> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("no frames for spatial extraction".into()));
    }
    let mut acc = vec![0.0; SPATIAL_DIM];
    for frame in frames {
        let f = frame_spatial_features(frame)?;
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
    }
    let n = frames.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(SpatialFeatures { values: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video::PixelFormat;

    fn gray_frame(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> PlanarFrame {
        let y = Plane::from_fn(height, width, f);
        let (cw, ch) = PixelFormat::Yuv420.chroma_dims(width, height);
        PlanarFrame {
            y,
            u: Plane::constant(ch, cw, 128.0),
            v: Plane::constant(ch, cw, 128.0),
            format: PixelFormat::Yuv420,
        }
    }

    #[test]
    fn constant_plane_has_zero_gradient() {
        let gm = gradient_magnitude(&Plane::constant(8, 8, 57.0)).unwrap();
        for &v in gm.data() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_step_edge_response_is_4h() {
        // Columns 0..3 at value a, columns 3.. at a + h.
        let (a, h) = (10.0, 7.0);
        let p = Plane::from_fn(7, 8, |_, c| if c < 3 { a } else { a + h });
        let gm = gradient_magnitude(&p).unwrap();
        for r in 0..7 {
            // Both columns adjacent to the step see the full 1+2+1 row sum.
            assert!((gm.get(r, 2) - 4.0 * h).abs() < 1e-9);
            assert!((gm.get(r, 3) - 4.0 * h).abs() < 1e-9);
            // Far from the step the plane is flat.
            assert!(gm.get(r, 0).abs() < 1e-9);
            assert!(gm.get(r, 6).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_scales_with_input() {
        let p = Plane::from_fn(9, 9, |r, c| ((r * 3 + c * 5) % 11) as f64);
        let scaled = p.map(|v| v * -2.5);
        let gm = gradient_magnitude(&p).unwrap();
        let gm_scaled = gradient_magnitude(&scaled).unwrap();
        for i in 0..gm.len() {
            assert!((gm_scaled.data()[i] - 2.5 * gm.data()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn log_kernel_sums_to_zero() {
        let k = log_kernel();
        assert!(k.data().iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn log_of_constant_is_zero() {
        let out = laplacian_of_gaussian(&Plane::constant(12, 12, 200.0)).unwrap();
        for &v in out.data() {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn log_annihilates_affine_ramp_interior() {
        let p = Plane::from_fn(16, 16, |r, c| 3.0 * r as f64 - 1.5 * c as f64 + 10.0);
        let out = laplacian_of_gaussian(&p).unwrap();
        for r in 4..12 {
            for c in 4..12 {
                assert!(out.get(r, c).abs() < 1e-9, "LoG({r},{c}) = {}", out.get(r, c));
            }
        }
    }

    #[test]
    fn spatial_vector_is_272_dimensional() {
        let frame = gray_frame(64, 96, |r, c| ((r * 37 + c * 11) % 256) as f64);
        let f = extract_spatial(&[frame]).unwrap();
        assert_eq!(f.as_slice().len(), 272);
        assert!(f.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn duplicate_frames_average_to_the_same_vector() {
        let frame = gray_frame(64, 96, |r, c| ((r * 5 + c * 3) % 200) as f64);
        let one = extract_spatial(&[frame.clone()]).unwrap();
        let two = extract_spatial(&[frame.clone(), frame]).unwrap();
        for (a, b) in one.as_slice().iter().zip(two.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_frame_list_is_an_error() {
        assert!(matches!(extract_spatial(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn constant_video_degenerates_to_the_fallback_vector() {
        let frame = gray_frame(64, 96, |_, _| 90.0);
        let f = extract_spatial(&[frame]).unwrap();
        assert_eq!(f.as_slice().len(), 272);
        for block in 0..8 {
            let v = &f.as_slice()[block * 34..(block + 1) * 34];
            assert_eq!((v[0], v[1]), crate::nss::GGD_FALLBACK, "block {block}");
            assert_eq!(v[3], crate::nss::RHO_SENTINEL, "block {block}");
        }
    }

    #[test]
    fn frame_order_does_not_change_the_mean() {
        let frames: Vec<PlanarFrame> = (0..4)
            .map(|t| gray_frame(64, 96, |r, c| ((r * 3 + c * 7 + t * 31) % 251) as f64))
            .collect();
        let forward = extract_spatial(&frames).unwrap();
        let mut reversed = frames.clone();
        reversed.reverse();
        let backward = extract_spatial(&reversed).unwrap();
        for (a, b) in forward.as_slice().iter().zip(backward.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn blocks_pin_native_chroma_and_half_scale_maps() {
        // The u_full block must be the extractor applied to the stored
        // chroma plane (never upsampled), and the gm_half block the
        // extractor applied to the filtered half-scale luma.
        let frame = gray_frame(64, 96, |r, c| ((r * 13 + c * 5) % 256) as f64);
        let frame = PlanarFrame {
            u: Plane::from_fn(32, 48, |r, c| ((r * 7 + c * 3) % 200) as f64),
            ..frame
        };
        let f = frame_spatial_features(&frame).unwrap();
        let u_block = &f[2 * 34..3 * 34];
        assert_eq!(u_block, extract_nss34(&frame.u).unwrap().as_slice());

        let y_half = downscale_half(&frame.y).unwrap();
        let gm_block = &f[6 * 34..7 * 34];
        let expected = extract_nss34(&gradient_magnitude(&y_half).unwrap()).unwrap();
        assert_eq!(gm_block, expected.as_slice());
    }
}
