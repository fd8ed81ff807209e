//! Synthetic clip builders for fixtures, benchmarks, and the runnable guide
//! examples. All generators are deterministic in their seed.

use std::path::Path;

use rand::Rng;

use crate::error::Result;
use crate::plane::Plane;
use crate::seeds::derive_rng;
use crate::video::{write_y4m, Framerate, PixelFormat, PlanarFrame};

fn noise_plane(height: usize, width: usize, rng: &mut impl Rng) -> Plane {
    Plane::from_fn(height, width, |_, _| f64::from(rng.gen_range(0u8..=255)))
}

/// A frame of uniform 8-bit noise.
pub fn noise_frame(width: usize, height: usize, format: PixelFormat, seed: u64, index: u64) -> PlanarFrame {
    let mut rng = derive_rng(seed, "noise-frame", index);
    let (cw, ch) = format.chroma_dims(width, height);
    PlanarFrame {
        y: noise_plane(height, width, &mut rng),
        u: noise_plane(ch, cw, &mut rng),
        v: noise_plane(ch, cw, &mut rng),
        format,
    }
}

/// Independent noise frames (temporally white).
pub fn noise_clip(
    width: usize,
    height: usize,
    format: PixelFormat,
    frames: usize,
    seed: u64,
) -> Vec<PlanarFrame> {
    (0..frames).map(|i| noise_frame(width, height, format, seed, i as u64)).collect()
}

/// A clip whose luma is a fixed noise field translating horizontally by
/// `step_px` pixels per frame (chroma stays flat). Motion is rendered by
/// sliding a window over one wide noise image, so inter-frame correlation is
/// exact.
pub fn translating_noise_clip(
    width: usize,
    height: usize,
    frames: usize,
    step_px: usize,
    seed: u64,
) -> Vec<PlanarFrame> {
    let mut rng = derive_rng(seed, "translating-noise", 0);
    let field = noise_plane(height, width + step_px * frames, &mut rng);
    let (cw, ch) = PixelFormat::Yuv420.chroma_dims(width, height);
    (0..frames)
        .map(|t| {
            let off = t * step_px;
            PlanarFrame {
                y: Plane::from_fn(height, width, |r, c| field.get(r, c + off)),
                u: Plane::constant(ch, cw, 128.0),
                v: Plane::constant(ch, cw, 128.0),
                format: PixelFormat::Yuv420,
            }
        })
        .collect()
}

/// Like [`translating_noise_clip`], but the sliding field is first smoothed
/// with a separable Gaussian so nearby frames differ only slightly. Small
/// per-frame motion then produces small temporal bandpass responses, while a
/// frame-dropped version of the same clip jumps several pixels at once and
/// produces much larger ones — the contrast that makes temporal statistics
/// framerate-sensitive.
pub fn smooth_translating_noise_clip(
    width: usize,
    height: usize,
    frames: usize,
    step_px: usize,
    smoothing_sigma: f64,
    seed: u64,
) -> Vec<PlanarFrame> {
    use crate::plane::{correlate_separable_symmetric, gaussian_taps};
    let mut rng = derive_rng(seed, "smooth-translating-noise", 0);
    let raw = noise_plane(height, width + step_px * frames, &mut rng);
    let taps = gaussian_taps(smoothing_sigma, (3.0 * smoothing_sigma).ceil() as usize);
    let smoothed = correlate_separable_symmetric(&raw, &taps);
    // Restretch to the nominal 0-255 range lost to smoothing.
    let (lo, hi) = (smoothed.min(), smoothed.max());
    let span = (hi - lo).max(1e-9);
    let field = smoothed.map(|v| (v - lo) / span * 255.0);
    let (cw, ch) = PixelFormat::Yuv420.chroma_dims(width, height);
    (0..frames)
        .map(|t| {
            let off = t * step_px;
            PlanarFrame {
                y: Plane::from_fn(height, width, |r, c| field.get(r, c + off)),
                u: Plane::constant(ch, cw, 128.0),
                v: Plane::constant(ch, cw, 128.0),
                format: PixelFormat::Yuv420,
            }
        })
        .collect()
}

/// Emulates frame-rate reduction by frame dropping at equal duration: keeps
/// every `factor`-th frame and repeats it `factor` times, so the output has
/// the same frame count and timeline as the input.
pub fn drop_and_repeat(frames: &[PlanarFrame], factor: usize) -> Vec<PlanarFrame> {
    assert!(factor >= 1);
    frames
        .iter()
        .enumerate()
        .map(|(t, _)| frames[(t / factor) * factor].clone())
        .collect()
}

/// Writes a noise clip straight to a Y4M file and returns its frame count.
pub fn write_noise_y4m(
    path: &Path,
    width: usize,
    height: usize,
    framerate: Framerate,
    seconds: f64,
    seed: u64,
) -> Result<usize> {
    let frames = (seconds * framerate.as_f64()).round() as usize;
    let mut iter = (0..frames).map(|i| noise_frame(width, height, PixelFormat::Yuv420, seed, i as u64));
    write_y4m(path, framerate, &mut iter)
}
