//! The temporal feature path: three-level wavelet-packet filter banks applied
//! along time, spatial NSS-34 statistics of each subband response, averaged
//! over sampled windows.
//!
//! A depth-3 full packet tree over base filters `g` (lowpass) and `h`
//! (highpass) has eight leaves. The equivalent FIR filter of leaf
//! `(s1, s2, s3)` is the cascade `f_{s1} * up2(f_{s2}) * up4(f_{s3})`, where
//! `upN` inserts `N-1` zeros between taps. The all-lowpass leaf carries the
//! DC band and is dropped; the remaining seven are ordered from lowest to
//! highest nominal center frequency (the Gray-code ordering of packet
//! leaves).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nss::{extract_nss34, NSS_DIM};
use crate::plane::Plane;
use crate::video::{downscale_half, SamplingPlan};

/// Temporal feature dimensionality: 7 subbands x 2 scales x 34.
pub const TEMPORAL_DIM: usize = 7 * 2 * NSS_DIM;

/// Number of bandpass subbands kept from the depth-3 packet tree.
pub const NUM_SUBBANDS: usize = 7;

/// Frames fed to the temporal path are spatially reduced to this height.
pub const TEMPORAL_HEIGHT: usize = 512;

/// Wavelet family used to build the temporal filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Haar,
    Db2,
    Bior22,
}

impl WaveletFamily {
    pub const ALL: [WaveletFamily; 3] = [WaveletFamily::Haar, WaveletFamily::Db2, WaveletFamily::Bior22];

    pub fn tag(self) -> &'static str {
        match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Db2 => "db2",
            WaveletFamily::Bior22 => "bior22",
        }
    }

    /// Decomposition lowpass taps.
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR_LO,
            WaveletFamily::Db2 => &DB2_LO,
            WaveletFamily::Bior22 => &BIOR22_LO,
        }
    }

    /// Decomposition highpass taps.
    pub fn highpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR_HI,
            WaveletFamily::Db2 => &DB2_HI,
            WaveletFamily::Bior22 => &BIOR22_HI,
        }
    }
}

impl std::fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(WaveletFamily::Haar),
            "db2" => Ok(WaveletFamily::Db2),
            "bior22" | "bior2.2" => Ok(WaveletFamily::Bior22),
            other => Err(Error::Usage(format!(
                "unknown wavelet {other:?}; expected haar, db2, or bior22"
            ))),
        }
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

const HAAR_LO: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
const HAAR_HI: [f64; 2] = [-FRAC_1_SQRT_2, FRAC_1_SQRT_2];

// Published decomposition taps, kept verbatim at full precision.
#[allow(clippy::excessive_precision)]
const DB2_LO: [f64; 4] = [
    -0.12940952255092145,
    0.22414386804185735,
    0.836516303737469,
    0.48296291314469025,
];
#[allow(clippy::excessive_precision)]
const DB2_HI: [f64; 4] = [
    -0.48296291314469025,
    0.836516303737469,
    -0.22414386804185735,
    -0.12940952255092145,
];

// Biorthogonal 2.2 decomposition pair in the published 6/4-tap form.
#[allow(clippy::excessive_precision)]
const BIOR22_LO: [f64; 6] = [
    0.0,
    -0.17677669529663689,
    0.35355339059327379,
    1.0606601717798214,
    0.35355339059327379,
    -0.17677669529663689,
];
#[allow(clippy::excessive_precision, clippy::approx_constant)]
const BIOR22_HI: [f64; 4] = [
    0.0,
    0.35355339059327379,
    -0.70710678118654757,
    0.35355339059327379,
];

/// One packet leaf: the branch path from the root and the equivalent filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketLeaf {
    /// Branch labels from level 1 to level 3, e.g. "LHH".
    pub path: String,
    pub taps: Vec<f64>,
}

/// The seven temporal bandpass filters of one wavelet family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub family: WaveletFamily,
    /// Bandpass leaves ordered from lowest to highest nominal frequency,
    /// zero-padded to a common length.
    pub filters: Vec<PacketLeaf>,
    /// Common (padded) filter length in frames.
    pub filter_length: usize,
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn upsample(taps: &[f64], factor: usize) -> Vec<f64> {
    let mut out = vec![0.0; (taps.len() - 1) * factor + 1];
    for (i, &t) in taps.iter().enumerate() {
        out[i * factor] = t;
    }
    out
}

/// All eight depth-3 packet leaves of a family, ordered from lowest to
/// highest nominal center frequency. Index 0 is the DC (all-lowpass) leaf.
///
/// The frequency-ordered leaf `q` follows branch bits `gray(q) = q ^ (q >> 1)`
/// read most-significant first, with 0 = lowpass and 1 = highpass — the
/// spectral flip introduced by each highpass stage makes plain binary order
/// wrong.
pub fn packet_leaves(family: WaveletFamily) -> Vec<PacketLeaf> {
    let lo = family.lowpass();
    let hi = family.highpass();
    (0..8u32)
        .map(|q| {
            let gray = q ^ (q >> 1);
            let bits = [(gray >> 2) & 1, (gray >> 1) & 1, gray & 1];
            let mut path = String::new();
            let mut taps: Option<Vec<f64>> = None;
            for (level, &bit) in bits.iter().enumerate() {
                let base: &[f64] = if bit == 0 { lo } else { hi };
                path.push(if bit == 0 { 'L' } else { 'H' });
                let staged = upsample(base, 1 << level);
                taps = Some(match taps {
                    None => staged,
                    Some(acc) => convolve(&acc, &staged),
                });
            }
            PacketLeaf { path, taps: taps.unwrap() }
        })
        .collect()
}

/// Builds the seven-filter temporal bandpass bank of a family: all packet
/// leaves except DC, zero-padded to the longest kept leaf.
pub fn build_filter_bank(family: WaveletFamily) -> FilterBank {
    let mut leaves = packet_leaves(family);
    leaves.remove(0); // DC leaf
    let filter_length = leaves.iter().map(|l| l.taps.len()).max().unwrap();
    for leaf in &mut leaves {
        leaf.taps.resize(filter_length, 0.0);
    }
    FilterBank { family, filters: leaves, filter_length }
}

/// Temporal bandpass responses of one window.
///
/// For each subband `k`, the response plane is the per-pixel inner product of
/// the filter taps with the `filter_length` frames starting at `start`: one
/// temporal response per window, not a sliding convolution.
pub fn temporal_subband_window(
    frames: &[Plane],
    bank: &FilterBank,
    start: usize,
) -> Result<Vec<Plane>> {
    let end = start + bank.filter_length;
    if end > frames.len() {
        return Err(Error::OutOfBounds(format!(
            "window [{start}, {end}) exceeds the {}-frame sequence",
            frames.len()
        )));
    }
    let window = &frames[start..end];
    let (h, w) = (window[0].height(), window[0].width());
    if window.iter().any(|f| f.height() != h || f.width() != w) {
        return Err(Error::InvalidInput("frames in a window must share geometry".into()));
    }
    let mut responses = vec![vec![0.0; h * w]; bank.filters.len()];
    for (tau, frame) in window.iter().enumerate() {
        let src = frame.data();
        for (leaf, resp) in bank.filters.iter().zip(responses.iter_mut()) {
            let tap = leaf.taps[tau];
            if tap == 0.0 {
                continue;
            }
            for (r, &s) in resp.iter_mut().zip(src) {
                *r += tap * s;
            }
        }
    }
    Ok(responses.into_iter().map(|d| Plane::from_raw(h, w, d)).collect())
}

/// The 476-dimensional temporal feature vector, ordered
/// `[subband 1..7] x [scale 1, scale 1/2] x 34`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalFeatures {
    values: Vec<f64>,
}

impl TemporalFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Temporal features of a single window: NSS-34 of every subband response at
/// the given scale and at its half scale.
pub fn window_temporal_features(window: &[Plane], bank: &FilterBank) -> Result<Vec<f64>> {
    if let Some(f) = window.first() {
        if f.height() > TEMPORAL_HEIGHT {
            return Err(Error::InvalidInput(format!(
                "temporal frames must be resized to height <= {TEMPORAL_HEIGHT}, got {}",
                f.height()
            )));
        }
    }
    let responses = temporal_subband_window(window, bank, 0)?;
    let mut values = Vec::with_capacity(TEMPORAL_DIM);
    for response in &responses {
        values.extend_from_slice(extract_nss34(response)?.as_slice());
        values.extend_from_slice(extract_nss34(&downscale_half(response)?)?.as_slice());
    }
    debug_assert_eq!(values.len(), TEMPORAL_DIM);
    Ok(values)
}

/// Extracts temporal features over every window of the plan, averaging each
/// coordinate across windows in plan order.
pub fn extract_temporal(
    frames: &[Plane],
    bank: &FilterBank,
    plan: &SamplingPlan,
) -> Result<TemporalFeatures> {
    if plan.temporal_windows.is_empty() {
        return Err(Error::EmptyInput("sampling plan has no temporal windows".into()));
    }
    let mut acc = vec![0.0; TEMPORAL_DIM];
    for window in &plan.temporal_windows {
        if window.length != bank.filter_length {
            return Err(Error::InvalidInput(format!(
                "plan window length {} does not match the {}-tap bank",
                window.length, bank.filter_length
            )));
        }
        let end = window.start + window.length;
        if end > frames.len() {
            return Err(Error::OutOfBounds(format!(
                "window [{}, {end}) exceeds the {}-frame sequence",
                window.start,
                frames.len()
            )));
        }
        let values = window_temporal_features(&frames[window.start..end], bank)?;
        for (a, v) in acc.iter_mut().zip(values) {
            *a += v;
        }
    }
    let n = plan.temporal_windows.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(TemporalFeatures { values: acc })
}
