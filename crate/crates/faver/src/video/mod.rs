//! Video sources, decoded frames, and temporal sampling plans.
//!
//! Two on-disk layouts are supported: YUV4MPEG2 ("Y4M") containers and raw
//! planar YUV (I420/I444, 8 bit). Compressed bitstreams are out of scope;
//! transcode to Y4M first.

mod raw;
mod scale;
mod y4m;

pub use raw::{open_raw_yuv, write_raw_yuv};
pub use scale::{downscale_half, resize_to_height};
pub use y4m::{open_y4m, write_y4m};

use std::fmt;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Chroma layout of a decoded video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PixelFormat {
    /// 4:2:0 — chroma planes at half resolution in both directions.
    Yuv420,
    /// 4:4:4 — chroma planes at full resolution.
    Yuv444,
}

impl PixelFormat {
    /// Chroma plane dimensions for a given luma geometry.
    pub fn chroma_dims(self, width: usize, height: usize) -> (usize, usize) {
        match self {
            PixelFormat::Yuv420 => (width.div_ceil(2), height.div_ceil(2)),
            PixelFormat::Yuv444 => (width, height),
        }
    }

    /// Bytes per frame for 8-bit samples.
    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        let (cw, ch) = self.chroma_dims(width, height);
        width * height + 2 * cw * ch
    }

    pub fn tag(self) -> &'static str {
        match self {
            PixelFormat::Yuv420 => "420",
            PixelFormat::Yuv444 => "444",
        }
    }
}

impl std::str::FromStr for PixelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "420" | "i420" | "I420" | "yuv420p" => Ok(PixelFormat::Yuv420),
            "444" | "i444" | "I444" | "yuv444p" => Ok(PixelFormat::Yuv444),
            other => Err(Error::Unsupported(format!("pixel format {other:?}"))),
        }
    }
}

/// Frame rate as an exact rational, e.g. 30000:1001.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Framerate {
    pub num: u32,
    pub den: u32,
}

impl Framerate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Format(format!("invalid framerate {num}:{den}")));
        }
        Ok(Framerate { num, den })
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for Framerate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// One decoded frame: separate Y, U, V planes in floating point, nominal
/// range 0–255 (no level shift is applied on decode).
#[derive(Debug, Clone)]
pub struct PlanarFrame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
    pub format: PixelFormat,
}

impl PlanarFrame {
    /// Luma width in pixels.
    pub fn width(&self) -> usize {
        self.y.width()
    }

    /// Luma height in pixels.
    pub fn height(&self) -> usize {
        self.y.height()
    }

    /// Validates plane geometry against the pixel format and sample finiteness.
    pub fn validate(&self) -> Result<()> {
        let (cw, ch) = self.format.chroma_dims(self.width(), self.height());
        if self.u.width() != cw || self.u.height() != ch || self.v.width() != cw || self.v.height() != ch
        {
            return Err(Error::InvalidInput(format!(
                "chroma planes {}x{} do not match {}x{} {} luma",
                self.u.height(),
                self.u.width(),
                self.height(),
                self.width(),
                self.format.tag()
            )));
        }
        if !(self.y.all_finite() && self.u.all_finite() && self.v.all_finite()) {
            return Err(Error::Numeric("non-finite sample in frame".into()));
        }
        Ok(())
    }

    /// Builds a frame from one packed 8-bit planar payload (Y then U then V).
    pub fn from_bytes(width: usize, height: usize, format: PixelFormat, bytes: &[u8]) -> Result<Self> {
        let expected = format.frame_bytes(width, height);
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "frame payload is {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let (cw, ch) = format.chroma_dims(width, height);
        let ylen = width * height;
        let clen = cw * ch;
        let to_plane = |h: usize, w: usize, b: &[u8]| {
            Plane::from_raw(h, w, b.iter().map(|&v| f64::from(v)).collect())
        };
        Ok(PlanarFrame {
            y: to_plane(height, width, &bytes[..ylen]),
            u: to_plane(ch, cw, &bytes[ylen..ylen + clen]),
            v: to_plane(ch, cw, &bytes[ylen + clen..ylen + 2 * clen]),
            format,
        })
    }

    /// Packs the frame back into 8-bit planar bytes, rounding and clamping.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.format.frame_bytes(self.width(), self.height()));
        for plane in [&self.y, &self.u, &self.v] {
            out.extend(plane.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
        }
        out
    }
}

pub(crate) enum FrameLayout {
    /// Headerless raw file: frame `i` starts at `i * frame_bytes`.
    Raw { frame_bytes: u64 },
    /// Y4M: payload offsets recorded while scanning the container.
    Y4m { offsets: Vec<u64> },
}

/// An open video file with lazily readable frames.
///
/// Reads for distinct indices may be issued from multiple threads; the file
/// handle is internally serialized.
pub struct VideoSource {
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub framerate: Framerate,
    pub num_frames: usize,
    pub pixel_format: PixelFormat,
    /// Raw colorspace token from the container header ("C420", "C444", ...).
    pub colorspace: String,
    pub(crate) layout: FrameLayout,
    pub(crate) file: Mutex<File>,
}

impl fmt::Debug for VideoSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VideoSource")
            .field("path", &self.path)
            .field("width", &self.width)
            .field("height", &self.height)
            .field("framerate", &self.framerate)
            .field("num_frames", &self.num_frames)
            .field("pixel_format", &self.pixel_format)
            .finish()
    }
}

impl VideoSource {
    pub(crate) fn check_invariants(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::Unsupported(format!(
                "video {}x{} is smaller than 16x16",
                self.width, self.height
            )));
        }
        if self.num_frames == 0 {
            return Err(Error::Format("video contains no frames".into()));
        }
        Ok(())
    }

    pub fn duration_seconds(&self) -> f64 {
        self.num_frames as f64 / self.framerate.as_f64()
    }

    /// Reads and decodes the frame at `index` (0-based).
    pub fn read_frame(&self, index: usize) -> Result<PlanarFrame> {
        if index >= self.num_frames {
            return Err(Error::OutOfBounds(format!(
                "frame {index} of {} ({})",
                self.num_frames,
                self.path.display()
            )));
        }
        let offset = match &self.layout {
            FrameLayout::Raw { frame_bytes } => index as u64 * frame_bytes,
            FrameLayout::Y4m { offsets } => offsets[index],
        };
        let nbytes = self.pixel_format.frame_bytes(self.width, self.height);
        let mut buf = vec![0u8; nbytes];
        {
            let mut file = self.file.lock().expect("video file lock poisoned");
            file.seek(SeekFrom::Start(offset))?;
            file.read_exact(&mut buf)?;
        }
        PlanarFrame::from_bytes(self.width, self.height, self.pixel_format, &buf)
    }
}

/// How frames are selected along the timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// One sample position per second of video.
    PerSecond,
    /// A sample position every `n` frames.
    StrideFrames(usize),
}

impl SamplingMode {
    pub fn tag(&self) -> String {
        match self {
            SamplingMode::PerSecond => "1s".to_string(),
            SamplingMode::StrideFrames(n) => n.to_string(),
        }
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "1s" {
            return Ok(SamplingMode::PerSecond);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(SamplingMode::StrideFrames(n)),
            _ => Err(Error::Usage(format!(
                "stride must be \"1s\" or a positive frame count, got {s:?}"
            ))),
        }
    }
}

/// A temporal filtering window: `length` consecutive frames from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalWindow {
    pub start: usize,
    pub length: usize,
}

/// Frame positions for spatial features and window positions for temporal ones.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub mode: SamplingMode,
    pub spatial_frame_indices: Vec<usize>,
    pub temporal_windows: Vec<TemporalWindow>,
}

/// Builds the sampling plan for a video of `num_frames` frames at `framerate`
/// fps, with temporal windows of `filter_length` frames.
///
/// In per-second mode both spatial samples and window starts sit at
/// `floor(k * framerate)`; in stride mode they sit every `n` frames. Windows
/// that would extend past the last frame are dropped; a plan with no usable
/// window is an error.
pub fn build_sampling_plan(
    num_frames: usize,
    framerate: f64,
    mode: SamplingMode,
    filter_length: usize,
) -> Result<SamplingPlan> {
    if filter_length == 0 {
        return Err(Error::InvalidInput("filter_length must be nonzero".into()));
    }
    if filter_length > num_frames {
        return Err(Error::EmptyPlan(format!(
            "filter window of {filter_length} frames does not fit in {num_frames}-frame video"
        )));
    }
    let starts: Vec<usize> = match mode {
        SamplingMode::PerSecond => {
            if !(framerate.is_finite() && framerate > 0.0) {
                return Err(Error::InvalidInput(format!("framerate {framerate} must be positive")));
            }
            let mut v = Vec::new();
            let mut k = 0u64;
            loop {
                let idx = (k as f64 * framerate).floor() as usize;
                if idx >= num_frames {
                    break;
                }
                // Guards against sub-1fps rates where floor() repeats an index.
                if v.last() != Some(&idx) {
                    v.push(idx);
                }
                k += 1;
            }
            v
        }
        SamplingMode::StrideFrames(n) => {
            if n == 0 {
                return Err(Error::InvalidInput("stride must be nonzero".into()));
            }
            (0..num_frames).step_by(n).collect()
        }
    };
    let temporal_windows: Vec<TemporalWindow> = starts
        .iter()
        .filter(|&&s| s + filter_length <= num_frames)
        .map(|&s| TemporalWindow { start: s, length: filter_length })
        .collect();
    if temporal_windows.is_empty() {
        return Err(Error::EmptyPlan(format!(
            "no temporal window of {filter_length} frames fits at any sample position"
        )));
    }
    Ok(SamplingPlan { mode, spatial_frame_indices: starts, temporal_windows })
}

/// Opens a video by file extension: `.y4m` as a Y4M container, anything else
/// as raw planar YUV using the supplied geometry.
pub fn open_video(
    path: &Path,
    raw_geometry: Option<(usize, usize, Framerate, PixelFormat)>,
) -> Result<VideoSource> {
    let is_y4m = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("y4m"))
        .unwrap_or(false);
    if is_y4m {
        open_y4m(path)
    } else if let Some((w, h, fps, fmt)) = raw_geometry {
        open_raw_yuv(path, w, h, fps, fmt)
    } else {
        Err(Error::Usage(format!(
            "{} is not a .y4m file; raw YUV input needs --width/--height/--fps/--pix-fmt",
            path.display()
        )))
    }
}
