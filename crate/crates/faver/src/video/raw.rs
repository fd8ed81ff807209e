//! Headerless raw planar YUV files; geometry is supplied by the caller.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::video::{FrameLayout, Framerate, PixelFormat, PlanarFrame, VideoSource};

/// Opens a raw YUV file. The file size must be an exact multiple of the
/// per-frame byte count implied by the geometry; the frame count follows.
pub fn open_raw_yuv(
    path: &Path,
    width: usize,
    height: usize,
    framerate: Framerate,
    pixel_format: PixelFormat,
) -> Result<VideoSource> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("raw geometry must be nonzero".into()));
    }
    let file = File::open(path)?;
    let size = file.metadata()?.len();
    let frame_bytes = pixel_format.frame_bytes(width, height) as u64;
    if size == 0 || size % frame_bytes != 0 {
        return Err(Error::Format(format!(
            "file size {size} is not a multiple of the {frame_bytes}-byte frame implied by {width}x{height} {}",
            pixel_format.tag()
        )));
    }
    let source = VideoSource {
        path: path.to_path_buf(),
        width,
        height,
        framerate,
        num_frames: (size / frame_bytes) as usize,
        pixel_format,
        colorspace: format!("I{}", pixel_format.tag()),
        layout: FrameLayout::Raw { frame_bytes },
        file: Mutex::new(file),
    };
    source.check_invariants()?;
    Ok(source)
}

/// Writes frames as packed planar bytes with no container. Samples are
/// rounded and clamped to 8 bit, so frames holding integral 0–255 samples
/// round-trip bit-exactly.
pub fn write_raw_yuv(path: &Path, frames: &mut dyn Iterator<Item = PlanarFrame>) -> Result<usize> {
    let mut writer = BufWriter::new(File::create(path)?);
    let mut written = 0usize;
    let mut geometry = None;
    for frame in frames {
        let geom = (frame.width(), frame.height(), frame.format);
        match geometry {
            None => geometry = Some(geom),
            Some(g) if g != geom => {
                return Err(Error::InvalidInput("frames change geometry mid-stream".into()))
            }
            _ => {}
        }
        writer.write_all(&frame.to_bytes())?;
        written += 1;
    }
    if written == 0 {
        return Err(Error::EmptyInput("no frames to write".into()));
    }
    writer.flush()?;
    Ok(written)
}
