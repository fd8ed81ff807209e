//! YUV4MPEG2 container parsing and writing (8-bit 4:2:0 / 4:4:4 only).

use std::fs::File;
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::video::{FrameLayout, Framerate, PixelFormat, PlanarFrame, VideoSource};

const STREAM_MAGIC: &str = "YUV4MPEG2";

/// Opens a Y4M file, parses the stream header, and indexes every frame so
/// frames can later be read lazily and out of order.
pub fn open_y4m(path: &Path) -> Result<VideoSource> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);

    let mut header = String::new();
    reader.read_line(&mut header)?;
    if !header.ends_with('\n') {
        return Err(Error::Format("missing newline after stream header".into()));
    }
    let header = header.trim_end();
    let (width, height, framerate, pixel_format, colorspace) = parse_stream_header(header)?;

    let frame_bytes = pixel_format.frame_bytes(width, height) as u64;
    let mut offsets = Vec::new();
    loop {
        let pos = reader.stream_position()?;
        let mut line = String::new();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        if !line.ends_with('\n') {
            return Err(Error::Format("truncated FRAME header".into()));
        }
        let line_trim = line.trim_end();
        if line_trim != "FRAME" && !line_trim.starts_with("FRAME ") {
            return Err(Error::Format(format!("expected FRAME marker at byte {pos}")));
        }
        let payload = reader.stream_position()?;
        let after = payload + frame_bytes;
        let end = reader.seek(SeekFrom::End(0))?;
        if after > end {
            return Err(Error::Format(format!(
                "truncated frame payload at byte {payload}: need {frame_bytes} bytes, file ends at {end}"
            )));
        }
        reader.seek(SeekFrom::Start(after))?;
        offsets.push(payload);
    }
    if offsets.is_empty() {
        return Err(Error::Format("container holds no frames".into()));
    }

    let source = VideoSource {
        path: path.to_path_buf(),
        width,
        height,
        framerate,
        num_frames: offsets.len(),
        pixel_format,
        colorspace,
        layout: FrameLayout::Y4m { offsets },
        file: Mutex::new(reader.into_inner()),
    };
    source.check_invariants()?;
    Ok(source)
}

fn parse_stream_header(header: &str) -> Result<(usize, usize, Framerate, PixelFormat, String)> {
    let mut tokens = header.split(' ');
    if tokens.next() != Some(STREAM_MAGIC) {
        return Err(Error::Format("not a YUV4MPEG2 stream".into()));
    }
    let mut width = None;
    let mut height = None;
    let mut framerate = None;
    let mut colorspace = "C420".to_string(); // Y4M default when C is absent
    for token in tokens {
        if token.is_empty() {
            continue;
        }
        let (key, value) = token.split_at(1);
        match key {
            "W" => width = Some(parse_dim(value, "width")?),
            "H" => height = Some(parse_dim(value, "height")?),
            "F" => framerate = Some(parse_framerate(value)?),
            "C" => colorspace = token.to_string(),
            // Interlacing, aspect ratio, and X comments do not affect decoding.
            "I" | "A" | "X" => {}
            other => return Err(Error::Format(format!("unknown header field {other:?}"))),
        }
    }
    let width = width.ok_or_else(|| Error::Format("header missing W field".into()))?;
    let height = height.ok_or_else(|| Error::Format("header missing H field".into()))?;
    let framerate = framerate.ok_or_else(|| Error::Format("header missing F field".into()))?;
    let pixel_format = classify_colorspace(&colorspace)?;
    Ok((width, height, framerate, pixel_format, colorspace))
}

fn parse_dim(value: &str, what: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .ok()
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::Format(format!("invalid {what} {value:?}")))
}

fn parse_framerate(value: &str) -> Result<Framerate> {
    let (num, den) = value
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("invalid framerate {value:?}")))?;
    let num = num
        .parse::<u32>()
        .map_err(|_| Error::Format(format!("invalid framerate {value:?}")))?;
    let den = den
        .parse::<u32>()
        .map_err(|_| Error::Format(format!("invalid framerate {value:?}")))?;
    Framerate::new(num, den)
}

fn classify_colorspace(token: &str) -> Result<PixelFormat> {
    match token {
        // All 8-bit 4:2:0 chroma sitings share one plane layout.
        "C420" | "C420jpeg" | "C420mpeg2" | "C420paldv" => Ok(PixelFormat::Yuv420),
        "C444" => Ok(PixelFormat::Yuv444),
        other => Err(Error::Unsupported(format!(
            "colorspace {other:?}; only 8-bit C420*/C444 streams are supported"
        ))),
    }
}

/// Writes frames out as a Y4M stream. Samples are rounded and clamped to 8 bit.
pub fn write_y4m(
    path: &Path,
    framerate: Framerate,
    frames: &mut dyn Iterator<Item = PlanarFrame>,
) -> Result<usize> {
    let mut out: Option<std::io::BufWriter<File>> = None;
    let mut geometry: Option<(usize, usize, PixelFormat)> = None;
    let mut written = 0usize;
    for frame in frames {
        let w = match (&mut out, geometry) {
            (Some(w), Some(geom)) => {
                if geom != (frame.width(), frame.height(), frame.format) {
                    return Err(Error::InvalidInput("frames change geometry mid-stream".into()));
                }
                w
            }
            _ => {
                let mut writer = std::io::BufWriter::new(File::create(path)?);
                writeln!(
                    writer,
                    "{STREAM_MAGIC} W{} H{} F{} Ip A1:1 C{}",
                    frame.width(),
                    frame.height(),
                    framerate,
                    frame.format.tag()
                )?;
                geometry = Some((frame.width(), frame.height(), frame.format));
                out = Some(writer);
                out.as_mut().unwrap()
            }
        };
        writeln!(w, "FRAME")?;
        w.write_all(&frame.to_bytes())?;
        written += 1;
    }
    match out {
        Some(mut w) => {
            w.flush()?;
            Ok(written)
        }
        None => Err(Error::EmptyInput("no frames to write".into())),
    }
}
