//! End-to-end drivers: per-video feature extraction, manifest-wide extraction
//! with resume/cache support, and the throughput benchmark.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetManifest, FeatureCache, FeatureFile, FeatureFileMeta, ManifestRow};
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::regression::FeatureRecord;
use crate::spatial::{frame_spatial_features, SPATIAL_DIM};
use crate::temporal::{
    build_filter_bank, window_temporal_features, FilterBank, WaveletFamily, TEMPORAL_DIM,
    TEMPORAL_HEIGHT,
};
use crate::video::{
    build_sampling_plan, open_video, resize_to_height, Framerate, PixelFormat, SamplingMode,
    VideoSource,
};

/// Geometry for raw (headerless) video inputs.
#[derive(Debug, Clone, Copy)]
pub struct RawGeometry {
    pub width: usize,
    pub height: usize,
    pub framerate: Framerate,
    pub pixel_format: PixelFormat,
}

/// Extraction configuration shared by all drivers.
#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub wavelet: WaveletFamily,
    pub stride: SamplingMode,
    pub raw_geometry: Option<RawGeometry>,
    pub allow_missing: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            wavelet: WaveletFamily::Haar,
            stride: SamplingMode::PerSecond,
            raw_geometry: None,
            allow_missing: false,
        }
    }
}

/// Smallest usable luma geometry: every processed map (including quarter-size
/// chroma halves for 4:2:0) must reach the extractor's 16x16 minimum.
fn check_extractable(source: &VideoSource) -> Result<()> {
    let min_side = match source.pixel_format {
        PixelFormat::Yuv420 => 64,
        PixelFormat::Yuv444 => 32,
    };
    if source.width < min_side || source.height < min_side {
        return Err(Error::Data(format!(
            "{}: {}x{} {} video is too small for feature extraction (needs >= {min_side} per side)",
            source.path.display(),
            source.width,
            source.height,
            source.pixel_format.tag()
        )));
    }
    Ok(())
}

/// Extracts the 272-dimensional spatial and 476-dimensional temporal feature
/// vectors of one open video.
pub fn extract_video_features(
    source: &VideoSource,
    wavelet: WaveletFamily,
    stride: SamplingMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_extractable(source)?;
    let bank = build_filter_bank(wavelet);
    let plan =
        build_sampling_plan(source.num_frames, source.framerate.as_f64(), stride, bank.filter_length)?;

    // Spatial: per-frame blocks, mean in index order.
    let spatial_blocks: Vec<Result<Vec<f64>>> = plan
        .spatial_frame_indices
        .par_iter()
        .map(|&idx| frame_spatial_features(&source.read_frame(idx)?))
        .collect();
    let mut spatial = vec![0.0; SPATIAL_DIM];
    for block in &spatial_blocks {
        let block = block.as_ref().map_err(clone_error)?;
        for (a, v) in spatial.iter_mut().zip(block) {
            *a += v;
        }
    }
    let n_frames = spatial_blocks.len() as f64;
    for a in &mut spatial {
        *a /= n_frames;
    }

    // Temporal: windows are independent work units; frames are read, reduced
    // to <= 512 rows, filtered, and dropped one window at a time.
    let window_blocks: Vec<Result<Vec<f64>>> = plan
        .temporal_windows
        .par_iter()
        .map(|window| {
            let mut frames: Vec<Plane> = Vec::with_capacity(window.length);
            for idx in window.start..window.start + window.length {
                let frame = source.read_frame(idx)?;
                frames.push(resize_to_height(&frame.y, TEMPORAL_HEIGHT)?);
            }
            window_temporal_features(&frames, &bank)
        })
        .collect();
    let mut temporal = vec![0.0; TEMPORAL_DIM];
    for block in &window_blocks {
        let block = block.as_ref().map_err(clone_error)?;
        for (a, v) in temporal.iter_mut().zip(block) {
            *a += v;
        }
    }
    let n_windows = window_blocks.len() as f64;
    for a in &mut temporal {
        *a /= n_windows;
    }

    Ok((spatial, temporal))
}

// Error is not Clone (io::Error); reduce collected per-worker results by
// re-wrapping the message.
fn clone_error(e: &Error) -> Error {
    Error::Data(e.to_string())
}

fn extract_row(row: &ManifestRow, opts: &ExtractOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let raw = opts.raw_geometry.map(|g| (g.width, g.height, g.framerate, g.pixel_format));
    let source = open_video(&row.video_path, raw)?;
    extract_video_features(&source, opts.wavelet, opts.stride)
}

/// Spatial vector, temporal vector, and whether they came from the cache.
type RowFeatures = (Vec<f64>, Vec<f64>, bool);

/// Outcome of a manifest-wide extraction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub computed: usize,
    pub reused: usize,
    pub cached: usize,
    pub failed: Vec<(String, String)>,
}

/// Extracts features for every manifest row into `out_path`.
///
/// Rows already present in the output with a matching schema hash are kept
/// untouched (the file is not rewritten when nothing new was computed), the
/// binary cache is consulted when configured, and per-video failures are
/// recorded in a `<out>.errors.log` sidecar instead of aborting the run.
pub fn extract_manifest(
    manifest: &DatasetManifest,
    opts: &ExtractOptions,
    out_path: &Path,
) -> Result<ExtractSummary> {
    let meta = FeatureFileMeta::current(opts.wavelet.tag(), &opts.stride.tag());
    let mut file = if out_path.exists() {
        let existing = FeatureFile::read(out_path)?;
        existing.check_schema()?;
        if existing.meta.wavelet != meta.wavelet || existing.meta.stride != meta.stride {
            return Err(Error::Data(format!(
                "{} holds {}/{} features; requested {}/{} (remove the file to re-extract)",
                out_path.display(),
                existing.meta.wavelet,
                existing.meta.stride,
                meta.wavelet,
                meta.stride
            )));
        }
        existing
    } else {
        FeatureFile::new(meta.clone())
    };

    let done: Vec<String> = file.records.iter().map(|r| r.video_id.clone()).collect();
    let pending: Vec<&ManifestRow> =
        manifest.rows.iter().filter(|r| !done.contains(&r.video_id)).collect();
    let reused = manifest.rows.len() - pending.len();

    let cache = FeatureCache::from_env();
    let results: Vec<(String, Result<RowFeatures>)> = pending
        .par_iter()
        .map(|row| {
            if let Some(cache) = &cache {
                if let Some((s, t)) = cache.load(&meta, &row.video_id, &row.video_path) {
                    return (row.video_id.clone(), Ok((s, t, true)));
                }
            }
            let out = extract_row(row, opts).map(|(s, t)| {
                if let Some(cache) = &cache {
                    // A failed cache write must not fail the extraction.
                    let _ = cache.store(&meta, &row.video_id, &row.video_path, &s, &t);
                }
                (s, t, false)
            });
            (row.video_id.clone(), out)
        })
        .collect();

    let mut summary =
        ExtractSummary { computed: 0, reused, cached: 0, failed: Vec::new() };
    for (video_id, result) in results {
        match result {
            Ok((spatial, temporal, from_cache)) => {
                let row = manifest.row(&video_id).unwrap();
                file.records.push(FeatureRecord {
                    video_id,
                    content_id: row.content_id.clone(),
                    framerate: row.framerate,
                    crf: row.crf,
                    mos: row.mos,
                    spatial,
                    temporal,
                });
                if from_cache {
                    summary.cached += 1;
                } else {
                    summary.computed += 1;
                }
            }
            Err(e) => summary.failed.push((video_id, e.to_string())),
        }
    }

    if summary.computed + summary.cached > 0 {
        file.write(out_path)?;
    }
    if !summary.failed.is_empty() {
        let log_path = sidecar_log_path(out_path);
        let mut log = std::fs::OpenOptions::new().create(true).append(true).open(&log_path)?;
        for (id, msg) in &summary.failed {
            writeln!(log, "{id}\t{msg}")?;
        }
        if summary.failed.len() == manifest.rows.len() {
            return Err(Error::Data(format!(
                "all {} videos failed; see {}",
                manifest.rows.len(),
                log_path.display()
            )));
        }
    }
    Ok(summary)
}

pub fn sidecar_log_path(out_path: &Path) -> PathBuf {
    let mut name = out_path.file_name().unwrap_or_default().to_os_string();
    name.push(".errors.log");
    out_path.with_file_name(name)
}

/// Timing of one benchmarked video.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoTiming {
    pub video_id: String,
    pub width: usize,
    pub height: usize,
    /// Framerate rounded to its class (30/60/120...).
    pub fps_class: u32,
    pub mean_seconds: f64,
    pub min_seconds: f64,
}

/// Mean extraction cost per framerate class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSummary {
    pub fps_class: u32,
    pub videos: usize,
    pub mean_seconds: f64,
}

/// Wall-clock feature-extraction benchmark output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub machine: String,
    pub wavelet: String,
    pub repeats: usize,
    pub videos: Vec<VideoTiming>,
    pub classes: Vec<ClassSummary>,
    /// Extraction-cost ratio of the 120 fps class to the 30 fps class, when
    /// both are present. Near-constant cost across framerates shows up as a
    /// ratio close to 1.
    pub ratio_120_to_30: Option<f64>,
}

/// Times end-to-end feature extraction per manifest row, `repeats` times
/// each, and aggregates mean cost per framerate class. Videos run strictly
/// sequentially so timings do not contend.
pub fn benchmark_manifest(
    manifest: &DatasetManifest,
    opts: &ExtractOptions,
    repeats: usize,
) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    let mut videos = Vec::new();
    for row in &manifest.rows {
        let mut runs = Vec::with_capacity(repeats);
        let raw = opts.raw_geometry.map(|g| (g.width, g.height, g.framerate, g.pixel_format));
        let source = open_video(&row.video_path, raw)?;
        for _ in 0..repeats {
            let start = Instant::now();
            extract_video_features(&source, opts.wavelet, opts.stride)?;
            runs.push(start.elapsed().as_secs_f64());
        }
        videos.push(VideoTiming {
            video_id: row.video_id.clone(),
            width: source.width,
            height: source.height,
            fps_class: row.framerate.round() as u32,
            mean_seconds: runs.iter().sum::<f64>() / runs.len() as f64,
            min_seconds: runs.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }

    let mut classes: Vec<ClassSummary> = Vec::new();
    for timing in &videos {
        match classes.iter_mut().find(|c| c.fps_class == timing.fps_class) {
            Some(c) => {
                c.mean_seconds += timing.mean_seconds;
                c.videos += 1;
            }
            None => classes.push(ClassSummary {
                fps_class: timing.fps_class,
                videos: 1,
                mean_seconds: timing.mean_seconds,
            }),
        }
    }
    for c in &mut classes {
        c.mean_seconds /= c.videos as f64;
    }
    classes.sort_by_key(|c| c.fps_class);

    let class_mean = |fps: u32| classes.iter().find(|c| c.fps_class == fps).map(|c| c.mean_seconds);
    let ratio_120_to_30 = match (class_mean(120), class_mean(30)) {
        (Some(fast), Some(slow)) if slow > 0.0 => Some(fast / slow),
        _ => None,
    };

    Ok(BenchReport {
        machine: format!(
            "{}-{} ({} threads)",
            std::env::consts::OS,
            std::env::consts::ARCH,
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        ),
        wavelet: opts.wavelet.tag().to_string(),
        repeats,
        videos,
        classes,
        ratio_120_to_30,
    })
}

/// Convenience wrapper: extract one video file into a [`FeatureRecord`].
pub fn extract_single_video(
    path: &Path,
    video_id: &str,
    wavelet: WaveletFamily,
    stride: SamplingMode,
    raw_geometry: Option<RawGeometry>,
) -> Result<FeatureRecord> {
    let raw = raw_geometry.map(|g| (g.width, g.height, g.framerate, g.pixel_format));
    let source = open_video(path, raw)?;
    let (spatial, temporal) = extract_video_features(&source, wavelet, stride)?;
    Ok(FeatureRecord {
        video_id: video_id.to_string(),
        content_id: video_id.to_string(),
        framerate: source.framerate.as_f64(),
        crf: None,
        mos: None,
        spatial,
        temporal,
    })
}

/// Returns the filter bank of every family, for the `filters` inspection
/// command.
pub fn all_filter_banks() -> Vec<FilterBank> {
    WaveletFamily::ALL.iter().map(|&f| build_filter_bank(f)).collect()
}
