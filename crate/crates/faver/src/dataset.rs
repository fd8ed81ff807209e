//! Dataset manifests and feature files.
//!
//! A manifest is a CSV with the header
//! `video_path,video_id,content_id,framerate,crf,mos` (crf and mos may be
//! empty). A feature file is a CSV carrying `# key=value` comment lines for
//! the schema hash, wavelet, stride, and tool version, then one row per
//! video: five metadata columns followed by the 272 spatial and 476 temporal
//! feature columns. An optional binary cache (`FAVER_CACHE_DIR`) keyed by the
//! schema hash short-circuits re-extraction.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::regression::FeatureRecord;
use crate::schema::{schema_hash, spatial_feature_names, temporal_feature_names, TOTAL_DIM};
use crate::spatial::SPATIAL_DIM;

pub const MANIFEST_HEADER: [&str; 6] =
    ["video_path", "video_id", "content_id", "framerate", "crf", "mos"];

/// One manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub video_path: PathBuf,
    pub video_id: String,
    pub content_id: String,
    pub framerate: f64,
    pub crf: Option<f64>,
    pub mos: Option<f64>,
}

/// A validated dataset manifest.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
}

fn parse_optional(field: &str, what: &str, row: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| Error::Data(format!("row {row}: {what} {field:?} is not numeric")))
}

impl DatasetManifest {
    /// Loads and validates a manifest. Paths are resolved relative to the
    /// manifest's directory and must exist unless `allow_missing` is set;
    /// duplicate video ids are rejected before any work starts.
    pub fn load(path: &Path, allow_missing: bool) -> Result<Self> {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        {
            let headers = reader
                .headers()
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let got: Vec<&str> = headers.iter().collect();
            if got != MANIFEST_HEADER {
                return Err(Error::Format(format!(
                    "manifest header {:?} does not match {:?}",
                    got, MANIFEST_HEADER
                )));
            }
        }
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Format(format!("manifest row {i}: {e}")))?;
            if record.len() != MANIFEST_HEADER.len() {
                return Err(Error::Format(format!(
                    "manifest row {i} has {} fields, expected {}",
                    record.len(),
                    MANIFEST_HEADER.len()
                )));
            }
            let video_id = record[1].to_string();
            if video_id.is_empty() {
                return Err(Error::Data(format!("manifest row {i}: empty video_id")));
            }
            if !seen.insert(video_id.clone()) {
                return Err(Error::Data(format!("duplicate video_id {video_id:?}")));
            }
            let raw_path = Path::new(&record[0]);
            let video_path =
                if raw_path.is_absolute() { raw_path.to_path_buf() } else { base.join(raw_path) };
            if !allow_missing && !video_path.exists() {
                return Err(Error::Data(format!(
                    "video {video_id:?}: {} does not exist",
                    video_path.display()
                )));
            }
            let framerate = record[3].parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(
                || Error::Data(format!("row {i}: framerate {:?} is not positive", &record[3])),
            )?;
            rows.push(ManifestRow {
                video_path,
                video_id,
                content_id: record[2].to_string(),
                framerate,
                crf: parse_optional(&record[4], "crf", i)?,
                mos: parse_optional(&record[5], "mos", i)?,
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput(format!("manifest {} has no rows", path.display())));
        }
        Ok(DatasetManifest { rows })
    }

    pub fn row(&self, video_id: &str) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.video_id == video_id)
    }

    /// Writes a manifest (used by fixture generators and tests).
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", MANIFEST_HEADER.join(","))?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.video_path.display(),
                r.video_id,
                r.content_id,
                r.framerate,
                r.crf.map(|v| v.to_string()).unwrap_or_default(),
                r.mos.map(|v| v.to_string()).unwrap_or_default()
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Self-description carried at the top of every feature file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFileMeta {
    pub schema_hash: String,
    pub wavelet: String,
    pub stride: String,
    pub tool_version: String,
}

impl FeatureFileMeta {
    pub fn current(wavelet: &str, stride: &str) -> Self {
        FeatureFileMeta {
            schema_hash: schema_hash().to_string(),
            wavelet: wavelet.to_string(),
            stride: stride.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A feature file in memory.
#[derive(Debug, Clone)]
pub struct FeatureFile {
    pub meta: FeatureFileMeta,
    pub records: Vec<FeatureRecord>,
}

impl FeatureFile {
    pub fn new(meta: FeatureFileMeta) -> Self {
        FeatureFile { meta, records: Vec::new() }
    }

    /// Verifies the file was produced by this build's schema.
    pub fn check_schema(&self) -> Result<()> {
        if self.meta.schema_hash != schema_hash() {
            return Err(Error::SchemaMismatch {
                expected: schema_hash().to_string(),
                found: self.meta.schema_hash.clone(),
            });
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# faver-features v1")?;
        writeln!(w, "# schema_hash={}", self.meta.schema_hash)?;
        writeln!(w, "# wavelet={}", self.meta.wavelet)?;
        writeln!(w, "# stride={}", self.meta.stride)?;
        writeln!(w, "# tool_version={}", self.meta.tool_version)?;
        write!(w, "video_id,content_id,framerate,crf,mos")?;
        for name in spatial_feature_names().iter().chain(temporal_feature_names()) {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for r in &self.records {
            r.check_dims()?;
            write!(
                w,
                "{},{},{},{},{}",
                r.video_id,
                r.content_id,
                r.framerate,
                r.crf.map(|v| v.to_string()).unwrap_or_default(),
                r.mos.map(|v| v.to_string()).unwrap_or_default()
            )?;
            for v in r.spatial.iter().chain(&r.temporal) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut reader = BufReader::new(file);
        let mut meta = FeatureFileMeta {
            schema_hash: String::new(),
            wavelet: String::new(),
            stride: String::new(),
            tool_version: String::new(),
        };
        // Comment prologue.
        let mut body = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            if let Some(rest) = line.trim_end().strip_prefix('#') {
                if let Some((key, value)) = rest.trim().split_once('=') {
                    match key {
                        "schema_hash" => meta.schema_hash = value.to_string(),
                        "wavelet" => meta.wavelet = value.to_string(),
                        "stride" => meta.stride = value.to_string(),
                        "tool_version" => meta.tool_version = value.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            body.push_str(&line);
            reader.read_to_string(&mut body)?;
            break;
        }
        if meta.schema_hash.is_empty() {
            return Err(Error::Format(format!(
                "{} carries no schema_hash line",
                path.display()
            )));
        }

        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(body.as_bytes());
        let expected_cols = 5 + TOTAL_DIM;
        {
            let headers = csv_reader
                .headers()
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if headers.len() != expected_cols {
                return Err(Error::Format(format!(
                    "feature file has {} columns, expected {expected_cols}",
                    headers.len()
                )));
            }
        }
        let mut records = Vec::new();
        for (i, row) in csv_reader.records().enumerate() {
            let row = row.map_err(|e| Error::Format(format!("feature row {i}: {e}")))?;
            if row.len() != expected_cols {
                return Err(Error::Format(format!(
                    "feature row {i} has {} columns, expected {expected_cols}",
                    row.len()
                )));
            }
            let parse_f = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {i}: bad {what} {s:?}")))
            };
            let mut values = Vec::with_capacity(TOTAL_DIM);
            for v in row.iter().skip(5) {
                values.push(parse_f(v, "feature")?);
            }
            let temporal = values.split_off(SPATIAL_DIM);
            records.push(FeatureRecord {
                video_id: row[0].to_string(),
                content_id: row[1].to_string(),
                framerate: parse_f(&row[2], "framerate")?,
                crf: if row[3].is_empty() { None } else { Some(parse_f(&row[3], "crf")?) },
                mos: if row[4].is_empty() { None } else { Some(parse_f(&row[4], "mos")?) },
                spatial: values,
                temporal,
            });
        }
        Ok(FeatureFile { meta, records })
    }

    /// Joins MOS and content ids from a manifest onto the records (feature
    /// files produced by older runs may predate manifest edits).
    pub fn join_manifest(&mut self, manifest: &DatasetManifest) -> Result<()> {
        for r in &mut self.records {
            if let Some(row) = manifest.row(&r.video_id) {
                r.content_id = row.content_id.clone();
                r.mos = row.mos;
                r.crf = row.crf;
                r.framerate = row.framerate;
            }
        }
        Ok(())
    }
}

/// Content-addressed binary cache of per-video feature vectors.
pub struct FeatureCache {
    dir: PathBuf,
}

const CACHE_MAGIC: &[u8; 8] = b"FAVERFC1";

impl FeatureCache {
    /// Opens the cache at `FAVER_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("FAVER_CACHE_DIR").map(|dir| FeatureCache { dir: PathBuf::from(dir) })
    }

    pub fn at(dir: &Path) -> Self {
        FeatureCache { dir: dir.to_path_buf() }
    }

    fn key(&self, meta: &FeatureFileMeta, video_id: &str, path: &Path, file_len: u64) -> PathBuf {
        let mut hasher = Sha256::new();
        for part in [
            meta.schema_hash.as_str(),
            meta.wavelet.as_str(),
            meta.stride.as_str(),
            video_id,
            &path.display().to_string(),
            &file_len.to_string(),
        ] {
            hasher.update(part.as_bytes());
            hasher.update([0x1f]);
        }
        let digest = hasher.finalize();
        let hex: String = digest.iter().take(24).map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{hex}.feat"))
    }

    pub fn load(
        &self,
        meta: &FeatureFileMeta,
        video_id: &str,
        path: &Path,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        let file_len = std::fs::metadata(path).ok()?.len();
        let bytes = std::fs::read(self.key(meta, video_id, path, file_len)).ok()?;
        if bytes.len() != CACHE_MAGIC.len() + TOTAL_DIM * 8 || &bytes[..8] != CACHE_MAGIC {
            return None;
        }
        let mut values = Vec::with_capacity(TOTAL_DIM);
        for chunk in bytes[8..].chunks_exact(8) {
            values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        let temporal = values.split_off(SPATIAL_DIM);
        Some((values, temporal))
    }

    pub fn store(
        &self,
        meta: &FeatureFileMeta,
        video_id: &str,
        path: &Path,
        spatial: &[f64],
        temporal: &[f64],
    ) -> Result<()> {
        debug_assert_eq!(spatial.len() + temporal.len(), TOTAL_DIM);
        std::fs::create_dir_all(&self.dir)?;
        let file_len = std::fs::metadata(path)?.len();
        let mut bytes = Vec::with_capacity(CACHE_MAGIC.len() + TOTAL_DIM * 8);
        bytes.extend_from_slice(CACHE_MAGIC);
        for v in spatial.iter().chain(temporal) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(self.key(meta, video_id, path, file_len), bytes)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::TEMPORAL_DIM;
    use tempfile::tempdir;

    fn record(id: &str, content: &str, seedling: f64) -> FeatureRecord {
        FeatureRecord {
            video_id: id.to_string(),
            content_id: content.to_string(),
            framerate: 30.0,
            crf: Some(28.0),
            mos: Some(55.5 + seedling),
            spatial: (0..SPATIAL_DIM).map(|k| seedling + k as f64 * 0.001).collect(),
            temporal: (0..TEMPORAL_DIM).map(|k| seedling - k as f64 * 0.002).collect(),
        }
    }

    #[test]
    fn feature_file_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let mut file = FeatureFile::new(FeatureFileMeta::current("haar", "1s"));
        file.records.push(record("a", "c1", 0.125));
        file.records.push(record("b", "c2", -3.5));
        file.write(&path).unwrap();

        let back = FeatureFile::read(&path).unwrap();
        back.check_schema().unwrap();
        assert_eq!(back.meta.wavelet, "haar");
        assert_eq!(back.records.len(), 2);
        // Shortest-roundtrip float formatting keeps values bit-exact.
        assert_eq!(back.records[0].spatial, file.records[0].spatial);
        assert_eq!(back.records[1].temporal, file.records[1].temporal);
        assert_eq!(back.records[0].mos, Some(55.625));
    }

    #[test]
    fn schema_mismatch_is_detected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let mut meta = FeatureFileMeta::current("haar", "1s");
        meta.schema_hash = "deadbeef".to_string();
        let mut file = FeatureFile::new(meta);
        file.records.push(record("a", "c1", 1.0));
        file.write(&path).unwrap();
        let back = FeatureFile::read(&path).unwrap();
        assert!(matches!(back.check_schema(), Err(Error::SchemaMismatch { .. })));
    }

    #[test]
    fn manifest_rejects_duplicate_ids() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(
            &path,
            "video_path,video_id,content_id,framerate,crf,mos\n\
             a.y4m,v1,c1,30,,72\n\
             b.y4m,v1,c2,30,,50\n",
        )
        .unwrap();
        match DatasetManifest::load(&path, true) {
            Err(Error::Data(msg)) => assert!(msg.contains("duplicate")),
            other => panic!("expected duplicate-id error, got {other:?}"),
        }
    }

    #[test]
    fn manifest_rejects_bad_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(&path, "path,id\na.y4m,v1\n").unwrap();
        assert!(matches!(DatasetManifest::load(&path, true), Err(Error::Format(_))));
    }

    #[test]
    fn cache_round_trips_features() {
        let dir = tempdir().unwrap();
        let video = dir.path().join("v.yuv");
        std::fs::write(&video, vec![0u8; 64]).unwrap();
        let cache = FeatureCache::at(&dir.path().join("cache"));
        let meta = FeatureFileMeta::current("db2", "16");
        let spatial: Vec<f64> = (0..SPATIAL_DIM).map(|k| k as f64 * 0.5).collect();
        let temporal: Vec<f64> = (0..TEMPORAL_DIM).map(|k| -(k as f64)).collect();
        assert!(cache.load(&meta, "v", &video).is_none());
        cache.store(&meta, "v", &video, &spatial, &temporal).unwrap();
        let (s, t) = cache.load(&meta, "v", &video).unwrap();
        assert_eq!(s, spatial);
        assert_eq!(t, temporal);
        // A different stride misses.
        let other = FeatureFileMeta::current("db2", "8");
        assert!(cache.load(&other, "v", &video).is_none());
    }
}
