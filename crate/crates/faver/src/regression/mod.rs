//! The learned back end: two kernel regressors, one on spatial features and
//! one on temporal features, averaged at prediction time.

mod search;
mod svr;

pub use search::{random_search, KernelKind, SearchOutcome};
pub use svr::{train_svr, Kernel, SvrHyperparams, SvrModel, KKT_TOL, MAX_ITER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{schema_hash, FeatureMask};
use crate::spatial::SPATIAL_DIM;
use crate::temporal::TEMPORAL_DIM;

/// Per-video features plus the metadata the protocol needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub video_id: String,
    pub content_id: String,
    pub framerate: f64,
    pub crf: Option<f64>,
    /// Subjective score; required for training records.
    pub mos: Option<f64>,
    pub spatial: Vec<f64>,
    pub temporal: Vec<f64>,
}

impl FeatureRecord {
    pub fn check_dims(&self) -> Result<()> {
        if self.spatial.len() != SPATIAL_DIM || self.temporal.len() != TEMPORAL_DIM {
            return Err(Error::Data(format!(
                "video {:?} has {}+{} features, expected {SPATIAL_DIM}+{TEMPORAL_DIM}",
                self.video_id,
                self.spatial.len(),
                self.temporal.len()
            )));
        }
        for (dim, v) in self.spatial.iter().chain(&self.temporal).enumerate() {
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "video {:?} has a non-finite feature at dimension {dim}",
                    self.video_id
                )));
            }
        }
        Ok(())
    }
}

/// Branch kernels switch to linear above this feature count.
pub const LINEAR_KERNEL_THRESHOLD: usize = 1000;

/// Training controls for the ensemble.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub seed: u64,
    /// Randomized-search budget per branch.
    pub budget: usize,
    /// Forces a kernel family instead of the dimensionality rule.
    pub kernel_override: Option<KernelKind>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { seed: 0, budget: 30, kernel_override: None }
    }
}

/// The serialized model document: versioned, self-describing, and pinned to a
/// feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub format: String,
    pub version: u32,
    pub schema_hash: String,
    pub wavelet: String,
    pub stride: String,
    pub mask: FeatureMask,
    pub spatial: Option<SvrModel>,
    pub temporal: Option<SvrModel>,
    /// Internal cross-validated SROCC of the winning search draw, per branch.
    pub spatial_cv_srocc: Option<f64>,
    pub temporal_cv_srocc: Option<f64>,
}

fn pick_kind(dims: usize, cfg: &TrainConfig) -> KernelKind {
    match cfg.kernel_override {
        Some(kind) => kind,
        // Models with more than a thousand features fall back to a linear
        // kernel; never triggered at 272/476 but kept live and tested.
        None if dims > LINEAR_KERNEL_THRESHOLD => KernelKind::Linear,
        None => KernelKind::Rbf,
    }
}

fn train_branch(
    records: &[&FeatureRecord],
    select: impl Fn(&FeatureRecord) -> &[f64],
    indices: &[usize],
    label: &str,
    cfg: &TrainConfig,
) -> Result<Option<(SvrModel, f64)>> {
    if indices.is_empty() {
        return Ok(None);
    }
    let x: Vec<Vec<f64>> = records
        .iter()
        .map(|r| indices.iter().map(|&i| select(r)[i]).collect())
        .collect();
    let y: Vec<f64> = records.iter().map(|r| r.mos.unwrap()).collect();
    let groups: Vec<String> = records.iter().map(|r| r.content_id.clone()).collect();
    let kind = pick_kind(indices.len(), cfg);
    let seed = cfg.seed ^ ((label.len() as u64) << 32) ^ label.bytes().map(u64::from).sum::<u64>();
    let outcome = random_search(&x, &y, &groups, kind, cfg.budget, seed)?;
    Ok(Some((train_svr(&x, &y, &outcome.params)?, outcome.cv_srocc)))
}

/// Trains the two-branch ensemble on records restricted to `mask`.
pub fn train_ensemble(
    records: &[FeatureRecord],
    mask: &FeatureMask,
    cfg: &TrainConfig,
    wavelet: &str,
    stride: &str,
) -> Result<EnsembleModel> {
    if records.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "{} training records; at least 8 are required",
            records.len()
        )));
    }
    for r in records {
        r.check_dims()?;
        if r.mos.is_none() {
            return Err(Error::Data(format!("video {:?} has no MOS", r.video_id)));
        }
    }
    if mask.dims() == 0 {
        return Err(Error::InvalidInput("feature mask selects no dimensions".into()));
    }
    let refs: Vec<&FeatureRecord> = records.iter().collect();
    let spatial = train_branch(&refs, |r| &r.spatial, &mask.spatial, "spatial", cfg)?;
    let temporal = train_branch(&refs, |r| &r.temporal, &mask.temporal, "temporal", cfg)?;
    let (spatial, spatial_cv_srocc) = match spatial {
        Some((model, score)) => (Some(model), Some(score)),
        None => (None, None),
    };
    let (temporal, temporal_cv_srocc) = match temporal {
        Some((model, score)) => (Some(model), Some(score)),
        None => (None, None),
    };
    Ok(EnsembleModel {
        format: "faver-model".to_string(),
        version: 1,
        schema_hash: schema_hash().to_string(),
        wavelet: wavelet.to_string(),
        stride: stride.to_string(),
        mask: mask.clone(),
        spatial,
        temporal,
        spatial_cv_srocc,
        temporal_cv_srocc,
    })
}

impl EnsembleModel {
    /// Predicts the quality score of one record: the arithmetic mean of the
    /// branch predictions (or the single present branch), unclamped.
    pub fn predict(&self, record: &FeatureRecord) -> Result<f64> {
        record.check_dims()?;
        let mut sum = 0.0;
        let mut count = 0usize;
        if let Some(model) = &self.spatial {
            let x: Vec<f64> = self.mask.spatial.iter().map(|&i| record.spatial[i]).collect();
            sum += model.predict_one(&x)?;
            count += 1;
        }
        if let Some(model) = &self.temporal {
            let x: Vec<f64> = self.mask.temporal.iter().map(|&i| record.temporal[i]).collect();
            sum += model.predict_one(&x)?;
            count += 1;
        }
        if count == 0 {
            return Err(Error::Data("model has no trained branch".into()));
        }
        Ok(sum / count as f64)
    }

    /// Serializes to the canonical JSON document (deterministic bytes).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: EnsembleModel =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
        if model.format != "faver-model" || model.version != 1 {
            return Err(Error::Format(format!(
                "unrecognized model document {}/{}",
                model.format, model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Refuses artifacts whose schema or wavelet family differ from the
    /// model's training features.
    pub fn check_compatible(&self, schema: &str, wavelet: &str) -> Result<()> {
        if self.schema_hash != schema {
            return Err(Error::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found: schema.to_string(),
            });
        }
        if self.wavelet != wavelet {
            return Err(Error::Data(format!(
                "model was trained on {} features, input carries {}",
                self.wavelet, wavelet
            )));
        }
        Ok(())
    }
}
