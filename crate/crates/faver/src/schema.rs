//! The frozen feature schema: names and positions of all 748 features, the
//! constants that shape their values, named feature-subset masks, and a hash
//! that changes whenever any of those change.
//!
//! Feature files and model files both carry this hash; mismatched artifacts
//! are refused rather than silently misinterpreted.

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nss::{ALPHA_MAX, ALPHA_MIN, ALPHA_STEP, LOG_OFFSET, NSS_DIM, RHO_SENTINEL};
use crate::spatial::{LOG_SIGMA, LOG_WINDOW, SPATIAL_DIM};
use crate::temporal::{NUM_SUBBANDS, TEMPORAL_DIM, TEMPORAL_HEIGHT};

/// Total feature dimensionality (spatial + temporal).
pub const TOTAL_DIM: usize = SPATIAL_DIM + TEMPORAL_DIM;

/// Per-map feature names in extractor order.
pub const NSS34_NAMES: [&str; NSS_DIM] = [
    "ggd_alpha_mscn",
    "ggd_sigma_mscn",
    "sigma_phi",
    "sigma_rho",
    "aggd_nu_h",
    "aggd_eta_h",
    "aggd_sigma_l_h",
    "aggd_sigma_r_h",
    "aggd_nu_v",
    "aggd_eta_v",
    "aggd_sigma_l_v",
    "aggd_sigma_r_v",
    "aggd_nu_d1",
    "aggd_eta_d1",
    "aggd_sigma_l_d1",
    "aggd_sigma_r_d1",
    "aggd_nu_d2",
    "aggd_eta_d2",
    "aggd_sigma_l_d2",
    "aggd_sigma_r_d2",
    "ggd_alpha_logderiv1",
    "ggd_sigma_logderiv1",
    "ggd_alpha_logderiv2",
    "ggd_sigma_logderiv2",
    "ggd_alpha_logderiv3",
    "ggd_sigma_logderiv3",
    "ggd_alpha_logderiv4",
    "ggd_sigma_logderiv4",
    "ggd_alpha_logderiv5",
    "ggd_sigma_logderiv5",
    "ggd_alpha_logderiv6",
    "ggd_sigma_logderiv6",
    "ggd_alpha_logderiv7",
    "ggd_sigma_logderiv7",
];

/// Spatial block labels in vector order: map at full or half scale.
pub const SPATIAL_BLOCKS: [&str; 8] =
    ["y_full", "y_half", "u_full", "u_half", "v_full", "v_half", "gm_half", "log_half"];

/// Names of the 272 spatial feature columns.
pub fn spatial_feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(SPATIAL_DIM);
        for block in SPATIAL_BLOCKS {
            for feat in NSS34_NAMES {
                names.push(format!("{block}.{feat}"));
            }
        }
        names
    })
}

/// Names of the 476 temporal feature columns.
pub fn temporal_feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(TEMPORAL_DIM);
        for band in 1..=NUM_SUBBANDS {
            for scale in ["full", "half"] {
                for feat in NSS34_NAMES {
                    names.push(format!("b{band}_{scale}.{feat}"));
                }
            }
        }
        names
    })
}

/// Canonical description of the schema: layout plus every constant that
/// changes feature values.
pub fn schema_description() -> String {
    let mut s = String::new();
    s.push_str("faver-feature-schema v1\n");
    s.push_str("mscn: C=1 window=7x7 sigma=7/6 border=symmetric\n");
    s.push_str(&format!(
        "ggd-grid: [{ALPHA_MIN},{ALPHA_MAX}] step {ALPHA_STEP}; \
         fallback ggd=(10,0) aggd=(10,0,0,0) rho_sentinel={RHO_SENTINEL}\n"
    ));
    s.push_str(&format!("log-derivative: shift=-min offset={LOG_OFFSET}\n"));
    s.push_str("downscale: gaussian sigma=0.5 truncate=3sigma subsample=even\n");
    s.push_str(&format!("log-kernel: sigma={LOG_SIGMA} window={LOG_WINDOW} zero-mean\n"));
    s.push_str("sobel: 3x3 (1,0,-1;2,0,-2;1,0,-1) and transpose-pair\n");
    s.push_str(&format!(
        "temporal: height<={TEMPORAL_HEIGHT} packet-depth=3 dc-dropped frequency-ordered\n"
    ));
    s.push_str("statistics: population (divide by N)\n");
    for name in spatial_feature_names() {
        s.push_str(name);
        s.push('\n');
    }
    for name in temporal_feature_names() {
        s.push_str(name);
        s.push('\n');
    }
    s
}

/// Hex SHA-256 of the canonical schema description.
pub fn schema_hash() -> &'static str {
    static HASH: OnceLock<String> = OnceLock::new();
    HASH.get_or_init(|| {
        let digest = Sha256::digest(schema_description().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    })
}

/// Indices into the spatial and temporal vectors selected by a feature mask.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FeatureMask {
    pub spatial: Vec<usize>,
    pub temporal: Vec<usize>,
}

impl FeatureMask {
    /// Everything: the full 272 + 476 feature set.
    pub fn all() -> Self {
        FeatureMask { spatial: (0..SPATIAL_DIM).collect(), temporal: (0..TEMPORAL_DIM).collect() }
    }

    pub fn spatial_only() -> Self {
        FeatureMask { spatial: (0..SPATIAL_DIM).collect(), temporal: Vec::new() }
    }

    pub fn temporal_only() -> Self {
        FeatureMask { spatial: Vec::new(), temporal: (0..TEMPORAL_DIM).collect() }
    }

    /// Spatial blocks by label, e.g. `["y_full", "y_half"]`.
    pub fn spatial_blocks(blocks: &[&str]) -> Result<Self> {
        let mut spatial = Vec::new();
        for block in blocks {
            let pos = SPATIAL_BLOCKS
                .iter()
                .position(|b| b == block)
                .ok_or_else(|| Error::Usage(format!("unknown spatial block {block:?}")))?;
            spatial.extend(pos * NSS_DIM..(pos + 1) * NSS_DIM);
        }
        spatial.sort_unstable();
        Ok(FeatureMask { spatial, temporal: Vec::new() })
    }

    /// The 68 temporal features (both scales) of one subband, 1-based.
    pub fn single_subband(band: usize) -> Result<Self> {
        if band == 0 || band > NUM_SUBBANDS {
            return Err(Error::Usage(format!("subband {band} out of 1..={NUM_SUBBANDS}")));
        }
        let per_band = 2 * NSS_DIM;
        let start = (band - 1) * per_band;
        Ok(FeatureMask { spatial: Vec::new(), temporal: (start..start + per_band).collect() })
    }

    pub fn dims(&self) -> usize {
        self.spatial.len() + self.temporal.len()
    }
}

/// The predefined feature-subset experiments selectable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    Y,
    Yuv,
    Ygm,
    Ylog,
    Ygmlog,
    SpatialOnly,
    TemporalOnly,
    All,
}

impl Ablation {
    pub const NAMES: [&'static str; 8] =
        ["Y", "YUV", "YGM", "YLOG", "YGMLOG", "FAVER-Spt", "FAVER-Tmp", "FAVER-All"];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "Y" => Ok(Ablation::Y),
            "YUV" => Ok(Ablation::Yuv),
            "YGM" => Ok(Ablation::Ygm),
            "YLOG" => Ok(Ablation::Ylog),
            "YGMLOG" => Ok(Ablation::Ygmlog),
            "FAVER-Spt" => Ok(Ablation::SpatialOnly),
            "FAVER-Tmp" => Ok(Ablation::TemporalOnly),
            "FAVER-All" => Ok(Ablation::All),
            other => Err(Error::Usage(format!(
                "unknown ablation {other:?}; valid names: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn mask(self) -> FeatureMask {
        match self {
            Ablation::Y => FeatureMask::spatial_blocks(&["y_full", "y_half"]).unwrap(),
            Ablation::Yuv => FeatureMask::spatial_blocks(&[
                "y_full", "y_half", "u_full", "u_half", "v_full", "v_half",
            ])
            .unwrap(),
            Ablation::Ygm => {
                FeatureMask::spatial_blocks(&["y_full", "y_half", "gm_half"]).unwrap()
            }
            Ablation::Ylog => {
                FeatureMask::spatial_blocks(&["y_full", "y_half", "log_half"]).unwrap()
            }
            Ablation::Ygmlog => {
                FeatureMask::spatial_blocks(&["y_full", "y_half", "gm_half", "log_half"]).unwrap()
            }
            Ablation::SpatialOnly => FeatureMask::spatial_only(),
            Ablation::TemporalOnly => FeatureMask::temporal_only(),
            Ablation::All => FeatureMask::all(),
        }
    }
}
