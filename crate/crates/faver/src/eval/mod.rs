//! The evaluation protocol: content-separated random train/test splits, many
//! iterations, median SROCC/PLCC/RMSE with logistic linearization, plus the
//! per-subband study driver.

mod logistic;
mod metrics;

pub use logistic::{logistic_fit, LogisticFit};
pub use metrics::{average_ranks, pearson, plcc_rmse, srocc};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{train_ensemble, FeatureRecord, TrainConfig};
use crate::schema::FeatureMask;
use crate::seeds::derive_rng;

/// Train/test content-count ratio, e.g. 13:3 (LIVE-YT-HFR) or 17:5 (BVI-HFR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: usize,
    pub test: usize,
}

impl std::str::FromStr for SplitRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("ratio must look like 13:3, got {s:?}")))?;
        let train = a.parse().map_err(|_| Error::Usage(format!("bad ratio {s:?}")))?;
        let test = b.parse().map_err(|_| Error::Usage(format!("bad ratio {s:?}")))?;
        if train == 0 || test == 0 {
            return Err(Error::Usage("ratio parts must be positive".into()));
        }
        Ok(SplitRatio { train, test })
    }
}

impl std::fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.train, self.test)
    }
}

/// Protocol configuration echoed into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub iterations: usize,
    pub ratio: SplitRatio,
    pub seed: u64,
    /// Randomized-search budget per branch per iteration.
    pub budget: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            iterations: 100,
            ratio: SplitRatio { train: 13, test: 3 },
            seed: 0,
            budget: 20,
        }
    }
}

/// Metrics of one train/test iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub srocc: f64,
    pub plcc: f64,
    pub rmse: f64,
    pub logistic_beta: [f64; 4],
}

/// One (prediction, MOS) pair of the representative fold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub video_id: String,
    pub prediction: f64,
    pub mos: f64,
}

/// Full protocol output: per-iteration arrays, their medians, and scatter
/// data from the iteration realizing the median SROCC.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ProtocolConfig,
    pub mask_dims: usize,
    pub iterations: Vec<IterationMetrics>,
    pub median_srocc: f64,
    pub median_plcc: f64,
    pub median_rmse: f64,
    /// Iterations whose test predictions were rank-degenerate (recorded as
    /// zero correlation).
    pub degenerate_iterations: usize,
    pub scatter_iteration: usize,
    pub scatter: Vec<ScatterPoint>,
}

/// Lower median: the `(n-1)/2`-th order statistic (documented convention for
/// even counts).
pub fn lower_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[(sorted.len() - 1) / 2]
}

/// Draws one content-separated split: contents are shuffled and the first
/// `round(C * train/(train+test))` (clamped to keep both sides nonempty) go
/// to training.
pub fn content_split(
    contents: &[String],
    ratio: SplitRatio,
    rng: &mut impl Rng,
) -> (Vec<String>, Vec<String>) {
    let mut order: Vec<usize> = (0..contents.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let c = contents.len();
    let frac = ratio.train as f64 / (ratio.train + ratio.test) as f64;
    let train_count = ((c as f64 * frac).round() as usize).clamp(1, c - 1);
    let train = order[..train_count].iter().map(|&i| contents[i].clone()).collect();
    let test = order[train_count..].iter().map(|&i| contents[i].clone()).collect();
    (train, test)
}

fn distinct_contents(records: &[FeatureRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.content_id) {
            out.push(r.content_id.clone());
        }
    }
    out
}

struct IterationOutcome {
    metrics: IterationMetrics,
    scatter: Vec<ScatterPoint>,
    degenerate: bool,
}

fn run_iteration(
    records: &[FeatureRecord],
    contents: &[String],
    mask: &FeatureMask,
    cfg: &ProtocolConfig,
    iteration: u64,
) -> Result<IterationOutcome> {
    let mut rng = derive_rng(cfg.seed, "protocol-split", iteration);
    let (train_contents, test_contents) = content_split(contents, cfg.ratio, &mut rng);
    let train: Vec<FeatureRecord> = records
        .iter()
        .filter(|r| train_contents.contains(&r.content_id))
        .cloned()
        .collect();
    let test: Vec<&FeatureRecord> =
        records.iter().filter(|r| test_contents.contains(&r.content_id)).collect();

    let train_cfg = TrainConfig {
        seed: cfg.seed.wrapping_add(iteration.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        budget: cfg.budget,
        kernel_override: None,
    };
    let model = train_ensemble(&train, mask, &train_cfg, "protocol", "protocol")?;

    let mut preds = Vec::with_capacity(test.len());
    let mut mos = Vec::with_capacity(test.len());
    let mut scatter = Vec::with_capacity(test.len());
    for r in &test {
        let p = model.predict(r)?;
        let m = r.mos.ok_or_else(|| Error::Data(format!("video {:?} has no MOS", r.video_id)))?;
        preds.push(p);
        mos.push(m);
        scatter.push(ScatterPoint { video_id: r.video_id.clone(), prediction: p, mos: m });
    }

    match (srocc(&preds, &mos), logistic_fit(&preds, &mos)) {
        (Ok(s), Ok(fit)) => {
            let (plcc, rmse) = plcc_rmse(&fit.mapped, &mos)?;
            Ok(IterationOutcome {
                metrics: IterationMetrics { srocc: s, plcc, rmse, logistic_beta: fit.beta },
                scatter,
                degenerate: false,
            })
        }
        // Rank-degenerate predictions: record zero correlation and the RMSE
        // of the constant-mean map rather than aborting the whole protocol.
        _ => {
            let mean = mos.iter().sum::<f64>() / mos.len() as f64;
            let rmse = (mos.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
                / mos.len() as f64)
                .sqrt();
            Ok(IterationOutcome {
                metrics: IterationMetrics {
                    srocc: 0.0,
                    plcc: 0.0,
                    rmse,
                    logistic_beta: [f64::NAN; 4],
                },
                scatter,
                degenerate: true,
            })
        }
    }
}

/// Runs the full protocol: `iterations` content-separated splits, a fresh
/// ensemble per split, SROCC/PLCC/RMSE per iteration, medians over all of
/// them. Iterations run in parallel on derived seeds; the report is
/// deterministic for a given `(records, mask, config)`.
pub fn run_protocol(
    records: &[FeatureRecord],
    mask: &FeatureMask,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidInput("iterations must be at least 1".into()));
    }
    for r in records {
        r.check_dims()?;
    }
    let contents = distinct_contents(records);
    if contents.len() < 4 {
        return Err(Error::Protocol(format!(
            "{} distinct contents; the split protocol needs at least 4",
            contents.len()
        )));
    }

    let outcomes: Vec<Result<IterationOutcome>> = (0..cfg.iterations as u64)
        .into_par_iter()
        .map(|i| run_iteration(records, &contents, mask, cfg, i))
        .collect();
    let mut iterations = Vec::with_capacity(cfg.iterations);
    let mut scatters = Vec::with_capacity(cfg.iterations);
    let mut degenerate = 0usize;
    for outcome in outcomes {
        let o = outcome?;
        iterations.push(o.metrics);
        scatters.push(o.scatter);
        degenerate += o.degenerate as usize;
    }

    let sroccs: Vec<f64> = iterations.iter().map(|m| m.srocc).collect();
    let median_srocc = lower_median(&sroccs);
    let median_plcc = lower_median(&iterations.iter().map(|m| m.plcc).collect::<Vec<_>>());
    let median_rmse = lower_median(&iterations.iter().map(|m| m.rmse).collect::<Vec<_>>());
    // Representative scatter: the first iteration realizing the median SROCC.
    let scatter_iteration = sroccs.iter().position(|&s| s == median_srocc).unwrap();

    Ok(EvalReport {
        config: cfg.clone(),
        mask_dims: mask.dims(),
        scatter: scatters.swap_remove(scatter_iteration),
        scatter_iteration,
        iterations,
        median_srocc,
        median_plcc,
        median_rmse,
        degenerate_iterations: degenerate,
    })
}

/// Content-separated k-fold variant: contents are shuffled once and dealt
/// into `k` folds; each fold serves as the test set exactly once.
pub fn kfold_protocol(
    records: &[FeatureRecord],
    mask: &FeatureMask,
    k: usize,
    seed: u64,
    budget: usize,
) -> Result<EvalReport> {
    if k < 2 {
        return Err(Error::InvalidInput("k-fold evaluation needs k >= 2".into()));
    }
    for r in records {
        r.check_dims()?;
    }
    let contents = distinct_contents(records);
    if contents.len() < k {
        return Err(Error::Protocol(format!(
            "{} distinct contents cannot fill {k} folds",
            contents.len()
        )));
    }
    let mut rng = derive_rng(seed, "kfold-assignment", 0);
    let mut order: Vec<usize> = (0..contents.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let fold_of = |content: &String| -> usize {
        let idx = contents.iter().position(|c| c == content).unwrap();
        order.iter().position(|&o| o == idx).unwrap() % k
    };

    let outcomes: Vec<Result<IterationOutcome>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<FeatureRecord> = records
                .iter()
                .filter(|r| fold_of(&r.content_id) != fold)
                .cloned()
                .collect();
            let test: Vec<&FeatureRecord> =
                records.iter().filter(|r| fold_of(&r.content_id) == fold).collect();
            let train_cfg = TrainConfig {
                seed: seed.wrapping_add(fold as u64),
                budget,
                kernel_override: None,
            };
            let model = train_ensemble(&train, mask, &train_cfg, "protocol", "protocol")?;
            let mut preds = Vec::new();
            let mut mos = Vec::new();
            let mut scatter = Vec::new();
            for r in &test {
                let p = model.predict(r)?;
                let m = r.mos.unwrap();
                preds.push(p);
                mos.push(m);
                scatter.push(ScatterPoint {
                    video_id: r.video_id.clone(),
                    prediction: p,
                    mos: m,
                });
            }
            let s = srocc(&preds, &mos)?;
            let fit = logistic_fit(&preds, &mos)?;
            let (plcc, rmse) = plcc_rmse(&fit.mapped, &mos)?;
            Ok(IterationOutcome {
                metrics: IterationMetrics { srocc: s, plcc, rmse, logistic_beta: fit.beta },
                scatter,
                degenerate: false,
            })
        })
        .collect();

    let mut iterations = Vec::new();
    let mut scatters = Vec::new();
    for o in outcomes {
        let o = o?;
        iterations.push(o.metrics);
        scatters.push(o.scatter);
    }
    let sroccs: Vec<f64> = iterations.iter().map(|m| m.srocc).collect();
    let median_srocc = lower_median(&sroccs);
    let scatter_iteration = sroccs.iter().position(|&s| s == median_srocc).unwrap();
    Ok(EvalReport {
        config: ProtocolConfig {
            iterations: k,
            ratio: SplitRatio { train: k - 1, test: 1 },
            seed,
            budget,
        },
        mask_dims: mask.dims(),
        median_plcc: lower_median(&iterations.iter().map(|m| m.plcc).collect::<Vec<_>>()),
        median_rmse: lower_median(&iterations.iter().map(|m| m.rmse).collect::<Vec<_>>()),
        median_srocc,
        degenerate_iterations: 0,
        scatter: scatters.swap_remove(scatter_iteration),
        scatter_iteration,
        iterations,
    })
}

/// Median metrics of a single-subband reduced model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubbandResult {
    /// 1-based subband index, lowest to highest frequency.
    pub subband: usize,
    pub median_srocc: f64,
    pub median_plcc: f64,
}

/// Trains and evaluates seven reduced models, one per temporal subband
/// (68 features each: 34 per scale).
pub fn subband_study(records: &[FeatureRecord], cfg: &ProtocolConfig) -> Result<Vec<SubbandResult>> {
    let mut rows = Vec::with_capacity(7);
    for band in 1..=7 {
        let mask = FeatureMask::single_subband(band)?;
        let report = run_protocol(records, &mask, cfg)?;
        rows.push(SubbandResult {
            subband: band,
            median_srocc: report.median_srocc,
            median_plcc: report.median_plcc,
        });
    }
    Ok(rows)
}
