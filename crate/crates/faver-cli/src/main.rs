//! The `faver` command: feature extraction, training, prediction, protocol
//! evaluation, throughput benchmarking, and filter-bank inspection.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3 I/O or
//! internal error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use faver::dataset::{DatasetManifest, FeatureFile};
use faver::error::{Error, Result};
use faver::eval::{kfold_protocol, run_protocol, subband_study, EvalReport, ProtocolConfig, SplitRatio};
use faver::pipeline::{
    benchmark_manifest, extract_manifest, extract_single_video, sidecar_log_path, BenchReport,
    ExtractOptions, ExtractSummary, RawGeometry,
};
use faver::regression::{train_ensemble, EnsembleModel, TrainConfig};
use faver::schema::{schema_hash, Ablation, FeatureMask};
use faver::temporal::{build_filter_bank, WaveletFamily};
use faver::video::{Framerate, PixelFormat, SamplingMode};

#[derive(Parser)]
#[command(
    name = "faver",
    version,
    about = "Blind quality prediction of variable and high frame rate videos"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Geometry flags required for raw (headerless) YUV inputs.
#[derive(Args, Debug, Clone)]
struct RawArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Frames per second, e.g. "120" or "30000:1001".
    #[arg(long)]
    fps: Option<String>,
    /// Pixel format of raw input: 420 or 444.
    #[arg(long, value_name = "FMT")]
    pix_fmt: Option<String>,
}

impl RawArgs {
    fn geometry(&self) -> Result<Option<RawGeometry>> {
        match (self.width, self.height, &self.fps, &self.pix_fmt) {
            (None, None, None, None) => Ok(None),
            (Some(width), Some(height), Some(fps), Some(fmt)) => Ok(Some(RawGeometry {
                width,
                height,
                framerate: parse_fps(fps)?,
                pixel_format: fmt.parse::<PixelFormat>()?,
            })),
            _ => Err(Error::Usage(
                "raw input needs all of --width, --height, --fps, --pix-fmt".into(),
            )),
        }
    }
}

fn parse_fps(s: &str) -> Result<Framerate> {
    if let Some((num, den)) = s.split_once(':') {
        let num = num.parse().map_err(|_| Error::Usage(format!("bad fps {s:?}")))?;
        let den = den.parse().map_err(|_| Error::Usage(format!("bad fps {s:?}")))?;
        return Framerate::new(num, den);
    }
    let v: f64 = s.parse().map_err(|_| Error::Usage(format!("bad fps {s:?}")))?;
    if v <= 0.0 {
        return Err(Error::Usage(format!("fps must be positive, got {s:?}")));
    }
    if (v.round() - v).abs() < 1e-9 {
        Framerate::new(v.round() as u32, 1)
    } else {
        // Represent fractional rates with a 1001 denominator (29.97 etc.).
        Framerate::new((v * 1001.0).round() as u32, 1001)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract spatial + temporal features for every video in a manifest.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        /// Output feature file (CSV). Existing rows are kept when the schema
        /// matches, making reruns incremental.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "haar")]
        wavelet: String,
        /// Temporal sampling stride: "1s" or a frame count (16, 8, 4).
        #[arg(long, default_value = "1s")]
        stride: String,
        /// Accept manifests whose video paths do not all resolve.
        #[arg(long)]
        allow_missing: bool,
        #[command(flatten)]
        raw: RawArgs,
    },
    /// Train the two-branch ensemble on a feature file with MOS labels.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Randomized-search budget per branch.
        #[arg(long, default_value_t = 30)]
        budget: usize,
        /// Restrict training to a named feature subset.
        #[arg(long)]
        ablation: Option<String>,
    },
    /// Score videos with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Precomputed feature file to score.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Raw video to score (features are extracted on the fly with the
        /// model's recorded wavelet and stride).
        #[arg(long)]
        video: Option<PathBuf>,
        /// Output CSV (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        raw: RawArgs,
    },
    /// Run the split protocol and report median SROCC/PLCC/RMSE.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Train:test content ratio.
        #[arg(long, default_value = "13:3")]
        ratio: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Randomized-search budget per branch per iteration.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        /// Feature subset to evaluate (Y, YUV, YGM, YLOG, YGMLOG, FAVER-Spt,
        /// FAVER-Tmp, FAVER-All).
        #[arg(long)]
        ablation: Option<String>,
        /// Evaluate seven reduced models, one per temporal subband.
        #[arg(long)]
        per_subband: bool,
        /// Use content-separated k-fold splits instead of random draws.
        #[arg(long)]
        kfold: Option<usize>,
        /// Directory for the report and CSV artifacts.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Time end-to-end feature extraction per framerate class.
    Benchmark {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "haar")]
        wavelet: String,
        #[arg(long, default_value = "1s")]
        stride: String,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        raw: RawArgs,
    },
    /// Dump the temporal filter-bank taps.
    Filters {
        /// Restrict to one family (haar, db2, bior22).
        #[arg(long)]
        wavelet: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's own help/version on stdout with success.
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract { manifest, out, wavelet, stride, allow_missing, raw } => {
            cmd_extract(&manifest, &out, &wavelet, &stride, allow_missing, &raw)
        }
        Command::Train { features, manifest, out_model, seed, budget, ablation } => {
            cmd_train(&features, &manifest, &out_model, seed, budget, ablation.as_deref())
        }
        Command::Predict { model, features, video, out, raw } => {
            cmd_predict(&model, features.as_deref(), video.as_deref(), out.as_deref(), &raw)
        }
        Command::Evaluate {
            features,
            manifest,
            iterations,
            ratio,
            seed,
            budget,
            ablation,
            per_subband,
            kfold,
            out_dir,
        } => cmd_evaluate(
            &features,
            &manifest,
            iterations,
            &ratio,
            seed,
            budget,
            ablation.as_deref(),
            per_subband,
            kfold,
            &out_dir,
        ),
        Command::Benchmark { manifest, wavelet, stride, repeats, out, raw } => {
            cmd_benchmark(&manifest, &wavelet, &stride, repeats, out.as_deref(), &raw)
        }
        Command::Filters { wavelet, json } => cmd_filters(wavelet.as_deref(), json),
    }
}

fn cmd_extract(
    manifest_path: &Path,
    out: &Path,
    wavelet: &str,
    stride: &str,
    allow_missing: bool,
    raw: &RawArgs,
) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path, allow_missing)?;
    let opts = ExtractOptions {
        wavelet: wavelet.parse::<WaveletFamily>()?,
        stride: stride.parse::<SamplingMode>()?,
        raw_geometry: raw.geometry()?,
        allow_missing,
    };
    let summary: ExtractSummary = extract_manifest(&manifest, &opts, out)?;
    println!(
        "extracted {} video(s) ({} reused, {} from cache, {} failed) -> {}",
        summary.computed,
        summary.reused,
        summary.cached,
        summary.failed.len(),
        out.display()
    );
    if !summary.failed.is_empty() {
        println!("failures logged to {}", sidecar_log_path(out).display());
    }
    Ok(())
}

fn load_features_with_manifest(
    features_path: &Path,
    manifest_path: &Path,
) -> Result<FeatureFile> {
    let manifest = DatasetManifest::load(manifest_path, true)?;
    let mut features = FeatureFile::read(features_path)?;
    features.check_schema()?;
    features.join_manifest(&manifest)?;
    Ok(features)
}

fn parse_mask(ablation: Option<&str>) -> Result<FeatureMask> {
    Ok(match ablation {
        Some(name) => Ablation::parse(name)?.mask(),
        None => FeatureMask::all(),
    })
}

fn cmd_train(
    features_path: &Path,
    manifest_path: &Path,
    out_model: &Path,
    seed: u64,
    budget: usize,
    ablation: Option<&str>,
) -> Result<()> {
    let features = load_features_with_manifest(features_path, manifest_path)?;
    for r in &features.records {
        if r.mos.is_none() {
            return Err(Error::Data(format!(
                "video {:?} has no MOS in the manifest; training needs labels for every row",
                r.video_id
            )));
        }
    }
    let mask = parse_mask(ablation)?;
    let cfg = TrainConfig { seed, budget, kernel_override: None };
    let model = train_ensemble(
        &features.records,
        &mask,
        &cfg,
        &features.meta.wavelet,
        &features.meta.stride,
    )?;
    print_branch("spatial", model.spatial.as_ref(), model.spatial_cv_srocc);
    print_branch("temporal", model.temporal.as_ref(), model.temporal_cv_srocc);
    model.save(out_model)?;
    println!("model written to {}", out_model.display());

    // Training-set scores, for a quick sanity read.
    for r in &features.records {
        println!("train-score {},{}", r.video_id, model.predict(r)?);
    }
    Ok(())
}

fn print_branch(name: &str, model: Option<&faver::regression::SvrModel>, cv: Option<f64>) {
    match model {
        Some(m) => {
            let kernel = match m.kernel {
                faver::regression::Kernel::Rbf { gamma } => format!("rbf gamma={gamma:.6e}"),
                faver::regression::Kernel::Linear => "linear".to_string(),
            };
            println!(
                "{name}: {kernel} C={:.6e} epsilon={:.4} cv-srocc={:.4} ({} SVs{})",
                m.c,
                m.epsilon,
                cv.unwrap_or(f64::NAN),
                m.support_vectors.len(),
                if m.converged { "" } else { ", not converged" }
            );
        }
        None => println!("{name}: no features selected"),
    }
}

fn cmd_predict(
    model_path: &Path,
    features: Option<&Path>,
    video: Option<&Path>,
    out: Option<&Path>,
    raw: &RawArgs,
) -> Result<()> {
    let model = EnsembleModel::load(model_path)?;
    let mut rows: Vec<(String, std::result::Result<f64, String>)> = Vec::new();
    match (features, video) {
        (Some(features_path), None) => {
            let file = FeatureFile::read(features_path)?;
            model.check_compatible(&file.meta.schema_hash, &file.meta.wavelet)?;
            if file.meta.stride != model.stride {
                return Err(Error::Data(format!(
                    "model expects stride {} features, file carries {}",
                    model.stride, file.meta.stride
                )));
            }
            for r in &file.records {
                rows.push((r.video_id.clone(), model.predict(r).map_err(|e| e.to_string())));
            }
        }
        (None, Some(video_path)) => {
            let wavelet = model.wavelet.parse::<WaveletFamily>()?;
            let stride = model.stride.parse::<SamplingMode>()?;
            let id = video_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "video".to_string());
            match extract_single_video(video_path, &id, wavelet, stride, raw.geometry()?) {
                Ok(record) => {
                    rows.push((id, model.predict(&record).map_err(|e| e.to_string())))
                }
                Err(Error::Io(e)) => return Err(Error::Io(e)),
                Err(e) => rows.push((id, Err(e.to_string()))),
            }
        }
        _ => {
            return Err(Error::Usage(
                "predict needs exactly one of --features or --video".into(),
            ))
        }
    }

    let mut text = String::from("video_id,score,error\n");
    for (id, outcome) in &rows {
        match outcome {
            Ok(score) => text.push_str(&format!("{id},{score},\n")),
            Err(msg) => text.push_str(&format!("{id},,{}\n", msg.replace(',', ";"))),
        }
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    features_path: &Path,
    manifest_path: &Path,
    iterations: usize,
    ratio: &str,
    seed: u64,
    budget: usize,
    ablation: Option<&str>,
    per_subband: bool,
    kfold: Option<usize>,
    out_dir: &Path,
) -> Result<()> {
    let features = load_features_with_manifest(features_path, manifest_path)?;
    let labeled: Vec<_> =
        features.records.iter().filter(|r| r.mos.is_some()).cloned().collect();
    if labeled.len() < features.records.len() {
        eprintln!(
            "warning: {} of {} rows lack MOS and are excluded",
            features.records.len() - labeled.len(),
            features.records.len()
        );
    }
    let ratio: SplitRatio = ratio.parse()?;
    let mask = parse_mask(ablation)?;
    std::fs::create_dir_all(out_dir)?;

    let config_echo = format!(
        "wavelet={} stride={} iterations={iterations} ratio={ratio} seed={seed} \
         budget={budget} ablation={} kfold={kfold:?} subbands={per_subband} schema={}",
        features.meta.wavelet,
        features.meta.stride,
        ablation.unwrap_or("FAVER-All"),
        schema_hash(),
    );
    let tag = short_hash(&config_echo);

    if per_subband {
        let cfg = ProtocolConfig { iterations, ratio, seed, budget };
        let rows = subband_study(&labeled, &cfg)?;
        let path = out_dir.join(format!("subbands_{tag}.csv"));
        let mut text = String::from("subband,median_srocc,median_plcc\n");
        println!("subband  SROCC   PLCC");
        for row in &rows {
            println!("{:>7}  {:.4}  {:.4}", row.subband, row.median_srocc, row.median_plcc);
            text.push_str(&format!(
                "{},{},{}\n",
                row.subband, row.median_srocc, row.median_plcc
            ));
        }
        std::fs::write(&path, text)?;
        println!("per-subband table written to {}", path.display());
        return Ok(());
    }

    let report = match kfold {
        Some(k) => kfold_protocol(&labeled, &mask, k, seed, budget)?,
        None => {
            let cfg = ProtocolConfig { iterations, ratio, seed, budget };
            run_protocol(&labeled, &mask, &cfg)?
        }
    };
    write_report_files(&report, out_dir, &tag, &config_echo)?;
    println!(
        "median SROCC {:.4}  PLCC {:.4}  RMSE {:.4}  ({} iterations, {} features)",
        report.median_srocc,
        report.median_plcc,
        report.median_rmse,
        report.iterations.len(),
        report.mask_dims
    );
    Ok(())
}

fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn write_report_files(
    report: &EvalReport,
    out_dir: &Path,
    tag: &str,
    config_echo: &str,
) -> Result<()> {
    let report_path = out_dir.join(format!("report_{tag}.json"));
    let document = serde_json::json!({
        "config_echo": config_echo,
        "report": report,
    });
    std::fs::write(&report_path, serde_json::to_string_pretty(&document).unwrap())?;

    let iter_path = out_dir.join(format!("iterations_{tag}.csv"));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&iter_path)?);
    writeln!(w, "iteration,srocc,plcc,rmse")?;
    for (i, m) in report.iterations.iter().enumerate() {
        writeln!(w, "{i},{},{},{}", m.srocc, m.plcc, m.rmse)?;
    }
    w.flush()?;

    let scatter_path = out_dir.join(format!("scatter_{tag}.csv"));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&scatter_path)?);
    writeln!(w, "video_id,prediction,mos")?;
    for p in &report.scatter {
        writeln!(w, "{},{},{}", p.video_id, p.prediction, p.mos)?;
    }
    w.flush()?;

    println!(
        "wrote {}, {}, {}",
        report_path.display(),
        iter_path.display(),
        scatter_path.display()
    );
    Ok(())
}

fn cmd_benchmark(
    manifest_path: &Path,
    wavelet: &str,
    stride: &str,
    repeats: usize,
    out: Option<&Path>,
    raw: &RawArgs,
) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path, false)?;
    let opts = ExtractOptions {
        wavelet: wavelet.parse::<WaveletFamily>()?,
        stride: stride.parse::<SamplingMode>()?,
        raw_geometry: raw.geometry()?,
        allow_missing: false,
    };
    let report: BenchReport = benchmark_manifest(&manifest, &opts, repeats)?;
    println!("machine: {}", report.machine);
    println!("video            fps   resolution   mean s   min s");
    for v in &report.videos {
        println!(
            "{:<16} {:>4} {:>7}x{:<6} {:>7.2} {:>7.2}",
            v.video_id, v.fps_class, v.width, v.height, v.mean_seconds, v.min_seconds
        );
    }
    println!("class means:");
    for c in &report.classes {
        println!("  {:>4} fps: {:.2} s/video over {} video(s)", c.fps_class, c.mean_seconds, c.videos);
    }
    if let Some(ratio) = report.ratio_120_to_30 {
        println!("120fps/30fps cost ratio: {ratio:.3}");
    }
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&report).unwrap())?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_filters(wavelet: Option<&str>, json: bool) -> Result<()> {
    let families: Vec<WaveletFamily> = match wavelet {
        Some(name) => vec![name.parse()?],
        None => WaveletFamily::ALL.to_vec(),
    };
    let banks: Vec<_> = families.iter().map(|&f| build_filter_bank(f)).collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&banks).unwrap());
        return Ok(());
    }
    for bank in &banks {
        println!(
            "{}: 7 bandpass filters, {} taps each",
            bank.family.tag(),
            bank.filter_length
        );
        for (k, leaf) in bank.filters.iter().enumerate() {
            let taps: Vec<String> = leaf.taps.iter().map(|t| format!("{t:.12}")).collect();
            println!("  b{} {}  [{}]", k + 1, leaf.path, taps.join(", "));
        }
    }
    Ok(())
}
