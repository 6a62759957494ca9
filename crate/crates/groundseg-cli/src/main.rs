// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: segment scan directories, score against label
//! files, benchmark throughput, and generate synthetic labeled scenes.
//!
//! Diagnostics go to stderr; file outputs and the progress/summary lines
//! go to the paths and stdout respectively. Every command that writes
//! files also writes a `manifest.json` capturing the exact configuration,
//! inputs, and seeds needed to reproduce the run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use groundseg::cloud::{LabelSet, PointClass};
use groundseg::config::{parse_config, render_config};
use groundseg::czm;
use groundseg::eval::{
    self, evaluate, metrics_csv, summarize, threshold_stats_csv, ClassMask, FrameMetrics,
};
use groundseg::gle::ThresholdRow;
use groundseg::io;
use groundseg::pipeline::{ransac_baseline, PipelineConfig, RansacParams, Segmenter};
use groundseg::synth::{generate_scene, SceneSpec};

#[derive(Parser)]
#[command(
    name = "groundseg",
    version,
    about = "Adaptive ground segmentation for spinning-LiDAR scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment every scan in a directory into per-point class files.
    Segment {
        /// Directory of *.bin scans, processed in lexicographic order.
        scan_dir: PathBuf,
        /// Output directory for class files and the manifest.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        flags: PipelineFlags,
        /// Also write a colored PLY per frame.
        #[arg(long)]
        export_ply: bool,
        /// Also write the per-frame adaptive threshold trace CSV.
        #[arg(long)]
        stats_csv: bool,
    },
    /// Segment scans and score them against label files.
    Evaluate {
        /// Directory of *.bin scans.
        scan_dir: PathBuf,
        /// Directory of *.label files matching the scans by stem.
        label_dir: PathBuf,
        /// Output directory for the metrics CSV and manifest; omit to
        /// print the summary only.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Pipeline)]
        method: Method,
        /// Seed for the ransac method.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        flags: PipelineFlags,
        /// Also write a PLY per frame colored by evaluation outcome.
        #[arg(long)]
        export_ply: bool,
        /// Also write the adaptive threshold trace CSV (pipeline method).
        #[arg(long)]
        stats_csv: bool,
    },
    /// Measure segmentation throughput and the bin-sorting strategies.
    Bench {
        /// Directory of *.bin scans.
        scan_dir: PathBuf,
        /// Timing repetitions; the median is reported.
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[command(flatten)]
        flags: PipelineFlags,
        /// Optional directory for a manifest with the raw timings.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate synthetic labeled scans from a scene description file.
    Synth {
        /// Scene description (`key: values` lines).
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        frames: usize,
        /// Base seed; frame i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for scan and label files.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    /// The adaptive pipeline.
    Pipeline,
    /// Whole-cloud single-plane RANSAC baseline.
    Ransac,
    /// Classes copied from the labels (upper bound / plumbing check).
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Pipeline => "pipeline",
            Method::Ransac => "ransac",
            Method::Oracle => "oracle",
        }
    }
}

/// Pipeline construction flags shared by the processing commands.
#[derive(Args)]
struct PipelineFlags {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ablation: skip reflected-noise removal.
    #[arg(long)]
    disable_rnr: bool,
    /// Ablation: skip the vertical-plane peel.
    #[arg(long)]
    disable_rvpf: bool,
    /// Ablation: skip the temporal ground revert.
    #[arg(long)]
    disable_tgr: bool,
    /// Worker threads for the per-bin stage; 0 uses all cores.
    #[arg(long)]
    parallelism: Option<usize>,
}

impl PipelineFlags {
    /// Resolves the effective configuration and where it came from.
    fn resolve(&self) -> Result<(PipelineConfig, String)> {
        let (mut cfg, source) = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading configuration {}", path.display()))?;
                (parse_config(&text)?, path.display().to_string())
            }
            None => (PipelineConfig::default(), "defaults".to_string()),
        };
        if self.disable_rnr {
            cfg.noise_removal = None;
        }
        if self.disable_rvpf {
            cfg.vertical_filter = None;
        }
        if self.disable_tgr {
            cfg.temporal_revert = false;
        }
        if let Some(workers) = self.parallelism {
            cfg.parallelism = workers;
        }
        Ok((cfg, source))
    }
}

/// Reproducibility record written next to every command's outputs.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    /// Full configuration snapshot in the config-file syntax.
    config_text: String,
    config_source: String,
    disable_rnr: bool,
    disable_rvpf: bool,
    disable_tgr: bool,
    method: Option<String>,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    frame_total_us: Vec<u64>,
}

impl RunManifest {
    fn new(command: &str, config: &PipelineConfig, source: &str) -> Self {
        RunManifest {
            tool: "groundseg",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_text: render_config(config),
            config_source: source.to_string(),
            disable_rnr: config.noise_removal.is_none(),
            disable_rvpf: config.vertical_filter.is_none(),
            disable_tgr: !config.temporal_revert,
            method: None,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            frame_total_us: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn main() -> std::process::ExitCode {
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Segment {
            scan_dir,
            output,
            flags,
            export_ply,
            stats_csv,
        } => cmd_segment(&scan_dir, &output, &flags, export_ply, stats_csv),
        Command::Evaluate {
            scan_dir,
            label_dir,
            output,
            method,
            seed,
            flags,
            export_ply,
            stats_csv,
        } => cmd_evaluate(
            &scan_dir,
            &label_dir,
            output.as_deref(),
            method,
            seed,
            &flags,
            export_ply,
            stats_csv,
        ),
        Command::Bench {
            scan_dir,
            repetitions,
            flags,
            output,
        } => cmd_bench(&scan_dir, repetitions, &flags, output.as_deref()),
        Command::Synth {
            spec,
            frames,
            seed,
            output,
        } => cmd_synth(&spec, frames, seed, &output),
    }
}

/// Lexicographically sorted files with the given extension.
fn list_frames(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?;
    let mut frames: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(extension))
        .collect();
    frames.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
    if frames.is_empty() {
        bail!("no *.{extension} files in {}", dir.display());
    }
    Ok(frames)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_segment(
    scan_dir: &Path,
    output: &Path,
    flags: &PipelineFlags,
    export_ply: bool,
    stats_csv: bool,
) -> Result<()> {
    let (config, source) = flags.resolve()?;
    let scans = list_frames(scan_dir, "bin")?;
    fs::create_dir_all(output)
        .with_context(|| format!("creating {}", output.display()))?;
    let mut manifest = RunManifest::new("segment", &config, &source);
    let mut segmenter = Segmenter::new(config)?;
    let mut stats: Vec<(String, Vec<ThresholdRow>)> = Vec::new();
    for scan in &scans {
        let (cloud, report) = io::load_scan(scan)?;
        if report.skipped_nonfinite > 0 {
            eprintln!(
                "{}: skipped {} non-finite points",
                scan.display(),
                report.skipped_nonfinite
            );
        }
        let result = segmenter.segment(&cloud)?;
        let name = stem(scan);
        let class_path = output.join(format!("{name}.cls"));
        io::write_classes(&result.classes, &class_path)?;
        manifest.inputs.push(scan.display().to_string());
        manifest.outputs.push(class_path.display().to_string());
        manifest.frame_total_us.push(result.timing.total_us);
        if export_ply {
            let ply_path = output.join(format!("{name}.ply"));
            io::export_ply(&cloud, &result.classes, None, &ply_path)?;
            manifest.outputs.push(ply_path.display().to_string());
        }
        if stats_csv {
            stats.push((name.clone(), segmenter.state().threshold_rows()));
        }
        println!(
            "{name}: {} points, {} ground, {} noise, {} bins reverted, {:.1} ms",
            cloud.len(),
            result.ground_count,
            result.noise_count,
            result.reverted_bins,
            result.timing.total_us as f64 / 1e3
        );
    }
    if stats_csv {
        let path = output.join("thresholds.csv");
        fs::write(&path, threshold_stats_csv(&stats))
            .with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(path.display().to_string());
    }
    manifest.write(output)?;
    println!("segmented {} frames into {}", scans.len(), output.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    scan_dir: &Path,
    label_dir: &Path,
    output: Option<&Path>,
    method: Method,
    seed: u64,
    flags: &PipelineFlags,
    export_ply: bool,
    stats_csv: bool,
) -> Result<()> {
    let (config, source) = flags.resolve()?;
    let scans = list_frames(scan_dir, "bin")?;
    let labels = list_frames(label_dir, "label")?;
    if scans.len() != labels.len() {
        bail!(
            "{} scans but {} label files",
            scans.len(),
            labels.len()
        );
    }
    for (scan, label) in scans.iter().zip(&labels) {
        if stem(scan) != stem(label) {
            bail!(
                "frame mismatch: scan {} vs label {}",
                scan.display(),
                label.display()
            );
        }
    }
    if let Some(dir) = output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mask = ClassMask::new(
        eval::DEFAULT_GROUND_IDS.to_vec(),
        eval::DEFAULT_EXCLUDED_IDS.to_vec(),
    );
    let mut manifest = RunManifest::new("evaluate", &config, &source);
    manifest.method = Some(method.name().to_string());
    if method == Method::Ransac {
        manifest.seeds.push(seed);
    }
    let mut segmenter = Segmenter::new(config)?;
    let mut rows: Vec<(String, FrameMetrics)> = Vec::new();
    let mut stats: Vec<(String, Vec<ThresholdRow>)> = Vec::new();
    for (scan, label_path) in scans.iter().zip(&labels) {
        let (cloud, _) = io::load_scan(scan)?;
        let label_set = io::load_labels(label_path, &cloud)?;
        let classes = match method {
            Method::Pipeline => {
                let result = segmenter.segment(&cloud)?;
                manifest.frame_total_us.push(result.timing.total_us);
                if stats_csv {
                    stats.push((stem(scan), segmenter.state().threshold_rows()));
                }
                result.classes
            }
            Method::Ransac => ransac_baseline(
                &cloud,
                &RansacParams {
                    seed,
                    ..RansacParams::default()
                },
            ),
            Method::Oracle => oracle_classes(&label_set, &mask),
        };
        let metrics = evaluate(&classes, &label_set, &mask)?;
        if let (Some(dir), true) = (output, export_ply) {
            let ply_path = dir.join(format!("{}.ply", stem(scan)));
            io::export_ply(&cloud, &classes, Some((&label_set, &mask)), &ply_path)?;
            manifest.outputs.push(ply_path.display().to_string());
        }
        manifest.inputs.push(scan.display().to_string());
        manifest.inputs.push(label_path.display().to_string());
        rows.push((stem(scan), metrics));
    }
    let summary = summarize(&rows.iter().map(|(_, m)| m.clone()).collect::<Vec<_>>())?;
    println!(
        "frames  precision          recall             f1                 accuracy"
    );
    println!(
        "{:<7} {:.4} \u{b1} {:.4}    {:.4} \u{b1} {:.4}    {:.4} \u{b1} {:.4}    {:.4} \u{b1} {:.4}",
        summary.frames,
        summary.precision.mean,
        summary.precision.stdev,
        summary.recall.mean,
        summary.recall.stdev,
        summary.f1.mean,
        summary.f1.stdev,
        summary.accuracy.mean,
        summary.accuracy.stdev
    );
    if let Some(dir) = output {
        let metrics_path = dir.join("metrics.csv");
        fs::write(&metrics_path, metrics_csv(&rows))
            .with_context(|| format!("writing {}", metrics_path.display()))?;
        manifest.outputs.push(metrics_path.display().to_string());
        if stats_csv && !stats.is_empty() {
            let path = dir.join("thresholds.csv");
            fs::write(&path, threshold_stats_csv(&stats))
                .with_context(|| format!("writing {}", path.display()))?;
            manifest.outputs.push(path.display().to_string());
        }
        manifest.write(dir)?;
    }
    Ok(())
}

/// Perfect predictions derived from the labels themselves.
fn oracle_classes(labels: &LabelSet, mask: &ClassMask) -> Vec<PointClass> {
    labels
        .ids()
        .iter()
        .map(|&id| {
            if mask.is_ground(id) {
                PointClass::Ground
            } else {
                PointClass::NonGround
            }
        })
        .collect()
}

fn median_of(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn cmd_bench(
    scan_dir: &Path,
    repetitions: usize,
    flags: &PipelineFlags,
    output: Option<&Path>,
) -> Result<()> {
    let (config, source) = flags.resolve()?;
    let scans = list_frames(scan_dir, "bin")?;
    let repetitions = repetitions.max(1);
    let mut clouds = Vec::with_capacity(scans.len());
    for scan in &scans {
        clouds.push(io::load_scan(scan)?.0);
    }
    let mut totals_ms: Vec<f64> = Vec::new();
    let mut stage_us: [Vec<f64>; 4] = Default::default();
    let mut manifest = RunManifest::new("bench", &config, &source);
    for _ in 0..repetitions {
        // Fresh state per repetition so every pass does identical work.
        let mut segmenter = Segmenter::new(config.clone())?;
        for cloud in &clouds {
            let result = segmenter.segment(cloud)?;
            let t = result.timing;
            totals_ms.push(t.total_us as f64 / 1e3);
            stage_us[0].push(t.noise_us as f64);
            stage_us[1].push(t.partition_us as f64);
            stage_us[2].push(t.bins_us as f64);
            stage_us[3].push(t.adapt_us as f64);
            manifest.frame_total_us.push(t.total_us);
        }
    }
    let median_ms = median_of(totals_ms);
    let hz = if median_ms > 0.0 { 1e3 / median_ms } else { f64::INFINITY };
    let points_median = {
        let mut sizes: Vec<f64> = clouds.iter().map(|c| c.len() as f64).collect();
        sizes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sizes[sizes.len() / 2]
    };
    println!(
        "{} frames, {:.0} points median, {} repetitions",
        clouds.len(),
        points_median,
        repetitions
    );
    println!("median frame time: {median_ms:.2} ms ({hz:.1} Hz)");
    println!(
        "stage medians: noise {:.0} us, partition {:.0} us, bins {:.0} us, adapt {:.0} us",
        median_of(stage_us[0].clone()),
        median_of(stage_us[1].clone()),
        median_of(stage_us[2].clone()),
        median_of(stage_us[3].clone())
    );
    let largest = clouds
        .iter()
        .max_by_key(|c| c.len())
        .expect("non-empty frame list");
    let sort_report = czm::sort_strategy_bench(largest, &config.zones, repetitions)?;
    println!(
        "bin sorting at n={}: bin-wise {:.2} ms, global {:.2} ms, identical: {}",
        largest.len(),
        sort_report.binwise_sort_ms,
        sort_report.global_sort_ms,
        sort_report.identical
    );
    if let Some(dir) = output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        manifest.inputs = scans.iter().map(|p| p.display().to_string()).collect();
        manifest.write(dir)?;
    }
    Ok(())
}

fn cmd_synth(spec_path: &Path, frames: usize, seed: u64, output: &Path) -> Result<()> {
    let text = fs::read_to_string(spec_path)
        .with_context(|| format!("reading scene description {}", spec_path.display()))?;
    let spec = SceneSpec::parse(&text)?;
    fs::create_dir_all(output)
        .with_context(|| format!("creating {}", output.display()))?;
    let mut manifest = RunManifest::new("synth", &PipelineConfig::default(), "defaults");
    manifest.config_text = text.clone();
    manifest.config_source = spec_path.display().to_string();
    for frame in 0..frames {
        let frame_seed = seed + frame as u64;
        let generated = generate_scene(&spec, frame_seed)?;
        for warning in &generated.warnings {
            eprintln!("frame {frame}: {warning}");
        }
        let scan_path = output.join(format!("{frame:06}.bin"));
        let label_path = output.join(format!("{frame:06}.label"));
        io::write_scan(&generated.cloud, &scan_path)?;
        let labels = LabelSet::new(generated.labels);
        io::write_labels(&labels, &label_path)?;
        manifest.seeds.push(frame_seed);
        manifest
            .outputs
            .push(scan_path.display().to_string());
        manifest.outputs.push(label_path.display().to_string());
    }
    manifest.write(output)?;
    println!("wrote {frames} frames to {}", output.display());
    Ok(())
}
