// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use camloc_core::calib::{
    apply_calibration, cast_presence, ensemble_mean, fit_logit_shift, CalibrationTable,
};
use camloc_core::cam2box::{localize_frame, LocalizeConfig, LocalizeWarning, ThresholdMode};
use camloc_core::metrics::{mean_ap, EvalConfig, EvalReport};
use camloc_core::trackfuse::{bootstrap_round, track_sequence, FuseConfig};
use camloc_core::{FrameDetections, HeatmapStack, LabelMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::detections::{class_names, DetectionsFile};
use crate::error::CliError;
use crate::synth::{synth_scenes, SynthConfig};
use crate::{camt, tables};

#[derive(Debug, Parser)]
#[command(
    name = "camloc",
    version,
    about = "Heatmap localization, calibration, tracking and scoring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic heatmap video and its ground-truth boxes.
    Synth(SynthArgs),
    /// Turn class activation maps into boxes.
    Localize(LocalizeArgs),
    /// Fit per-class logit shifts on a validation set.
    Calibrate(CalibrateArgs),
    /// Cast (optionally shifted and ensembled) logits to presence labels.
    Classify(ClassifyArgs),
    /// Fuse per-frame detections with Kalman tracks.
    Track(TrackArgs),
    /// Gate machine-generated boxes by score and reference overlap.
    PseudoLabel(PseudoArgs),
    /// Score predicted boxes against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Heatmap output (CAMT).
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth boxes output (JSON).
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub frames: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 3)]
    pub blobs: usize,
    #[arg(long, default_value_t = 6.0)]
    pub blob_sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0.0)]
    pub drop_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub label_noise: f64,
    #[arg(long, default_value_t = 96)]
    pub height: usize,
    #[arg(long, default_value_t = 96)]
    pub width: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Otsu,
    Fixed,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub cams: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Otsu)]
    pub method: Method,
    /// Threshold on the normalized map for `--method fixed`.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub presence_thresh: f64,
    #[arg(long, default_value_t = 4)]
    pub min_area: usize,
    #[arg(long, default_value_t = 0.5)]
    pub dedup_iou: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub logits: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Shift table output (CSV).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// One file per model; probabilities are averaged across models.
    #[arg(long, required = true)]
    pub logits: Vec<PathBuf>,
    /// Shift tables, one per `--logits` file, in the same order.
    #[arg(long)]
    pub shifts: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    pub fuse_weight: f64,
    #[arg(long, default_value_t = 0.3)]
    pub match_iou: f64,
    #[arg(long, default_value_t = 5)]
    pub max_misses: u32,
}

#[derive(Debug, Args)]
pub struct PseudoArgs {
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub iou_min: f64,
    #[arg(long, default_value_t = 0.7)]
    pub score_min: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => run_synth(a),
        Command::Localize(a) => run_localize(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Classify(a) => run_classify(a),
        Command::Track(a) => run_track(a),
        Command::PseudoLabel(a) => run_pseudo(a),
        Command::Eval(a) => run_eval(a),
    }
}

pub fn run_synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg = SynthConfig {
        frames: a.frames,
        classes: a.classes,
        blobs_per_frame: a.blobs,
        blob_sigma: a.blob_sigma,
        noise_std: a.noise_std,
        drop_rate: a.drop_rate,
        seed: a.seed,
        height: a.height,
        width: a.width,
        label_noise: a.label_noise,
    };
    let scene = synth_scenes(&cfg)?;
    camt::write(&a.out, &scene.heatmaps)?;
    DetectionsFile::from_frames(class_names(cfg.classes), &scene.truth).write(&a.gt)
}

/// Localizes every frame in parallel; output order follows frame order.
pub fn localize_all(
    stack: &HeatmapStack<f64>,
    cfg: &LocalizeConfig<f64>,
) -> Result<(Vec<FrameDetections<f64>>, Vec<LocalizeWarning>), CliError> {
    let results = (0..stack.frames())
        .into_par_iter()
        .map(|i| localize_frame(i as u64, stack.frame(i), cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut frames = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for r in results {
        frames.push(r.detections);
        warnings.extend(r.warnings);
    }
    Ok((frames, warnings))
}

pub fn run_localize(a: LocalizeArgs) -> Result<(), CliError> {
    let stack = camt::read(&a.cams)?.cast::<f64>();
    let cfg = LocalizeConfig {
        threshold_mode: match a.method {
            Method::Otsu => ThresholdMode::Otsu,
            Method::Fixed => ThresholdMode::Fixed(a.sigma),
        },
        presence_threshold: a.presence_thresh,
        min_component_area: a.min_area,
        dedup_iou: a.dedup_iou,
        ..LocalizeConfig::default()
    };
    cfg.validate()?;
    let (frames, warnings) = localize_all(&stack, &cfg)?;
    if !warnings.is_empty() {
        eprintln!(
            "{} class maps were constant and produced no boxes",
            warnings.len()
        );
    }
    DetectionsFile::from_frames(class_names(stack.classes()), &frames).write(&a.out)
}

pub fn run_calibrate(a: CalibrateArgs) -> Result<(), CliError> {
    let logits = tables::read_real(&a.logits)?;
    let labels = tables::read_labels(&a.labels)?;
    let fit = fit_logit_shift(&logits, &labels)?;
    for c in &fit.classes_without_positives {
        eprintln!("class_{c} has no positive labels; its shift stays 0");
    }
    for (c, (shift, f1)) in fit.table.shifts().iter().zip(&fit.best_f1).enumerate() {
        println!("class_{c}\tshift {shift:.6}\tF1 {f1:.4}");
    }
    tables::write_shifts(&a.out, &fit.table)
}

pub fn run_classify(a: ClassifyArgs) -> Result<(), CliError> {
    if !a.shifts.is_empty() && a.shifts.len() != a.logits.len() {
        return Err(CliError::Input(format!(
            "{} shift tables for {} logit files",
            a.shifts.len(),
            a.logits.len()
        )));
    }
    let mut probs = Vec::with_capacity(a.logits.len());
    for (i, path) in a.logits.iter().enumerate() {
        let logits = tables::read_real(path)?;
        let table = match a.shifts.get(i) {
            Some(s) => tables::read_shifts(s)?,
            None => CalibrationTable::zeros(logits.classes()),
        };
        probs.push(apply_calibration(&logits, &table)?);
    }
    let mean = ensemble_mean(&probs)?;
    let cast: Vec<bool> = (0..mean.samples())
        .flat_map(|n| cast_presence(mean.row(n), 0.5))
        .collect();
    tables::write_labels(&a.out, &LabelMatrix::new(mean.samples(), mean.classes(), cast)?)
}

pub fn run_track(a: TrackArgs) -> Result<(), CliError> {
    let file = DetectionsFile::read(&a.dets)?;
    let frames = file.to_frames()?;
    let cfg = FuseConfig {
        det_weight: a.fuse_weight,
        match_iou: a.match_iou,
        max_misses: a.max_misses,
        ..FuseConfig::default()
    };
    let tracked = track_sequence(&frames, &cfg)?;
    DetectionsFile::from_frames(file.classes, &tracked).write(&a.out)
}

pub fn run_pseudo(a: PseudoArgs) -> Result<(), CliError> {
    let dets = DetectionsFile::read(&a.dets)?;
    let refs = DetectionsFile::read(&a.refs)?;
    let round = bootstrap_round(&dets.to_frames()?, &refs.to_frames()?, a.iou_min, a.score_min)?;
    println!(
        "{:<10} {:>10} {:>10} {:>10}",
        "class", "candidates", "scored", "accepted"
    );
    for (c, s) in &round.stats {
        println!(
            "{:<10} {:>10} {:>10} {:>10}",
            c, s.candidates, s.passed_score, s.accepted
        );
    }
    DetectionsFile::from_frames(dets.classes, &round.accepted).write(&a.out)
}

#[derive(Debug, Serialize)]
struct ReportJson {
    classes: Vec<String>,
    mean_ap: f64,
    mean_f1: Option<f64>,
    recall: f64,
    per_class: Vec<ClassJson>,
}

#[derive(Debug, Serialize)]
struct ClassJson {
    class_id: usize,
    name: String,
    ap: Option<f64>,
    f1: Option<f64>,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
}

fn report_json(names: Vec<String>, report: &EvalReport<f64>) -> ReportJson {
    let per_class = (0..report.per_class_ap.len())
        .map(|c| ClassJson {
            class_id: c,
            name: names.get(c).cloned().unwrap_or_else(|| format!("class_{c}")),
            ap: report.per_class_ap[c],
            f1: report.per_class_f1[c],
            tp: report.counts[c].tp,
            fp: report.counts[c].fp,
            fn_: report.counts[c].fn_,
        })
        .collect();
    ReportJson {
        classes: names,
        mean_ap: report.mean_ap,
        mean_f1: report.mean_f1,
        recall: report.recall(),
        per_class,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

pub fn run_eval(a: EvalArgs) -> Result<(), CliError> {
    let pred = DetectionsFile::read(&a.pred)?;
    let gt = DetectionsFile::read(&a.gt)?;
    let cfg = EvalConfig {
        iou_match: a.iou,
        num_classes: Some(pred.num_classes().max(gt.num_classes())),
        ..EvalConfig::default()
    };
    let report = mean_ap(&pred.to_frames()?, &gt.to_frames()?, &cfg)?;
    let names = if gt.classes.is_empty() {
        pred.classes.clone()
    } else {
        gt.classes.clone()
    };
    let json = report_json(names, &report);
    let text = serde_json::to_string_pretty(&json).expect("report serializes") + "\n";
    if let Some(out) = &a.out {
        std::fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());

    let by_class: BTreeMap<usize, &ClassJson> = json.per_class.iter().map(|c| (c.class_id, c)).collect();
    eprintln!(
        "{:<12} {:>8} {:>8} {:>6} {:>6} {:>6}",
        "class", "AP", "F1", "TP", "FP", "FN"
    );
    for c in by_class.values() {
        eprintln!(
            "{:<12} {:>8} {:>8} {:>6} {:>6} {:>6}",
            c.name,
            fmt_opt(c.ap),
            fmt_opt(c.f1),
            c.tp,
            c.fp,
            c.fn_
        );
    }
    eprintln!(
        "{:<12} {:>8} {:>8}",
        "mean",
        format!("{:.4}", json.mean_ap),
        fmt_opt(json.mean_f1)
    );
    Ok(())
}
