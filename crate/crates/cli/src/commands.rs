//! The five subcommands as library functions.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use illumaug::augment::{
    apply_local, augment_sequence, build_m1, build_m2, preset_by_name, AugmentPreset,
    AugmentRecord, LocalMaskSpec, Sign, PRESET_NAMES,
};
use illumaug::metrics::{
    best_threshold, default_thresholds, sweep_thresholds, write_sweep_csv, ProbabilityMap,
    ThresholdReport,
};
use illumaug::model::{
    build_reference, predict, read_model, train, write_model, EpochLog, TrainedModel,
};
use illumaug::scenes::{
    self, background_albedo, frame_name, generate, gt_name, load_manifest, FrameEntry, Scenario,
    SceneConfig, SequenceManifest, MANIFEST_FILE, MANIFEST_VERSION,
};
use illumaug::{read_image, write_ground_truth, write_image, FloatMask, Image};

use crate::config::ExperimentConfig;
use crate::error::{CmdResult, Failure};

pub const FORMAT_VERSION: u32 = 1;
pub const RECORDS_FILE: &str = "records.jsonl";
pub const MODEL_FILE: &str = "model.json";
pub const LOG_FILE: &str = "train_log.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const SWEEP_FILE: &str = "sweep.csv";

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn lookup_preset(name: &str) -> CmdResult<AugmentPreset> {
    preset_by_name(name).ok_or_else(|| {
        Failure::usage(format!(
            "unknown preset {name:?}; valid presets: {}",
            PRESET_NAMES.join(", ")
        ))
    })
}

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub seed: u64,
    pub dims: Option<(usize, usize)>,
    pub n_frames: Option<usize>,
}

/// Generates a synthetic sequence; returns the manifest path.
pub fn cmd_synth(opts: &SynthOptions) -> CmdResult<PathBuf> {
    let mut cfg = SceneConfig::for_scenario(opts.scenario, opts.seed);
    if let Some((w, h)) = opts.dims {
        let (sx, sy) = (w as f64 / cfg.width as f64, h as f64 / cfg.height as f64);
        let r = cfg.lamp_region;
        cfg.lamp_region = scenes::Rect {
            x: (r.x as f64 * sx) as usize,
            y: (r.y as f64 * sy) as usize,
            width: ((r.width as f64 * sx) as usize).max(1),
            height: ((r.height as f64 * sy) as usize).max(1),
        };
        cfg.width = w;
        cfg.height = h;
        let side = w.min(h);
        if 2 * cfg.object.size_range.1 + 1 > side {
            let hi = ((side.saturating_sub(1)) / 2).max(1);
            cfg.object.size_range = (cfg.object.size_range.0.min(hi), hi);
        }
    }
    if let Some(n) = opts.n_frames {
        cfg.n_frames = n;
    }
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    create_dir(&opts.out)?;
    generate(&cfg, &opts.out)?;
    Ok(opts.out.join(MANIFEST_FILE))
}

#[derive(Clone, Debug)]
pub struct AugmentOptions {
    pub manifest: PathBuf,
    pub preset: String,
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentSummary {
    pub frames: usize,
    pub applied: usize,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct RecordLine<'a> {
    version: u32,
    frame: usize,
    #[serde(flatten)]
    record: &'a AugmentRecord,
}

/// Augments every frame of a sequence once and writes the result as a new
/// sequence plus one JSON record per frame.
pub fn cmd_augment(opts: &AugmentOptions) -> CmdResult<AugmentSummary> {
    let preset = lookup_preset(&opts.preset)?;
    let seq = load_manifest(&opts.manifest)?;
    let frames = seq.load_all()?;
    let outputs = augment_sequence(&frames, &preset, opts.seed)?;

    for sub in ["frames", "gt"] {
        create_dir(&opts.out.join(sub))?;
    }
    let entries: Vec<FrameEntry> = outputs
        .par_iter()
        .zip(frames.par_iter())
        .enumerate()
        .map(
            |(i, ((img, gt, _), (src_img, src_gt)))| -> CmdResult<FrameEntry> {
                let entry = FrameEntry {
                    img: frame_name(i),
                    gt: gt_name(i),
                };
                let (img_out, gt_out) = (opts.out.join(&entry.img), opts.out.join(&entry.gt));
                // Untouched frames keep their original bytes.
                if img == src_img {
                    fs::copy(seq.frame_path(i), &img_out)
                        .with_context(|| format!("copying frame {i} to {}", img_out.display()))?;
                } else {
                    write_image(img, &img_out)?;
                }
                if gt == src_gt {
                    fs::copy(seq.gt_path(i), &gt_out)
                        .with_context(|| format!("copying labels {i} to {}", gt_out.display()))?;
                } else {
                    write_ground_truth(gt, &gt_out)?;
                }
                Ok(entry)
            },
        )
        .collect::<CmdResult<_>>()?;

    let manifest_path = opts.out.join(MANIFEST_FILE);
    SequenceManifest {
        version: MANIFEST_VERSION,
        config: None,
        frames: entries,
    }
    .write(&manifest_path)?;

    let records_path = opts.out.join(RECORDS_FILE);
    let file = fs::File::create(&records_path)
        .with_context(|| format!("creating {}", records_path.display()))?;
    let mut w = BufWriter::new(file);
    for (i, (_, _, record)) in outputs.iter().enumerate() {
        let line = RecordLine {
            version: FORMAT_VERSION,
            frame: i,
            record,
        };
        serde_json::to_writer(&mut w, &line).context("serializing record")?;
        w.write_all(b"\n").context("writing records")?;
    }
    w.flush()
        .with_context(|| format!("writing {}", records_path.display()))?;

    Ok(AugmentSummary {
        frames: outputs.len(),
        applied: outputs.iter().filter(|(_, _, r)| r.applied).count(),
        manifest: manifest_path,
    })
}

/// Flags that override an experiment config.
#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    pub config: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub max_epochs: Option<u32>,
    pub lr: Option<f64>,
    pub reference_frames: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TrainSummary {
    pub model: PathBuf,
    pub log: PathBuf,
    pub epochs: Vec<EpochLog>,
}

fn load_config(path: &Option<PathBuf>) -> CmdResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Trains one model on a sequence; writes the model and the epoch log.
pub fn cmd_train(opts: &TrainOptions) -> CmdResult<TrainSummary> {
    let mut cfg = load_config(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.train.seed = seed;
    } else if !cfg.seed_given {
        return Err(Failure::usage(
            "a seed is required: pass --seed or set [train] seed",
        ));
    }
    if let Some(v) = opts.max_epochs {
        cfg.train.max_epochs = v;
    }
    if let Some(v) = opts.lr {
        cfg.train.lr = v;
    }
    if let Some(v) = opts.reference_frames {
        cfg.train.reference_frames = v;
    }
    let train_path = opts
        .train
        .clone()
        .or(cfg.data.train.clone())
        .ok_or_else(|| Failure::usage("no training manifest: pass --train or set [data] train"))?;
    let out = opts
        .out
        .clone()
        .or(cfg.data.out.clone())
        .ok_or_else(|| Failure::usage("no output directory: pass --out or set [data] out"))?;
    let preset_name = opts
        .preset
        .clone()
        .or(cfg.augment.preset.clone())
        .unwrap_or_else(|| "baseline".to_string());
    let preset = lookup_preset(&preset_name)?;
    cfg.train
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;

    let seq = load_manifest(&train_path)?;
    let (frames, gts): (Vec<_>, Vec<_>) = seq.load_all()?.into_iter().unzip();
    let (model, log) = train::<f64>(&frames, &gts, &cfg.train, &preset)?;

    create_dir(&out)?;
    let model_path = out.join(MODEL_FILE);
    write_model(&model, &model_path)?;
    let log_path = out.join(LOG_FILE);
    let mut text = String::new();
    for entry in &log {
        text.push_str(&serde_json::to_string(entry).context("serializing log")?);
        text.push('\n');
    }
    fs::write(&log_path, text).with_context(|| format!("writing {}", log_path.display()))?;
    Ok(TrainSummary {
        model: model_path,
        log: log_path,
        epochs: log,
    })
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    pub config: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub version: u32,
    pub best: ThresholdReport<f64>,
    pub sweep: Vec<ThresholdReport<f64>>,
}

/// Scores a model on a labelled sequence over a threshold grid.
pub fn cmd_eval(opts: &EvalOptions) -> CmdResult<EvalReport> {
    let cfg = load_config(&opts.config)?;
    let out = opts.out.clone().or(cfg.data.out.clone());
    let model_path = opts
        .model
        .clone()
        .or(cfg.data.model.clone())
        .or_else(|| cfg.data.out.as_ref().map(|o| o.join(MODEL_FILE)))
        .ok_or_else(|| Failure::usage("no model: pass --model or set [data] model"))?;
    let test_path = opts
        .test
        .clone()
        .or(cfg.data.test.clone())
        .ok_or_else(|| Failure::usage("no test manifest: pass --test or set [data] test"))?;
    let thresholds = opts
        .thresholds
        .clone()
        .or(cfg.eval.thresholds.clone())
        .unwrap_or_else(default_thresholds::<f64>);
    if thresholds.is_empty() || thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Failure::usage(
            "thresholds must be a non-empty list of values in [0, 1]",
        ));
    }

    let model: TrainedModel<f64> = read_model(&model_path)?;
    let seq = load_manifest(&test_path)?;
    let (frames, gts): (Vec<_>, Vec<_>) = seq.load_all()?.into_iter().unzip();
    let reference = build_reference::<f64>(&frames, model.features.reference_frames)?;
    let preds: Vec<ProbabilityMap<f64>> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            predict(&model.params, f, &reference)
                .with_context(|| format!("frame {i} ({})", seq.frame_path(i).display()))
        })
        .collect::<anyhow::Result<_>>()?;
    let sweep = sweep_thresholds(&preds, &gts, &thresholds)?;
    let best = best_threshold(&sweep).expect("non-empty sweep");
    let report = EvalReport {
        version: FORMAT_VERSION,
        best,
        sweep,
    };

    if let Some(out) = out {
        create_dir(&out)?;
        let mut text = serde_json::to_string_pretty(&report).context("serializing metrics")?;
        text.push('\n');
        let metrics_path = out.join(METRICS_FILE);
        fs::write(&metrics_path, text)
            .with_context(|| format!("writing {}", metrics_path.display()))?;
        let csv_path = out.join(SWEEP_FILE);
        let file = fs::File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        write_sweep_csv(&report.sweep, BufWriter::new(file))?;
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct DemoMaskOptions {
    pub input: Option<PathBuf>,
    pub dims: (usize, usize),
    pub center: (usize, usize),
    pub d: usize,
    pub z: u32,
    pub sign: Sign,
    pub out: PathBuf,
}

#[derive(Clone, Debug)]
pub struct DemoMaskOutputs {
    pub m1: PathBuf,
    pub m2: PathBuf,
    pub original: PathBuf,
    pub after: PathBuf,
}

/// Textured stand-in frame used when no input image is given.
pub fn demo_background(dims: (usize, usize)) -> Image {
    let cfg = SceneConfig {
        width: dims.0,
        height: dims.1,
        n_frames: 1,
        ..SceneConfig::darkening(0)
    };
    let albedo = background_albedo(&cfg);
    Image::from_fn(dims.0, dims.1, 3, |x, y, c| {
        albedo[y * dims.0 + x][c].round() as u8
    })
}

/// Writes the binary disc, its attenuation mask, and the frame before and
/// after the local effect.
pub fn cmd_demo_mask(opts: &DemoMaskOptions) -> CmdResult<DemoMaskOutputs> {
    if opts.z > 255 {
        return Err(Failure::usage(format!("z {} outside [0, 255]", opts.z)));
    }
    let original = match &opts.input {
        Some(p) => read_image(p)?,
        None => {
            if opts.dims.0 == 0 || opts.dims.1 == 0 {
                return Err(Failure::usage("dimensions must be positive"));
            }
            demo_background(opts.dims)
        }
    };
    let spec = LocalMaskSpec {
        center: opts.center,
        radius: opts.d,
    };
    spec.validate(original.dims())
        .map_err(|e| Failure::usage(e.to_string()))?;
    let m1 = build_m1(&spec, original.dims());
    let m2: FloatMask = build_m2(&m1)?;
    let after = if opts.z == 0 {
        original.clone()
    } else {
        apply_local(&original, &m2, opts.z, opts.sign)?
    };

    create_dir(&opts.out)?;
    let outputs = DemoMaskOutputs {
        m1: opts.out.join("m1.png"),
        m2: opts.out.join("m2.png"),
        original: opts.out.join("original.png"),
        after: opts.out.join("after.png"),
    };
    write_image(&m1.to_image(), &outputs.m1)?;
    write_image(&m2.to_image(), &outputs.m2)?;
    write_image(&original, &outputs.original)?;
    write_image(&after, &outputs.after)?;
    Ok(outputs)
}
