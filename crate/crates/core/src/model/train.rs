use serde::{Deserialize, Serialize};

use crate::augment::{augment_frame, AugmentKind, AugmentPreset};
use crate::error::{Error, Result};
use crate::imaging::{GroundTruth, Image};
use crate::num::Real;
use crate::rng::{mix64, RngStream};

use super::adam::{adam_step, AdamHyper, AdamState};
use super::features::{build_reference, extract_features, FeatureConfig, Reference};
use super::loss::class_weights;
use super::network::{batch_loss_and_gradient, ModelParams, PARAM_COUNT};

const INIT_STREAM: u64 = 0x1A17;
const AUGMENT_TAG: u64 = 0xA06D_E27A_11CE_0001;

/// Optimizer, schedule and data settings of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lr: f64,
    pub plateau_factor: f64,
    pub plateau_patience: u32,
    pub early_stop_patience: u32,
    /// Relative loss decrease below which an epoch counts as no improvement.
    pub min_rel_improvement: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Frames per optimizer step; only 1 is supported.
    pub batch: usize,
    pub max_epochs: u32,
    pub reference_frames: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            plateau_factor: 0.1,
            plateau_patience: 2,
            early_stop_patience: 5,
            min_rel_improvement: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            batch: 1,
            max_epochs: 50,
            reference_frames: FeatureConfig::default().reference_frames,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr", self.lr),
            ("plateau_factor", self.plateau_factor),
            ("adam_eps", self.adam_eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.plateau_factor >= 1.0 {
            return Err(Error::Invalid("plateau_factor must be below 1".into()));
        }
        for (name, b) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Invalid(format!(
                    "{name} must lie in [0, 1), got {b}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.min_rel_improvement) {
            return Err(Error::Invalid(
                "min_rel_improvement must lie in [0, 1)".into(),
            ));
        }
        if self.plateau_patience == 0 || self.early_stop_patience == 0 || self.max_epochs == 0 {
            return Err(Error::Invalid(
                "patience and epoch limits must be positive".into(),
            ));
        }
        if self.batch != 1 {
            return Err(Error::Invalid(format!(
                "batch size {} unsupported; use 1",
                self.batch
            )));
        }
        if self.reference_frames == 0 {
            return Err(Error::Invalid("reference_frames must be at least 1".into()));
        }
        Ok(())
    }

    fn hyper(&self, lr: f64) -> AdamHyper {
        AdamHyper {
            lr,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// What the schedule decided after an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpochVerdict {
    pub improved: bool,
    pub lr_reduced: bool,
    pub stop: bool,
}

/// Reduce-on-plateau learning rate plus early stopping, both keyed on the
/// epoch loss.
#[derive(Clone, Debug)]
pub struct PlateauSchedule {
    lr: f64,
    factor: f64,
    plateau_patience: u32,
    stop_patience: u32,
    min_rel: f64,
    best: f64,
    plateau_wait: u32,
    stop_wait: u32,
}

impl PlateauSchedule {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.lr,
            factor: cfg.plateau_factor,
            plateau_patience: cfg.plateau_patience,
            stop_patience: cfg.early_stop_patience,
            min_rel: cfg.min_rel_improvement,
            best: f64::INFINITY,
            plateau_wait: 0,
            stop_wait: 0,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn observe(&mut self, loss: f64) -> EpochVerdict {
        let improved = loss.is_finite()
            && (self.best.is_infinite() || loss < self.best - self.min_rel * self.best.abs());
        let mut lr_reduced = false;
        if improved {
            self.best = loss;
            self.plateau_wait = 0;
            self.stop_wait = 0;
        } else {
            self.plateau_wait += 1;
            self.stop_wait += 1;
            if self.plateau_wait >= self.plateau_patience {
                self.lr *= self.factor;
                self.plateau_wait = 0;
                lr_reduced = true;
            }
        }
        EpochVerdict {
            improved,
            lr_reduced,
            stop: self.stop_wait >= self.stop_patience,
        }
    }
}

/// One line of the training log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub version: u32,
    pub epoch: u32,
    pub loss: f64,
    pub lr: f64,
}

/// Trained weights plus the reference settings needed at inference.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel<T> {
    pub params: ModelParams<T>,
    pub features: FeatureConfig,
}

/// Fits the segmenter with one Adam step per frame.
///
/// Every frame passes through `preset` on each visit, drawing from stream
/// `(epoch << 32) | index` of a seed derived from `cfg.seed`. The reference
/// is built from the first `cfg.reference_frames` raw frames. Returns the
/// parameters of the epoch with the lowest mean loss.
pub fn train<T: Real>(
    frames: &[Image],
    gts: &[GroundTruth],
    cfg: &TrainConfig,
    preset: &AugmentPreset,
) -> Result<(TrainedModel<T>, Vec<EpochLog>)> {
    cfg.validate()?;
    if frames.is_empty() || frames.len() != gts.len() {
        return Err(Error::Invalid(format!(
            "need matching non-empty sequences, got {} frames and {} labels",
            frames.len(),
            gts.len()
        )));
    }
    for (f, g) in frames.iter().zip(gts) {
        if f.dims() != g.dims() || f.dims() != frames[0].dims() {
            return Err(Error::dims(frames[0].dims(), g.dims()));
        }
    }
    let reference: Reference<T> = build_reference(frames, cfg.reference_frames)?;
    let weights = class_weights::<T>(gts)?;

    let mut params = ModelParams::<T>::init(&mut RngStream::new(cfg.seed, INIT_STREAM));
    let mut best = params.clone();
    let mut state = AdamState::<T>::new(PARAM_COUNT);
    let mut schedule = PlateauSchedule::new(cfg);
    let augment_seed = mix64(cfg.seed ^ AUGMENT_TAG);
    let photometric = matches!(
        preset.kind,
        AugmentKind::Local | AugmentKind::Global | AugmentKind::Combined | AugmentKind::None
    );

    let mut log = Vec::new();
    let mut step = 0u64;
    for epoch in 0..cfg.max_epochs {
        let lr = schedule.lr();
        let hyper = cfg.hyper(lr);
        let mut total = 0.0f64;
        for (i, (frame, gt)) in frames.iter().zip(gts).enumerate() {
            let stream = ((epoch as u64) << 32) | i as u64;
            let mut rng = RngStream::new(augment_seed, stream);
            let (input, labels, _) = augment_frame(frame, gt, preset, &mut rng)?;
            debug_assert!(!photometric || labels == *gt);
            let features = extract_features(&input, &reference)?;
            let (loss, grad) =
                batch_loss_and_gradient(&params, &features, labels.labels(), &weights)?;
            step += 1;
            adam_step(params.as_flat_mut(), &grad, &mut state, &hyper, step)?;
            total += loss.as_f64();
        }
        let mean = total / frames.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Invalid(format!(
                "loss diverged at epoch {}",
                epoch + 1
            )));
        }
        log.push(EpochLog {
            version: 1,
            epoch: epoch + 1,
            loss: mean,
            lr,
        });
        let verdict = schedule.observe(mean);
        if verdict.improved {
            best = params.clone();
        }
        if verdict.stop {
            break;
        }
    }
    Ok((
        TrainedModel {
            params: best,
            features: FeatureConfig {
                reference_frames: cfg.reference_frames,
            },
        },
        log,
    ))
}
