//! Illumination augmentation: local lamp/shadow discs, global brightness
//! shifts, their combination, and the conventional geometric/noise
//! augmenter, all driven by explicit [`RngStream`]s.

mod common;
mod global;
mod local;
mod preset;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{FloatMask, GroundTruth, Image};
use crate::rng::RngStream;

pub use common::{
    apply_default, apply_default_with, center_crop_resize, mirror_gt, mirror_image,
    salt_and_pepper, DefaultDraws, CROP_SCALE_RANGE, NOISE_AMOUNT,
};
pub use global::{apply_combined, apply_global};
pub use local::{apply_local, build_m1, build_m2, sample_local_spec, LocalMaskSpec};
pub use preset::{
    preset_by_name, preset_registry, AugmentKind, AugmentPreset, APPLY_PROB, PRESET_NAMES,
};

/// Direction of an intensity change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn draw(rng: &mut RngStream) -> Self {
        if rng.sign() > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value() as i8
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

#[inline]
pub(crate) fn clamp_u8(v: i32) -> u8 {
    v.clamp(0, 255) as u8
}

/// Every draw made while augmenting one frame; enough to replay it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    pub preset: String,
    pub applied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_local: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_global: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_local: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_global: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common: Option<DefaultDraws>,
}

impl AugmentRecord {
    fn skipped(preset: &str) -> Self {
        Self {
            preset: preset.to_string(),
            ..Default::default()
        }
    }

    /// Re-applies the recorded transformation to the original frame.
    pub fn replay(&self, img: &Image, gt: &GroundTruth) -> Result<(Image, GroundTruth)> {
        if img.dims() != gt.dims() {
            return Err(Error::dims(img.dims(), gt.dims()));
        }
        if !self.applied {
            return Ok((img.clone(), gt.clone()));
        }
        if let Some(draws) = &self.common {
            return apply_default_with(img, gt, draws);
        }
        let mut out = img.clone();
        match (self.center, self.d, self.z_local, self.sign_local) {
            (Some(center), Some(radius), Some(z), Some(sign)) => {
                let spec = LocalMaskSpec { center, radius };
                spec.validate(img.dims())?;
                let m2: FloatMask<f64> = build_m2(&build_m1(&spec, img.dims()))?;
                out = apply_local(&out, &m2, z, sign)?;
            }
            (None, None, None, None) => {}
            _ => return Err(Error::Invalid("incomplete local record".into())),
        }
        match (self.z_global, self.sign_global) {
            (Some(z), Some(sign)) => out = apply_global(&out, z, sign)?,
            (None, None) => {}
            _ => return Err(Error::Invalid("incomplete global record".into())),
        }
        Ok((out, gt.clone()))
    }
}

const MIN_SIDE: usize = 8;

/// Augments one frame according to `preset`.
///
/// With probability `preset.apply_prob` the preset's transformation is drawn
/// from `rng` and applied; photometric kinds leave the labels untouched.
pub fn augment_frame(
    img: &Image,
    gt: &GroundTruth,
    preset: &AugmentPreset,
    rng: &mut RngStream,
) -> Result<(Image, GroundTruth, AugmentRecord)> {
    if img.dims() != gt.dims() {
        return Err(Error::dims(img.dims(), gt.dims()));
    }
    preset.validate().map_err(Error::Invalid)?;
    if preset.kind == AugmentKind::None || !rng.chance(preset.apply_prob) {
        return Ok((
            img.clone(),
            gt.clone(),
            AugmentRecord::skipped(&preset.name),
        ));
    }

    let dims = img.dims();
    let needs_disc = matches!(preset.kind, AugmentKind::Local | AugmentKind::Combined);
    if needs_disc && (dims.0 < MIN_SIDE || dims.1 < MIN_SIDE) {
        return Err(Error::Invalid(format!(
            "local effects need at least {MIN_SIDE}x{MIN_SIDE} pixels, got {}x{}",
            dims.0, dims.1
        )));
    }

    let mut record = AugmentRecord {
        preset: preset.name.clone(),
        applied: true,
        ..Default::default()
    };
    let draw_z =
        |rng: &mut RngStream, (lo, hi): (u32, u32)| rng.int_inclusive(lo as i64, hi as i64) as u32;
    if needs_disc {
        let spec = sample_local_spec(dims, preset.k_range, rng);
        record.center = Some(spec.center);
        record.d = Some(spec.radius);
        record.z_local = Some(draw_z(rng, preset.z_local_range));
        record.sign_local = Some(Sign::draw(rng));
    }
    if matches!(preset.kind, AugmentKind::Global | AugmentKind::Combined) {
        record.z_global = Some(draw_z(rng, preset.z_global_range));
        record.sign_global = Some(Sign::draw(rng));
    }
    if preset.kind == AugmentKind::Default {
        record.common = Some(DefaultDraws::sample(rng));
    }
    let (out, out_gt) = record.replay(img, gt)?;
    Ok((out, out_gt, record))
}

/// Augments a whole sequence in parallel; frame `i` uses stream `i` of
/// `master_seed`, so the result does not depend on the thread count.
pub fn augment_sequence(
    frames: &[(Image, GroundTruth)],
    preset: &AugmentPreset,
    master_seed: u64,
) -> Result<Vec<(Image, GroundTruth, AugmentRecord)>> {
    frames
        .par_iter()
        .enumerate()
        .map(|(i, (img, gt))| {
            let mut rng = RngStream::new(master_seed, i as u64);
            augment_frame(img, gt, preset, &mut rng)
        })
        .collect()
}
