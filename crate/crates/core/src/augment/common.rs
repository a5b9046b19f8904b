//! The conventional augmenter used as a comparison point: mirror, centre
//! crop and salt-and-pepper noise, each firing with probability 1/2.

use image::imageops::{self, FilterType};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GroundTruth, Image};
use crate::rng::RngStream;

pub const OP_PROBABILITY: f64 = 0.5;
pub const CROP_SCALE_RANGE: (f64, f64) = (0.7, 1.0);
pub const NOISE_AMOUNT: f64 = 0.05;

const NOISE_STREAM: u64 = 0x5A17_9E99_E2C4_0001;

/// Outcome of the three coin flips plus their parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefaultDraws {
    pub flip: bool,
    pub crop_scale: Option<f64>,
    pub noise_seed: Option<u64>,
}

impl DefaultDraws {
    pub fn sample(rng: &mut RngStream) -> Self {
        let flip = rng.chance(OP_PROBABILITY);
        let crop_scale = rng
            .chance(OP_PROBABILITY)
            .then(|| rng.real_in(CROP_SCALE_RANGE.0, CROP_SCALE_RANGE.1));
        let noise_seed = rng.chance(OP_PROBABILITY).then(|| rng.next_seed());
        Self {
            flip,
            crop_scale,
            noise_seed,
        }
    }
}

pub fn apply_default(
    img: &Image,
    gt: &GroundTruth,
    rng: &mut RngStream,
) -> Result<(Image, GroundTruth)> {
    let draws = DefaultDraws::sample(rng);
    apply_default_with(img, gt, &draws)
}

/// Applies flip, then crop, then noise as dictated by `draws`.
pub fn apply_default_with(
    img: &Image,
    gt: &GroundTruth,
    draws: &DefaultDraws,
) -> Result<(Image, GroundTruth)> {
    if img.dims() != gt.dims() {
        return Err(Error::dims(img.dims(), gt.dims()));
    }
    let mut img = img.clone();
    let mut gt = gt.clone();
    if draws.flip {
        img = mirror_image(&img);
        gt = mirror_gt(&gt);
    }
    if let Some(scale) = draws.crop_scale {
        if !(CROP_SCALE_RANGE.0..=CROP_SCALE_RANGE.1).contains(&scale) {
            return Err(Error::Invalid(format!(
                "crop scale {scale} outside [0.7, 1]"
            )));
        }
        let (a, b) = center_crop_resize(&img, &gt, scale);
        img = a;
        gt = b;
    }
    if let Some(seed) = draws.noise_seed {
        img = salt_and_pepper(&img, NOISE_AMOUNT, seed);
    }
    Ok((img, gt))
}

pub fn mirror_image(img: &Image) -> Image {
    let w = img.width();
    Image::from_fn(w, img.height(), img.channels(), |x, y, c| {
        img.get(w - 1 - x, y, c)
    })
}

pub fn mirror_gt(gt: &GroundTruth) -> GroundTruth {
    let w = gt.width();
    GroundTruth::from_fn(w, gt.height(), |x, y| gt.get(w - 1 - x, y))
}

/// Centre crop to `scale` of each side, then resize back to the original
/// size: bilinear for the frame, nearest-neighbour for the labels.
pub fn center_crop_resize(img: &Image, gt: &GroundTruth, scale: f64) -> (Image, GroundTruth) {
    let (w, h) = img.dims();
    let cw = ((w as f64 * scale).round() as usize).clamp(1, w);
    let ch = ((h as f64 * scale).round() as usize).clamp(1, h);
    let (x0, y0) = ((w - cw) / 2, (h - ch) / 2);
    let (x0, y0, cw32, ch32) = (x0 as u32, y0 as u32, cw as u32, ch as u32);

    let frame = img.to_dynamic();
    let cropped = frame.crop_imm(x0, y0, cw32, ch32);
    let resized = cropped.resize_exact(w as u32, h as u32, FilterType::Triangle);
    let img = Image::from_dynamic(resized).expect("8-bit resize");

    let labels = gt.to_image().to_dynamic().into_luma8();
    let cropped = imageops::crop_imm(&labels, x0, y0, cw32, ch32).to_image();
    let resized = imageops::resize(&cropped, w as u32, h as u32, FilterType::Nearest);
    let gt = GroundTruth::from_fn(w, h, |x, y| {
        resized.get_pixel(x as u32, y as u32).0[0] >= 128
    });
    (img, gt)
}

/// Sets each pixel independently with probability `amount` to black or
/// white (equally likely), across all channels.
pub fn salt_and_pepper(img: &Image, amount: f64, seed: u64) -> Image {
    let mut rng = RngStream::new(seed, NOISE_STREAM);
    let channels = img.channels();
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(channels) {
        if rng.chance(amount) {
            let v = if rng.chance(0.5) { 255 } else { 0 };
            px.fill(v);
        }
    }
    out
}
