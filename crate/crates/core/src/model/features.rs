use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::num::Real;

/// Inputs per pixel: RGB, |frame - reference| per channel, 3x3 gray mean, bias.
pub const FEATURE_DIM: usize = 8;

pub type FeatureVector<T> = [T; FEATURE_DIM];

/// Background reference settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub reference_frames: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            reference_frames: 25,
        }
    }
}

/// Real-valued per-pixel background estimate on the 0..=255 scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference<T> {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<T>,
}

impl<T: Real> Reference<T> {
    pub fn from_image(img: &Image) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: img.channels(),
            values: img.data().iter().map(|&v| T::of(v as f64)).collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.values[(y * self.width + x) * self.channels + c]
    }
}

/// Per-sample median of the first `k` frames.
pub fn build_reference<T: Real>(frames: &[Image], k: usize) -> Result<Reference<T>> {
    if k == 0 || frames.len() < k {
        return Err(Error::InsufficientFrames {
            needed: k.max(1),
            got: frames.len(),
        });
    }
    let first = &frames[0];
    for f in &frames[1..k] {
        if f.dims() != first.dims() || f.channels() != first.channels() {
            return Err(Error::dims(first.dims(), f.dims()));
        }
    }
    let n = first.data().len();
    let mut column = Vec::with_capacity(k);
    let values = (0..n)
        .map(|i| {
            column.clear();
            column.extend(frames[..k].iter().map(|f| f.data()[i]));
            column.sort_unstable();
            let mid = k / 2;
            if k % 2 == 1 {
                T::of(column[mid] as f64)
            } else {
                T::of((column[mid - 1] as f64 + column[mid] as f64) / 2.0)
            }
        })
        .collect();
    Ok(Reference {
        width: first.width(),
        height: first.height(),
        channels: first.channels(),
        values,
    })
}

fn rgb(img: &Image, x: usize, y: usize) -> [f64; 3] {
    let px = img.pixel(x, y);
    if px.len() == 1 {
        [px[0] as f64; 3]
    } else {
        [px[0] as f64, px[1] as f64, px[2] as f64]
    }
}

/// Feature vectors for every pixel, row-major.
pub fn extract_features<T: Real>(
    frame: &Image,
    reference: &Reference<T>,
) -> Result<Vec<FeatureVector<T>>> {
    if frame.dims() != reference.dims() {
        return Err(Error::dims(reference.dims(), frame.dims()));
    }
    if frame.channels() != reference.channels() {
        return Err(Error::ShapeMismatch(format!(
            "frame has {} channels, reference {}",
            frame.channels(),
            reference.channels()
        )));
    }
    let (w, h) = frame.dims();
    let gray: Vec<f64> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| frame.gray(x, y))
        .collect();
    let inv = T::of(1.0 / 255.0);
    let ninth = T::of(1.0 / 9.0);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let px = rgb(frame, x, y);
            let mut f = [T::zero(); FEATURE_DIM];
            for c in 0..3 {
                let rc = if reference.channels() == 1 { 0 } else { c };
                let v = T::of(px[c]);
                f[c] = v * inv;
                f[3 + c] = (v - reference.get(x, y, rc)).abs() * inv;
            }
            let mut sum = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    sum += gray[sy * w + sx];
                }
            }
            f[6] = T::of(sum) * ninth * inv;
            f[7] = T::one();
            out.push(f);
        }
    }
    Ok(out)
}
