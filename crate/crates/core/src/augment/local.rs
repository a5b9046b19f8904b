//! Lamp-post and shadow effects: a random disc whose interior is brightened
//! or darkened with a falloff given by the distance transform.

use serde::{Deserialize, Serialize};

use crate::edt::edt;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, FloatMask, Image};
use crate::num::Real;
use crate::rng::RngStream;

use super::{clamp_u8, Sign};

/// Disc centre `(x, y)` and radius in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMaskSpec {
    pub center: (usize, usize),
    pub radius: usize,
}

impl LocalMaskSpec {
    /// Checks the centre lies in the image, the radius is positive, and the
    /// disc leaves at least one pixel uncovered.
    pub fn validate(&self, dims: (usize, usize)) -> Result<()> {
        let (w, h) = dims;
        let (cx, cy) = self.center;
        if cx >= w || cy >= h {
            return Err(Error::Invalid(format!(
                "centre ({cx}, {cy}) outside {w}x{h} image"
            )));
        }
        if self.radius == 0 {
            return Err(Error::Invalid("radius must be at least 1".into()));
        }
        if covers_image(self.center, self.radius, dims) {
            return Err(Error::Invalid(format!(
                "radius {} at ({cx}, {cy}) covers the whole {w}x{h} image",
                self.radius
            )));
        }
        Ok(())
    }
}

/// True when every pixel of the image lies within `radius` of `center`.
fn covers_image(center: (usize, usize), radius: usize, dims: (usize, usize)) -> bool {
    let (w, h) = dims;
    let (cx, cy) = (center.0 as i64, center.1 as i64);
    let far_x = cx.max(w as i64 - 1 - cx);
    let far_y = cy.max(h as i64 - 1 - cy);
    far_x * far_x + far_y * far_y <= (radius as i64) * (radius as i64)
}

/// Draws a uniform centre and a radius `round(k * min(W, H))` with `k`
/// uniform in `k_range`.
///
/// Large `k` (up to 2/3) is allowed. Only when the drawn disc would cover
/// every pixel is the radius reduced to `ceil(min(W, H) / 2)`.
pub fn sample_local_spec(
    dims: (usize, usize),
    k_range: (f64, f64),
    rng: &mut RngStream,
) -> LocalMaskSpec {
    let (w, h) = dims;
    let center = (rng.index(w), rng.index(h));
    let k = rng.real_in(k_range.0, k_range.1);
    let short = w.min(h);
    let mut radius = ((k * short as f64).round() as usize).max(1);
    if covers_image(center, radius, dims) {
        radius = short.div_ceil(2);
    }
    LocalMaskSpec { center, radius }
}

/// Disc mask: set where `(x - cx)^2 + (y - cy)^2 <= r^2`, clipped to the image.
pub fn build_m1(spec: &LocalMaskSpec, dims: (usize, usize)) -> BinaryMask {
    let (cx, cy) = (spec.center.0 as i64, spec.center.1 as i64);
    let r2 = (spec.radius as i64).pow(2);
    BinaryMask::from_fn(dims.0, dims.1, |x, y| {
        (x as i64 - cx).pow(2) + (y as i64 - cy).pow(2) <= r2
    })
}

/// Distance transform of `m1` scaled by its maximum into `[0, 1]`.
pub fn build_m2<T: Real>(m1: &BinaryMask) -> Result<FloatMask<T>> {
    let dist = edt(m1)?;
    let (w, h) = dist.dims();
    let peak = dist.max_squared();
    if peak == 0 {
        return Ok(FloatMask::zeros(w, h));
    }
    let peak = T::of_u64(peak).sqrt();
    let values = dist
        .distances::<T>()
        .into_iter()
        .map(|d| (d / peak).min(T::one()))
        .collect();
    FloatMask::new(w, h, values)
}

/// `clamp(img + sign * round(m2 * z))`, applied to every channel.
pub fn apply_local<T: Real>(img: &Image, m2: &FloatMask<T>, z: u32, sign: Sign) -> Result<Image> {
    if !(1..=255).contains(&z) {
        return Err(Error::Invalid(format!(
            "local intensity {z} outside [1, 255]"
        )));
    }
    if m2.dims() != img.dims() {
        return Err(Error::dims(img.dims(), m2.dims()));
    }
    let zr = T::of(z as f64);
    let channels = img.channels();
    let mut out = img.clone();
    for (px, &m) in out.data_mut().chunks_exact_mut(channels).zip(m2.values()) {
        if m == T::zero() {
            continue;
        }
        let delta = sign.value() * (m * zr).round().to_i32().expect("bounded delta");
        for v in px {
            *v = clamp_u8(*v as i32 + delta);
        }
    }
    Ok(out)
}
