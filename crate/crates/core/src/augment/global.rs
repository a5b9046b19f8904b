use crate::error::{Error, Result};
use crate::imaging::{FloatMask, Image};
use crate::num::Real;

use super::local::apply_local;
use super::{clamp_u8, Sign};

/// Uniform brightness shift `clamp(img + sign * z)`.
pub fn apply_global(img: &Image, z: u32, sign: Sign) -> Result<Image> {
    if z > 255 {
        return Err(Error::Invalid(format!(
            "global intensity {z} outside [0, 255]"
        )));
    }
    let delta = sign.value() * z as i32;
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = clamp_u8(*v as i32 + delta);
    }
    Ok(out)
}

/// Local effect followed by a global shift, with independent signs.
///
/// `z_local == 0` skips the local step.
pub fn apply_combined<T: Real>(
    img: &Image,
    m2: &FloatMask<T>,
    z_local: u32,
    z_global: u32,
    sign_local: Sign,
    sign_global: Sign,
) -> Result<Image> {
    if m2.dims() != img.dims() {
        return Err(Error::dims(img.dims(), m2.dims()));
    }
    let lit = if z_local == 0 {
        img.clone()
    } else {
        apply_local(img, m2, z_local, sign_local)?
    };
    apply_global(&lit, z_global, sign_global)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::local::{build_m1, build_m2, LocalMaskSpec};

    fn disc_m2() -> FloatMask<f64> {
        let spec = LocalMaskSpec {
            center: (12, 12),
            radius: 6,
        };
        build_m2(&build_m1(&spec, (24, 24))).unwrap()
    }

    #[test]
    fn global_shifts() {
        let img = Image::filled(8, 8, 3, 100);
        assert_eq!(apply_global(&img, 0, Sign::Minus).unwrap(), img);
        assert_eq!(
            apply_global(&img, 50, Sign::Plus).unwrap(),
            Image::filled(8, 8, 3, 150)
        );
        assert_eq!(
            apply_global(&img, 80, Sign::Minus).unwrap(),
            Image::filled(8, 8, 3, 20)
        );
        assert_eq!(
            apply_global(&img, 255, Sign::Plus).unwrap(),
            Image::filled(8, 8, 3, 255)
        );
        assert!(apply_global(&img, 256, Sign::Plus).is_err());
    }

    #[test]
    fn combined_bright_bright() {
        let img = Image::filled(24, 24, 3, 100);
        let out = apply_combined(&img, &disc_m2(), 140, 50, Sign::Plus, Sign::Plus).unwrap();
        assert_eq!(out.get(12, 12, 0), 255);
        assert_eq!(out.get(0, 0, 0), 150);
    }

    #[test]
    fn combined_dark_local_bright_global() {
        let img = Image::filled(24, 24, 1, 128);
        let out = apply_combined(&img, &disc_m2(), 120, 40, Sign::Minus, Sign::Plus).unwrap();
        assert_eq!(out.get(12, 12, 0), 48);
        assert_eq!(out.get(0, 23, 0), 168);
    }

    #[test]
    fn combined_with_empty_mask_is_global() {
        let img = Image::from_fn(24, 24, 3, |x, y, c| (x * 7 + y * 3 + c) as u8);
        let zero = FloatMask::<f64>::zeros(24, 24);
        for sign in [Sign::Plus, Sign::Minus] {
            assert_eq!(
                apply_combined(&img, &zero, 130, 60, Sign::Plus, sign).unwrap(),
                apply_global(&img, 60, sign).unwrap()
            );
            assert_eq!(
                apply_combined(&img, &zero, 0, 60, Sign::Minus, sign).unwrap(),
                apply_global(&img, 60, sign).unwrap()
            );
        }
    }

    #[test]
    fn combined_dimension_mismatch() {
        let img = Image::filled(10, 10, 1, 0);
        assert!(matches!(
            apply_combined(&img, &disc_m2(), 10, 10, Sign::Plus, Sign::Plus),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
