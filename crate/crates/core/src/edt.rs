//! Exact Euclidean distance transform.
//!
//! Every set pixel of a [`BinaryMask`] receives its distance to the nearest
//! unset pixel of the same mask; unset pixels map to zero. Pixels outside the
//! image are never treated as background. Distances are held as exact squared
//! integers and only square-rooted when read out.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::BinaryMask;
use crate::num::Real;

const INF: u64 = u64::MAX;

/// Squared Euclidean distances to the nearest background pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    squared: Vec<u64>,
}

impl DistanceMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Exact squared distances, row-major.
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    #[inline]
    pub fn squared_at(&self, x: usize, y: usize) -> u64 {
        self.squared[y * self.width + x]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        (self.squared_at(x, y) as f64).sqrt()
    }

    pub fn max_squared(&self) -> u64 {
        self.squared.iter().copied().max().unwrap_or(0)
    }

    /// Euclidean distances in the requested precision.
    pub fn distances<T: Real>(&self) -> Vec<T> {
        self.squared.iter().map(|&s| T::of_u64(s).sqrt()).collect()
    }
}

fn check_background(mask: &BinaryMask) -> Result<()> {
    if mask.bits().iter().all(|&b| b) {
        return Err(Error::NoBackground);
    }
    Ok(())
}

/// Separable exact EDT (lower envelope of parabolas), linear in the pixel count.
pub fn edt(mask: &BinaryMask) -> Result<DistanceMap> {
    check_background(mask)?;
    let (w, h) = mask.dims();

    // Column pass: vertical distance to the nearest background pixel in the
    // same column, stored column-major.
    let mut column = vec![INF; w * h];
    column.par_chunks_mut(h).enumerate().for_each(|(x, col)| {
        let mut last: Option<usize> = None;
        for (y, slot) in col.iter_mut().enumerate() {
            if !mask.get(x, y) {
                last = Some(y);
            }
            if let Some(b) = last {
                *slot = (y - b) as u64;
            }
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if !mask.get(x, y) {
                next = Some(y);
            }
            if let Some(b) = next {
                let d = (b - y) as u64;
                if d < col[y] {
                    col[y] = d;
                }
            }
        }
    });

    let mut squared = vec![0u64; w * h];
    squared.par_chunks_mut(w).enumerate().for_each_init(
        || Envelope::with_capacity(w),
        |env, (y, row)| {
            env.clear();
            for x in 0..w {
                let g = column[x * h + y];
                if g != INF {
                    env.push(x as i64, (g * g) as i64);
                }
            }
            env.evaluate(row);
        },
    );

    Ok(DistanceMap {
        width: w,
        height: h,
        squared,
    })
}

/// Lower envelope of the parabolas `(q - site)^2 + offset`, with breakpoints
/// stored as exact rationals.
struct Envelope {
    sites: Vec<i64>,
    offsets: Vec<i64>,
    // Breakpoint k separates parabola k-1 from parabola k; index 0 unused.
    bounds: Vec<(i64, i64)>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            sites: Vec::with_capacity(n),
            offsets: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n),
        }
    }

    fn clear(&mut self) {
        self.sites.clear();
        self.offsets.clear();
        self.bounds.clear();
    }

    /// Abscissa where parabolas `(p, fp)` and `(q, fq)` meet, as `num / den`, q > p.
    fn intersection(p: i64, fp: i64, q: i64, fq: i64) -> (i64, i64) {
        ((fq + q * q) - (fp + p * p), 2 * (q - p))
    }

    fn push(&mut self, q: i64, fq: i64) {
        loop {
            let Some(&p) = self.sites.last() else {
                self.sites.push(q);
                self.offsets.push(fq);
                self.bounds.push((0, 1));
                return;
            };
            let k = self.sites.len() - 1;
            let fp = self.offsets[k];
            let (num, den) = Self::intersection(p, fp, q, fq);
            if k > 0 {
                let (bn, bd) = self.bounds[k];
                // s <= bound  <=>  num * bd <= bn * den (denominators positive)
                if (num as i128) * (bd as i128) <= (bn as i128) * (den as i128) {
                    self.sites.pop();
                    self.offsets.pop();
                    self.bounds.pop();
                    continue;
                }
            }
            self.sites.push(q);
            self.offsets.push(fq);
            self.bounds.push((num, den));
            return;
        }
    }

    fn evaluate(&self, out: &mut [u64]) {
        let mut k = 0;
        for (q, slot) in out.iter_mut().enumerate() {
            let q = q as i64;
            while k + 1 < self.sites.len() {
                let (bn, bd) = self.bounds[k + 1];
                if (bn as i128) < (q as i128) * (bd as i128) {
                    k += 1;
                } else {
                    break;
                }
            }
            let dx = q - self.sites[k];
            *slot = (dx * dx + self.offsets[k]) as u64;
        }
    }
}

/// Quadratic reference transform: explicit minimum over all background pixels.
pub fn edt_brute_force(mask: &BinaryMask) -> Result<DistanceMap> {
    check_background(mask)?;
    let (w, h) = mask.dims();
    let background: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| !mask.get(x, y))
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    let squared = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            if !mask.get(x, y) {
                return 0;
            }
            let (x, y) = (x as i64, y as i64);
            background
                .iter()
                .map(|&(bx, by)| ((x - bx).pow(2) + (y - by).pow(2)) as u64)
                .min()
                .expect("background present")
        })
        .collect();
    Ok(DistanceMap {
        width: w,
        height: h,
        squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block_mask() -> BinaryMask {
        BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y))
    }

    fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryMask {
        let mut m = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density));
        if m.count_set() == w * h {
            let mut bits = m.bits().to_vec();
            bits[rng.random_range(0..w * h)] = false;
            m = BinaryMask::new(w, h, bits).unwrap();
        }
        m
    }

    #[test]
    fn all_zero_mask_maps_to_zero() {
        let m = BinaryMask::from_fn(5, 5, |_, _| false);
        assert!(edt(&m).unwrap().squared().iter().all(|&v| v == 0));
        assert!(edt_brute_force(&m)
            .unwrap()
            .squared()
            .iter()
            .all(|&v| v == 0));
    }

    #[test]
    fn centered_block() {
        let d = edt(&block_mask()).unwrap();
        assert_eq!(d.get(2, 2), 2.0);
        assert_eq!(d.get(1, 2), 1.0);
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d, edt_brute_force(&block_mask()).unwrap());
    }

    #[test]
    fn single_pixel() {
        let m = BinaryMask::from_fn(7, 7, |x, y| x == 3 && y == 3);
        assert_eq!(edt(&m).unwrap().get(3, 3), 1.0);
    }

    #[test]
    fn single_background_corner() {
        for n in [2usize, 5, 16, 33] {
            let m = BinaryMask::from_fn(n, n, |x, y| !(x == 0 && y == 0));
            let expected = (2.0f64).sqrt() * (n - 1) as f64;
            let fast = edt(&m).unwrap();
            let slow = edt_brute_force(&m).unwrap();
            assert_eq!(fast, slow);
            assert!((fast.get(n - 1, n - 1) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_is_rejected() {
        let m = BinaryMask::from_fn(4, 3, |_, _| true);
        assert!(matches!(edt(&m), Err(Error::NoBackground)));
        assert!(matches!(edt_brute_force(&m), Err(Error::NoBackground)));
    }

    #[test]
    fn border_is_not_background() {
        // A full-height stripe with background only at x = 0.
        let m = BinaryMask::from_fn(6, 3, |x, _| x > 0);
        let d = edt(&m).unwrap();
        assert_eq!(d.squared_at(5, 0), 25);
        assert_eq!(d.squared_at(5, 2), 25);
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let w = rng.random_range(1..=64);
            let h = rng.random_range(1..=64);
            let density = rng.random_range(0.01..0.99);
            let m = random_mask(&mut rng, w, h, density);
            assert_eq!(edt(&m).unwrap(), edt_brute_force(&m).unwrap());
        }
    }

    #[test]
    fn lipschitz_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = random_mask(&mut rng, 40, 30, 0.9);
            let d = edt(&m).unwrap();
            for _ in 0..1000 {
                let (ax, ay) = (rng.random_range(0..40), rng.random_range(0..30));
                let (bx, by) = (rng.random_range(0..40), rng.random_range(0..30));
                let gap =
                    ((ax as f64 - bx as f64).powi(2) + (ay as f64 - by as f64).powi(2)).sqrt();
                assert!((d.get(ax, ay) - d.get(bx, by)).abs() <= gap + 1e-12);
            }
        }
    }

    #[test]
    fn positive_inside_zero_outside() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_mask(&mut rng, 33, 17, 0.7);
        let d = edt(&m).unwrap();
        for y in 0..17 {
            for x in 0..33 {
                assert_eq!(m.get(x, y), d.squared_at(x, y) > 0);
            }
        }
    }

    proptest! {
        #[test]
        fn translation_equivariance(
            bits in proptest::collection::vec(any::<bool>(), 12 * 10),
            dx in 0usize..6,
            dy in 0usize..6,
        ) {
            // Pad with a background ring so both masks keep background
            // around the content, then shift inside a larger canvas.
            let small = BinaryMask::new(12, 10, bits).unwrap();
            let place = |ox: usize, oy: usize| {
                BinaryMask::from_fn(24, 22, |x, y| {
                    x > ox && y > oy && x < ox + 13 && y < oy + 11
                        && small.get(x - ox - 1, y - oy - 1)
                })
            };
            let a = edt(&place(0, 0)).unwrap();
            let b = edt(&place(dx, dy)).unwrap();
            for y in 0..12 {
                for x in 0..14 {
                    prop_assert_eq!(a.squared_at(x, y), b.squared_at(x + dx, y + dy));
                }
            }
        }
    }
}
