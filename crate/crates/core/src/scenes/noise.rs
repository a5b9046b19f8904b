use crate::rng::mix64;

/// Hash-based lattice value noise with bilinear interpolation, in `[0, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct ValueNoise {
    seed: u64,
    cell: f64,
}

impl ValueNoise {
    pub fn new(seed: u64, cell: usize) -> Self {
        Self {
            seed,
            cell: cell.max(1) as f64,
        }
    }

    fn lattice(&self, ix: i64, iy: i64) -> f64 {
        let h = mix64(
            self.seed
                ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F),
        );
        (h >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (u, v) = (x / self.cell, y / self.cell);
        let (ix, iy) = (u.floor(), v.floor());
        let (fx, fy) = (u - ix, v - iy);
        let (ix, iy) = (ix as i64, iy as i64);
        let top = self.lattice(ix, iy) * (1.0 - fx) + self.lattice(ix + 1, iy) * fx;
        let bottom = self.lattice(ix, iy + 1) * (1.0 - fx) + self.lattice(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}
