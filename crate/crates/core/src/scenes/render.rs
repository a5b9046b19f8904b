use crate::imaging::{GroundTruth, Image};
use crate::rng::{mix64, RngStream};

use super::config::{ObjectShape, Scenario, SceneConfig};
use super::noise::ValueNoise;

const OBJECT_STREAM: u64 = 0x0B1E;
const BG_COARSE: u64 = 0xB6C0;
const BG_FINE: u64 = 0xB6F1;
const OBJ_TEXTURE: u64 = 0x07E7;
const BG_TINT: [u64; 3] = [0xC0_11, 0xC0_22, 0xC0_33];

/// Object parameters drawn once per sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectTrack {
    pub shape: ObjectShape,
    /// Half extents; equal for discs (the radius).
    pub half: (f64, f64),
    pub start: (f64, f64),
    pub velocity: (f64, f64),
}

pub fn object_track(cfg: &SceneConfig) -> ObjectTrack {
    let mut rng = RngStream::new(cfg.seed, OBJECT_STREAM);
    let (lo, hi) = cfg.object.size_range;
    let mut size = || rng.int_inclusive(lo as i64, hi as i64) as f64;
    let half = match cfg.object.shape {
        ObjectShape::Disc => {
            let r = size();
            (r, r)
        }
        ObjectShape::Rectangle => {
            let a = size();
            (a, size())
        }
    };
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let start = (
        rng.real_in(half.0, w - 1.0 - half.0),
        rng.real_in(half.1, h - 1.0 - half.1),
    );
    let (slo, shi) = cfg.object.speed_range;
    let mut speed = || rng.real_in(slo, shi) * rng.sign() as f64;
    let velocity = (speed(), speed());
    ObjectTrack {
        shape: cfg.object.shape,
        half,
        start,
        velocity,
    }
}

/// Position in `[lo, hi]` after travelling freely to `u` with elastic
/// reflections at both ends.
fn reflect(u: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let m = (u - lo).rem_euclid(2.0 * span);
    if m <= span {
        lo + m
    } else {
        lo + 2.0 * span - m
    }
}

impl ObjectTrack {
    pub fn center(&self, cfg: &SceneConfig, t: usize) -> (f64, f64) {
        let t = t as f64;
        (
            reflect(
                self.start.0 + self.velocity.0 * t,
                self.half.0,
                cfg.width as f64 - 1.0 - self.half.0,
            ),
            reflect(
                self.start.1 + self.velocity.1 * t,
                self.half.1,
                cfg.height as f64 - 1.0 - self.half.1,
            ),
        )
    }

    pub fn covers(&self, center: (f64, f64), x: usize, y: usize) -> bool {
        let (dx, dy) = (x as f64 - center.0, y as f64 - center.1);
        match self.shape {
            ObjectShape::Disc => dx * dx + dy * dy <= self.half.0 * self.half.0,
            ObjectShape::Rectangle => dx.abs() <= self.half.0 && dy.abs() <= self.half.1,
        }
    }
}

/// Static per-pixel RGB albedo of the scene: a shared luminance texture
/// mixed with independent per-channel tint noise (`chroma` in `[0, 1]`).
pub fn background_albedo(cfg: &SceneConfig) -> Vec<[f64; 3]> {
    let bg = &cfg.background;
    let coarse = ValueNoise::new(mix64(cfg.seed ^ BG_COARSE), bg.cell);
    let fine = ValueNoise::new(mix64(cfg.seed ^ BG_FINE), (bg.cell / 4).max(1));
    let tint = BG_TINT.map(|tag| ValueNoise::new(mix64(cfg.seed ^ tag), bg.cell));
    let (lo, hi) = (bg.low as f64, bg.high as f64);
    let k = bg.chroma;
    (0..cfg.height)
        .flat_map(|y| (0..cfg.width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let (fx, fy) = (x as f64, y as f64);
            let n = 0.75 * coarse.sample(fx, fy) + 0.25 * fine.sample(fx, fy);
            let mut px = [0.0; 3];
            for (c, v) in px.iter_mut().enumerate() {
                let mixed = if k > 0.0 {
                    (1.0 - k) * n + k * tint[c].sample(fx, fy)
                } else {
                    n
                };
                *v = lo + (hi - lo) * mixed;
            }
            px
        })
        .collect()
}

/// Brightness multiplier and lamp state of frame `t`.
pub fn lighting(cfg: &SceneConfig, t: usize) -> (f64, bool) {
    match cfg.scenario {
        Scenario::Darkening => {
            let frac = if cfg.n_frames > 1 {
                t as f64 / (cfg.n_frames - 1) as f64
            } else {
                0.0
            };
            (cfg.ramp.0 + (cfg.ramp.1 - cfg.ramp.0) * frac, false)
        }
        Scenario::Lightswitch => (cfg.ambient_scale, t < cfg.switch_frame()),
    }
}

/// Frame `t` and its exact labels; a pure function of `(cfg, t)`.
pub fn render_frame(
    cfg: &SceneConfig,
    albedo: &[[f64; 3]],
    track: &ObjectTrack,
    t: usize,
) -> (Image, GroundTruth) {
    let (scale, lamp_on) = lighting(cfg, t);
    let center = track.center(cfg, t);
    let texture = ValueNoise::new(mix64(cfg.seed ^ OBJ_TEXTURE), 4);
    let amp = cfg.object.texture_amplitude as f64;
    let gt = GroundTruth::from_fn(cfg.width, cfg.height, |x, y| track.covers(center, x, y));
    let img = Image::from_fn(cfg.width, cfg.height, 3, |x, y, c| {
        let base = if gt.get(x, y) {
            // Texture is attached to the object, sampled in its own frame.
            let lx = x as f64 - center.0 + 64.0;
            let ly = y as f64 - center.1 + 64.0;
            let tex = (texture.sample(lx, ly) - 0.5) * 2.0 * amp;
            (cfg.object.color[c] as f64 + tex).clamp(0.0, 255.0)
        } else {
            albedo[y * cfg.width + x][c]
        };
        let boost = if lamp_on && cfg.lamp_region.contains(x, y) {
            cfg.lamp_boost as f64
        } else {
            0.0
        };
        (scale * base + boost).round().clamp(0.0, 255.0) as u8
    });
    (img, gt)
}
