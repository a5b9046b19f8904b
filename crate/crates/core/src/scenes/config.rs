use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Global brightness ramps down across the sequence.
    Darkening,
    /// Constant dim lighting; a lamp-lit region goes dark halfway through.
    Lightswitch,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "darkening" => Ok(Scenario::Darkening),
            "lightswitch" => Ok(Scenario::Lightswitch),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectShape {
    Disc,
    Rectangle,
}

/// The single moving object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub shape: ObjectShape,
    /// Inclusive range for the radius (disc) or each half-side (rectangle).
    pub size_range: (usize, usize),
    /// Per-axis speed magnitude range in pixels per frame.
    pub speed_range: (f64, f64),
    /// Base RGB albedo; a fixed texture of +-`texture_amplitude` is added.
    pub color: [u8; 3],
    pub texture_amplitude: u8,
}

impl Default for ObjectConfig {
    fn default() -> Self {
        Self {
            shape: ObjectShape::Disc,
            size_range: (6, 10),
            speed_range: (2.0, 3.5),
            color: [40, 70, 55],
            texture_amplitude: 15,
        }
    }
}

/// Value-noise albedo of the static scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    pub cell: usize,
    pub low: u8,
    pub high: u8,
    /// Weight of the per-channel tint noise; 0 gives a gray scene.
    pub chroma: f64,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            cell: 16,
            low: 20,
            high: 220,
            chroma: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.width && y < self.y + self.height
    }
}

/// Everything needed to regenerate a sequence bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub seed: u64,
    pub scenario: Scenario,
    pub object: ObjectConfig,
    pub background: BackgroundConfig,
    /// Brightness multipliers at the first and last frame (darkening).
    pub ramp: (f64, f64),
    /// Constant brightness multiplier (lightswitch).
    pub ambient_scale: f64,
    /// Region lit by the lamp before the switch (lightswitch).
    pub lamp_region: Rect,
    /// Gray levels added inside the lamp region while it is on.
    pub lamp_boost: u8,
}

pub const MIN_CONTRAST: f64 = 40.0;

impl SceneConfig {
    pub fn darkening(seed: u64) -> Self {
        Self {
            width: 128,
            height: 96,
            n_frames: 200,
            seed,
            scenario: Scenario::Darkening,
            object: ObjectConfig::default(),
            background: BackgroundConfig::default(),
            ramp: (1.0, 0.8),
            ambient_scale: 0.8,
            lamp_region: Rect {
                x: 64,
                y: 16,
                width: 48,
                height: 56,
            },
            lamp_boost: 60,
        }
    }

    pub fn lightswitch(seed: u64) -> Self {
        Self {
            n_frames: 150,
            scenario: Scenario::Lightswitch,
            ..Self::darkening(seed)
        }
    }

    pub fn for_scenario(scenario: Scenario, seed: u64) -> Self {
        match scenario {
            Scenario::Darkening => Self::darkening(seed),
            Scenario::Lightswitch => Self::lightswitch(seed),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Index of the first frame with the lamp off.
    pub fn switch_frame(&self) -> usize {
        self.n_frames / 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.width < 8 || self.height < 8 {
            return bad(format!(
                "scene must be at least 8x8, got {}x{}",
                self.width, self.height
            ));
        }
        if self.n_frames == 0 {
            return bad("n_frames must be positive".into());
        }
        for (name, s) in [
            ("ramp start", self.ramp.0),
            ("ramp end", self.ramp.1),
            ("ambient_scale", self.ambient_scale),
        ] {
            if !(s > 0.0 && s <= 1.0) {
                return bad(format!("{name} {s} outside (0, 1]"));
            }
        }
        let r = &self.lamp_region;
        if r.width == 0
            || r.height == 0
            || r.x + r.width > self.width
            || r.y + r.height > self.height
        {
            return bad(format!("lamp region {r:?} outside the frame"));
        }
        let (lo, hi) = self.object.size_range;
        if lo == 0 || lo > hi || 2 * hi + 1 > self.width.min(self.height) {
            return bad(format!(
                "object size range ({lo}, {hi}) does not fit the frame"
            ));
        }
        let (slo, shi) = self.object.speed_range;
        if !(slo > 0.0 && slo <= shi && shi.is_finite()) {
            return bad(format!("speed range ({slo}, {shi}) invalid"));
        }
        let bg = &self.background;
        if bg.cell == 0 || bg.low > bg.high || !(0.0..=1.0).contains(&bg.chroma) {
            return bad("background noise parameters invalid".into());
        }
        let obj_mean = self.object.color.iter().map(|&c| c as f64).sum::<f64>() / 3.0;
        let bg_mean = (bg.low as f64 + bg.high as f64) / 2.0;
        if (obj_mean - bg_mean).abs() < MIN_CONTRAST {
            return bad(format!(
                "object mean {obj_mean:.1} must differ from background mean {bg_mean:.1} by at least {MIN_CONTRAST}"
            ));
        }
        Ok(())
    }
}
