use serde::{Deserialize, Serialize};

/// Which family of transformation a preset applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentKind {
    None,
    Default,
    Local,
    Global,
    Combined,
}

/// Named parameter bundle for one augmentation setting.
///
/// Ranges are inclusive. Fields that do not apply to `kind` are kept but
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentPreset {
    pub name: String,
    pub kind: AugmentKind,
    pub k_range: (f64, f64),
    pub z_local_range: (u32, u32),
    pub z_global_range: (u32, u32),
    pub apply_prob: f64,
}

/// Fraction of samples that get augmented.
pub const APPLY_PROB: f64 = 2.0 / 3.0;

const K_SMALL: (f64, f64) = (1.0 / 5.0, 1.0 / 2.0);
const K_LARGE: (f64, f64) = (1.0 / 2.0, 2.0 / 3.0);
const Z_LOCAL: (u32, u32) = (120, 160);
const Z_GLOBAL: (u32, u32) = (40, 80);

/// Stable preset names, in registry order.
pub const PRESET_NAMES: [&str; 9] = [
    "baseline", "default", "L_a", "L_b", "L_c", "G_low", "G_med", "G_high", "GL",
];

impl AugmentPreset {
    fn new(
        name: &str,
        kind: AugmentKind,
        k_range: (f64, f64),
        z_local_range: (u32, u32),
        z_global_range: (u32, u32),
    ) -> Self {
        Self {
            name: name.to_string(),
            kind,
            k_range,
            z_local_range,
            z_global_range,
            apply_prob: APPLY_PROB,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ordered = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ordered(self.k_range.0, self.k_range.1) || self.k_range.0 <= 0.0 {
            return Err(format!("{}: bad k range {:?}", self.name, self.k_range));
        }
        for (label, (lo, hi)) in [
            ("z_local", self.z_local_range),
            ("z_global", self.z_global_range),
        ] {
            if lo > hi || hi > 255 {
                return Err(format!("{}: bad {label} range ({lo}, {hi})", self.name));
            }
        }
        if self.z_local_range.0 == 0 {
            return Err(format!("{}: local intensity must be at least 1", self.name));
        }
        if !(0.0..=1.0).contains(&self.apply_prob) {
            return Err(format!(
                "{}: apply_prob {} outside [0, 1]",
                self.name, self.apply_prob
            ));
        }
        Ok(())
    }
}

/// The nine evaluated settings: no augmentation, the conventional
/// augmenter, three local, three global and the combined setting.
pub fn preset_registry() -> Vec<AugmentPreset> {
    use AugmentKind::*;
    vec![
        AugmentPreset::new("baseline", None, K_SMALL, Z_LOCAL, Z_GLOBAL),
        AugmentPreset::new("default", Default, K_SMALL, Z_LOCAL, Z_GLOBAL),
        AugmentPreset::new("L_a", Local, K_LARGE, (80, 120), Z_GLOBAL),
        AugmentPreset::new("L_b", Local, K_SMALL, (80, 120), Z_GLOBAL),
        AugmentPreset::new("L_c", Local, K_SMALL, (120, 160), Z_GLOBAL),
        AugmentPreset::new("G_low", Global, K_SMALL, Z_LOCAL, (20, 60)),
        AugmentPreset::new("G_med", Global, K_SMALL, Z_LOCAL, (40, 80)),
        AugmentPreset::new("G_high", Global, K_SMALL, Z_LOCAL, (60, 100)),
        AugmentPreset::new("GL", Combined, K_SMALL, Z_LOCAL, Z_GLOBAL),
    ]
}

pub fn preset_by_name(name: &str) -> Option<AugmentPreset> {
    preset_registry().into_iter().find(|p| p.name == name)
}
