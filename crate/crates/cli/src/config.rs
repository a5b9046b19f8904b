//! Experiment configuration file (TOML, four sections).
//!
//! ```toml
//! [data]
//! train = "train/manifest.json"
//! test = "test/manifest.json"
//! out = "runs/gl"
//!
//! [augment]
//! preset = "GL"
//!
//! [train]
//! seed = 3
//! max_epochs = 50
//!
//! [eval]
//! thresholds = [0.25, 0.5, 0.75]
//! ```
//!
//! Every key is optional; relative paths are resolved against the file's
//! directory. `[train]` accepts every training hyper-parameter.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use illumaug::model::TrainConfig;

use crate::error::{CmdResult, Failure};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
    /// Whether `[train]` set `seed` explicitly.
    #[serde(skip)]
    pub seed_given: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub preset: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub thresholds: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// Parses `text`, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> CmdResult<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Failure::usage(format!("invalid config: {e}")))?;
        let seed_given = table
            .get("train")
            .and_then(|t| t.as_table())
            .is_some_and(|t| t.contains_key("seed"));
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Failure::usage(format!("invalid config: {e}")))?;
        cfg.seed_given = seed_given;
        let d = &mut cfg.data;
        for p in [&mut d.train, &mut d.test, &mut d.out, &mut d.model]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CmdResult<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}
