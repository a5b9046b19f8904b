//! Versioned JSON model documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::features::{FeatureConfig, FEATURE_DIM};
use super::network::{ModelParams, HIDDEN};
use super::train::TrainedModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shape {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

/// On-disk layout: shape header followed by row-major weight arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ModelDocument<T> {
    pub version: u32,
    pub features: FeatureConfig,
    pub shape: Shape,
    /// `inputs x hidden`, input-major.
    pub hidden_weights: Vec<T>,
    pub hidden_bias: Vec<T>,
    pub output_weights: Vec<T>,
    pub output_bias: T,
}

impl<T: Real> ModelDocument<T> {
    pub fn from_model(model: &TrainedModel<T>) -> Self {
        let p = &model.params;
        Self {
            version: MODEL_FORMAT_VERSION,
            features: model.features,
            shape: Shape {
                inputs: FEATURE_DIM,
                hidden: HIDDEN,
                outputs: 1,
            },
            hidden_weights: p.hidden_weights().to_vec(),
            hidden_bias: p.hidden_bias().to_vec(),
            output_weights: p.output_weights().to_vec(),
            output_bias: p.output_bias(),
        }
    }

    pub fn into_model(self) -> Result<TrainedModel<T>> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        let expected = Shape {
            inputs: FEATURE_DIM,
            hidden: HIDDEN,
            outputs: 1,
        };
        if self.shape != expected {
            return Err(Error::Format(format!(
                "model shape {:?} does not match {:?}",
                self.shape, expected
            )));
        }
        let mut flat = self.hidden_weights;
        flat.extend(self.hidden_bias);
        flat.extend(self.output_weights);
        flat.push(self.output_bias);
        let params = ModelParams::from_flat(flat).map_err(|e| Error::Format(e.to_string()))?;
        if self.features.reference_frames == 0 {
            return Err(Error::Format("reference_frames must be positive".into()));
        }
        Ok(TrainedModel {
            params,
            features: self.features,
        })
    }
}

pub fn write_model<T: Real>(model: &TrainedModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = ModelDocument::from_model(model);
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_model<T: Real>(path: impl AsRef<Path>) -> Result<TrainedModel<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelDocument<T> = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    doc.into_model()
}
