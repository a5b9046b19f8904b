//! Illumination-based data augmentation for background subtraction.
//!
//! Synthesizes local lamp-post/shadow effects (a distance-transformed disc
//! added to or subtracted from the frame), global brightness shifts and
//! their combination, and provides the evaluation and training machinery
//! used to measure how such augmentation affects a segmenter under unseen
//! illumination changes.

pub mod augment;
pub mod edt;
pub mod error;
pub mod imaging;
pub mod metrics;
pub mod model;
pub mod num;
pub mod rng;
pub mod scenes;

pub use error::{Error, Result};
pub use imaging::{read_ground_truth, read_image, write_ground_truth, write_image};
pub use imaging::{BinaryMask, GroundTruth, Image};
pub use num::Real;
pub use rng::RngStream;

pub type FloatMask = imaging::FloatMask<f64>;
pub type FloatMaskF32 = imaging::FloatMask<f32>;
pub type ProbabilityMap = metrics::ProbabilityMap<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type Reference = model::Reference<f64>;
