//! Desk-scale background-subtraction segmenter trained with class-weighted
//! cross-entropy, Adam, and a reduce-on-plateau / early-stopping schedule.

mod adam;
mod features;
mod io;
mod loss;
mod network;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use features::{
    build_reference, extract_features, FeatureConfig, FeatureVector, Reference, FEATURE_DIM,
};
pub use io::{read_model, write_model, ModelDocument, MODEL_FORMAT_VERSION};
pub use loss::{class_weights, sigmoid, weighted_bce, ClassWeights};
pub use network::{batch_loss, batch_loss_and_gradient, predict, ModelParams, HIDDEN, PARAM_COUNT};
pub use train::{train, EpochLog, EpochVerdict, PlateauSchedule, TrainConfig, TrainedModel};
