//! GraphSAGE ordering model and its inference path.

pub mod infer;
pub mod model;

pub use infer::{
    forward, infer_priorities, infer_priorities_with, initial_features, sage_layer, FeatureMatrix, InferenceBuffers,
};
pub use model::{FeatureScheme, GnnModel, SageLayer, HIDDEN, INPUT_FEATURES, MAX_LAYERS, MIN_LAYERS};
