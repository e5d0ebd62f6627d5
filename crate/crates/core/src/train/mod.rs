//! Supervised training: edge labels from a classical ordering, binary
//! cross-entropy on `σ(p(u) - p(v))`, hand-written backprop and Adam.

mod adam;
mod backprop;
mod labels;
mod metrics;
mod supervised;

pub use adam::Adam;
pub use backprop::{edge_probabilities, forward_cached, initial_features_t, loss_and_gradient, ForwardCache};
pub use labels::{make_labels, EdgeLabelSet, LabelSource};
pub use metrics::{bce_loss, f1_score, predict_edge, Confusion, BCE_EPS};
pub use supervised::{
    evaluate, label_all, parameter_init, train_supervised, train_supervised_with, write_history, EpochMetrics,
    LabeledGraph, TrainConfig, TrainOutcome,
};
