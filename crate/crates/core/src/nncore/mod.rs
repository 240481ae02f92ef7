//! Dense feed-forward networks with analytic backpropagation, Adam and Polyak
//! blending. Every network in the TD3 learner is one of these.

mod adam;
mod checkpoint;
mod net;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::NET_CHECKPOINT_TAG;
pub use net::{hstack, DenseNet, ForwardTrace, GradientSet, Layer, OutputActivation};
