pub mod agent;
pub(crate) mod codec;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nncore;
pub mod replay;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DenseNet64 = nncore::DenseNet<f64>;
pub type DenseNet32 = nncore::DenseNet<f32>;
pub type Td3Agent64 = agent::Td3Agent<f64>;
pub type Td3Agent32 = agent::Td3Agent<f32>;
pub type ReplayBuffer64 = replay::ReplayBuffer<f64>;
pub type ReplayBuffer32 = replay::ReplayBuffer<f32>;
pub type NavEnv64 = envs::NavEnv<f64>;
pub type NavEnv32 = envs::NavEnv<f32>;
pub type EnvSpec64 = envs::EnvSpec<f64>;
pub type EnvSpec32 = envs::EnvSpec<f32>;
