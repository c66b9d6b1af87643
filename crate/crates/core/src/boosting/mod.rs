//! Losses, gradients, the additive training loop and prediction.

mod config;
mod ensemble;
mod loss;
mod multiclass;
mod train;

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::growers::GrowError;
use crate::strategies::StrategyError;

pub use config::{BoostConfig, GossParams, OrderedParams};
pub use ensemble::{Ensemble, FORMAT_VERSION};
pub use loss::{compute_gradients, init_base_score, sigmoid, GradientPair, LossSpec, LOGIT_CLIP};
pub use multiclass::{train_one_vs_rest, OneVsRest};
pub use train::{target_values, train, train_matrix, train_with_trace, TrainTrace};

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has no target column")]
    MissingTarget,
    #[error("unsupported model format version {found:?} (expected {expected})")]
    UnsupportedVersion { found: Option<u32>, expected: u32 },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Grow(#[from] GrowError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BoostError>;
