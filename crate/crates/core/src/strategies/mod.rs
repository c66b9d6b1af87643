//! Gradient-based one-side sampling, exclusive feature bundling and the
//! ordered-boosting gradient schedule.

pub mod efb;
pub mod goss;
pub mod ordered;

use thiserror::Error;

pub use efb::{efb_bundle, efb_bundle_binned, efb_decode, efb_encode, BundledBins, FeatureBundle};
pub use goss::{goss_select, goss_variance_gain, GossSample};
pub use ordered::{ordered_gradients, ordered_schedule, BlockPermutation, OrderedSchedule};

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, StrategyError>;
