//! Gradient-boosted decision trees with level-wise, leaf-wise and oblivious
//! growth, GOSS, exclusive feature bundling and ordered boosting, plus the
//! statistics used to analyse tabular health data.
//!
//! Gradient statistics, trees and models are generic over [`Scalar`]
//! (`f32` or `f64`); the `*F64` / `*F32` aliases name the common choices.

pub mod boosting;
pub mod dataset;
pub mod growers;
pub mod scalar;
pub mod stats;
pub mod strategies;

pub use scalar::Scalar;

pub type GradientPairF64 = boosting::GradientPair<f64>;
pub type GradientPairF32 = boosting::GradientPair<f32>;
pub type NodeStatsF64 = growers::NodeStats<f64>;
pub type NodeStatsF32 = growers::NodeStats<f32>;
pub type DecisionTreeF64 = growers::DecisionTree<f64>;
pub type DecisionTreeF32 = growers::DecisionTree<f32>;
pub type EnsembleF64 = boosting::Ensemble<f64>;
pub type EnsembleF32 = boosting::Ensemble<f32>;
pub type TreeParamsF64 = growers::TreeParams<f64>;
