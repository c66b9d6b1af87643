//! Hypothesis tests, correlation, group summaries and feature importance.

mod anova;
mod chi2;
mod correlation;
mod importance;
pub mod special;
mod summary;

use thiserror::Error;

use crate::dataset::DatasetError;

pub use anova::{one_way_anova, two_way_anova, AnovaResidual, AnovaTable, AnovaTerm};
pub use chi2::{chi_squared_test, contingency_table, ChiSquaredResult, ContingencyTable};
pub use correlation::{pearson, pearson_correlation_matrix, CorrelationMatrix};
pub use importance::{feature_importance, FeatureImportance, FeatureImportanceReport, ImportanceMetric};
pub use special::{chi2_upper_tail, f_upper_tail, gamma_p, gamma_q, incomplete_beta, ln_gamma};
pub use summary::{group_summary, quartiles, GroupStats, GroupSummary};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("column {0:?} is numeric; a categorical column is required")]
    NotCategorical(String),
    #[error("zero degrees of freedom: {0}")]
    ZeroDof(String),
    #[error("zero marginal total: {0}")]
    ZeroMarginal(String),
    #[error("fewer than two groups: {0}")]
    TooFewGroups(String),
    #[error("singular design: {0}")]
    Singular(String),
    #[error("{0}")]
    ZeroTotal(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub type Result<T> = std::result::Result<T, StatsError>;
