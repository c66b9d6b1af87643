use serde::{Deserialize, Serialize};

use super::{BoostConfig, BoostError, LossSpec, Result};
use crate::dataset::{Dataset, FeatureMatrix};
use crate::growers::DecisionTree;
use crate::scalar::decimal17;
use crate::Scalar;

pub const FORMAT_VERSION: u32 = 1;

/// Trained model: `raw(x) = base_score + learning_rate · Σ_j tree_j(x)`,
/// accumulated tree by tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Ensemble<T> {
    pub format_version: u32,
    pub loss: LossSpec,
    #[serde(with = "decimal17")]
    pub base_score: T,
    #[serde(with = "decimal17")]
    pub learning_rate: T,
    pub feature_names: Vec<String>,
    pub config: BoostConfig,
    pub trees: Vec<DecisionTree<T>>,
}

impl<T: Scalar> Ensemble<T> {
    /// Raw score of one row given in `feature_names` order.
    pub fn predict_row(&self, row: &[f64]) -> T {
        self.trees.iter().fold(self.base_score, |acc, t| {
            acc + self.learning_rate * t.predict_row(row)
        })
    }

    /// Raw scores; the matrix columns must follow `feature_names`.
    pub fn predict_matrix(&self, features: &FeatureMatrix) -> Vec<T> {
        let mut out = vec![self.base_score; features.n_rows()];
        for tree in &self.trees {
            for (i, p) in out.iter_mut().enumerate() {
                *p = *p + self.learning_rate * tree.predict_with(|f| features.value(f, i));
            }
        }
        out
    }

    /// Raw scores for a dataset holding (at least) the model's features.
    pub fn predict(&self, rows: &Dataset) -> Result<Vec<T>> {
        let fm = FeatureMatrix::select(rows, &self.feature_names)?;
        Ok(self.predict_matrix(&fm))
    }

    /// Raw scores mapped through the link: probabilities for logistic loss.
    pub fn predict_transformed(&self, rows: &Dataset) -> Result<Vec<T>> {
        Ok(self
            .predict(rows)?
            .into_iter()
            .map(|r| self.loss.transform(r))
            .collect())
    }

    /// The model restricted to its first `n` trees.
    pub fn truncated(&self, n: usize) -> Self {
        let mut e = self.clone();
        e.trees.truncate(n);
        e
    }

    /// Canonical pretty-printed JSON; floats carry 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            format_version: Option<u32>,
        }
        let v: Version = serde_json::from_str(text)?;
        match v.format_version {
            Some(FORMAT_VERSION) => Ok(serde_json::from_str(text)?),
            found => Err(BoostError::UnsupportedVersion {
                found,
                expected: FORMAT_VERSION,
            }),
        }
    }
}
