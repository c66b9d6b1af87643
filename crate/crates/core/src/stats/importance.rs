use serde::{Deserialize, Serialize};

use super::{Result, StatsError};
use crate::boosting::Ensemble;
use crate::scalar::decimal17;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMetric {
    #[default]
    Gain,
    SplitCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FeatureImportance<T> {
    pub feature: usize,
    pub name: String,
    #[serde(with = "decimal17")]
    pub gain_importance: T,
    pub split_count: usize,
    /// The ranking metric, divided by its total when normalized.
    #[serde(with = "decimal17")]
    pub score: T,
}

/// Per-feature importances sorted by score, descending (ties by feature
/// index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FeatureImportanceReport<T> {
    pub metric: ImportanceMetric,
    pub normalized: bool,
    pub n_trees: usize,
    pub entries: Vec<FeatureImportance<T>>,
}

impl<T: Scalar> FeatureImportanceReport<T> {
    pub fn score_of(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.score)
    }

    /// Position (0-based) of a feature in the ranking.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    /// Sums the scores of one-hot indicators (`column=label`) back onto
    /// their source column.
    pub fn grouped_by_source(&self) -> Vec<(String, T)> {
        let mut out: Vec<(String, T)> = Vec::new();
        for e in &self.entries {
            let source = e.name.split_once('=').map_or(e.name.as_str(), |(s, _)| s);
            match out.iter_mut().find(|(n, _)| n == source) {
                Some((_, v)) => *v = *v + e.score,
                None => out.push((source.to_string(), e.score)),
            }
        }
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        out
    }
}

pub fn feature_importance<T: Scalar>(
    ens: &Ensemble<T>,
    metric: ImportanceMetric,
    normalized: bool,
) -> Result<FeatureImportanceReport<T>> {
    let k = ens.feature_names.len();
    let mut gains = vec![T::zero(); k];
    let mut counts = vec![0usize; k];
    for tree in &ens.trees {
        for (f, g) in tree.split_gains() {
            gains[f] = gains[f] + g.max(T::zero());
            counts[f] += 1;
        }
    }
    let raw: Vec<T> = match metric {
        ImportanceMetric::Gain => gains.clone(),
        ImportanceMetric::SplitCount => counts.iter().map(|&c| T::from_usize_lossy(c)).collect(),
    };
    let total = raw.iter().fold(T::zero(), |a, &b| a + b);
    if normalized && !(total > T::zero()) {
        return Err(StatsError::ZeroTotal(
            "cannot normalize importances: the ensemble has no splits".into(),
        ));
    }
    let mut entries: Vec<FeatureImportance<T>> = (0..k)
        .map(|f| FeatureImportance {
            feature: f,
            name: ens.feature_names[f].clone(),
            gain_importance: gains[f],
            split_count: counts[f],
            score: if normalized { raw[f] / total } else { raw[f] },
        })
        .collect();
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.feature.cmp(&b.feature))
    });
    Ok(FeatureImportanceReport {
        metric,
        normalized,
        n_trees: ens.trees.len(),
        entries,
    })
}
