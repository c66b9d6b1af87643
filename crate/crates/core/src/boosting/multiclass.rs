use serde::{Deserialize, Serialize};

use super::train::{target_values, train_matrix};
use super::{BoostConfig, BoostError, Ensemble, LossSpec, Result};
use crate::dataset::{Dataset, FeatureMatrix};
use crate::Scalar;

/// Logistic one-vs-rest classifier. Two classes need a single model, whose
/// positive class is the larger label; `k > 2` classes get one model each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct OneVsRest<T> {
    /// Distinct target values, ascending.
    pub classes: Vec<f64>,
    pub models: Vec<Ensemble<T>>,
}

pub fn train_one_vs_rest<T: Scalar>(ds: &Dataset, config: &BoostConfig) -> Result<OneVsRest<T>> {
    let y: Vec<f64> = target_values::<f64>(ds)?;
    let mut classes = y.clone();
    classes.sort_by(f64::total_cmp);
    classes.dedup();
    if classes.len() < 2 {
        return Err(BoostError::InvalidTarget(format!(
            "classification needs at least 2 target classes, found {}",
            classes.len()
        )));
    }
    let features = FeatureMatrix::from_dataset(ds)?;
    let config = BoostConfig {
        loss: LossSpec::Logistic,
        ..config.clone()
    };
    let positives: &[f64] = if classes.len() == 2 { &classes[1..] } else { &classes };
    let models = positives
        .iter()
        .map(|&c| {
            let targets: Vec<T> = y.iter().map(|&v| if v == c { T::one() } else { T::zero() }).collect();
            train_matrix(&features, &targets, &config)
        })
        .collect::<Result<_>>()?;
    Ok(OneVsRest { classes, models })
}

impl<T: Scalar> OneVsRest<T> {
    /// Per-row class probabilities in `classes` order. With more than two
    /// classes these are the independent one-vs-rest scores, not normalized.
    pub fn predict_proba(&self, rows: &Dataset) -> Result<Vec<Vec<T>>> {
        let scores: Vec<Vec<T>> = self
            .models
            .iter()
            .map(|m| m.predict_transformed(rows))
            .collect::<Result<_>>()?;
        let n = rows.n_rows();
        Ok((0..n)
            .map(|i| {
                if self.classes.len() == 2 {
                    let p = scores[0][i];
                    vec![T::one() - p, p]
                } else {
                    scores.iter().map(|s| s[i]).collect()
                }
            })
            .collect())
    }

    /// Most probable class per row (first class on ties).
    pub fn predict_class(&self, rows: &Dataset) -> Result<Vec<f64>> {
        Ok(self
            .predict_proba(rows)?
            .into_iter()
            .map(|p| {
                let mut best = 0;
                for (k, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    #[test]
    fn binary_labels_one_and_two() {
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 20.0 { 1.0 } else { 2.0 }).collect();
        let ds = Dataset::new(vec![Column::numeric("x", x), Column::target("y", y.clone())]).unwrap();
        let cfg = BoostConfig {
            n_trees: 20,
            learning_rate: 0.5,
            ..BoostConfig::default()
        };
        let m: OneVsRest<f64> = train_one_vs_rest(&ds, &cfg).unwrap();
        assert_eq!(m.models.len(), 1);
        assert_eq!(m.predict_class(&ds).unwrap(), y);
    }

    #[test]
    fn three_classes_three_models() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v / 10.0).floor()).collect();
        let ds = Dataset::new(vec![Column::numeric("x", x), Column::target("y", y.clone())]).unwrap();
        let cfg = BoostConfig {
            n_trees: 30,
            learning_rate: 0.5,
            ..BoostConfig::default()
        };
        let m: OneVsRest<f64> = train_one_vs_rest(&ds, &cfg).unwrap();
        assert_eq!(m.models.len(), 3);
        assert_eq!(m.predict_class(&ds).unwrap(), y);
    }
}
