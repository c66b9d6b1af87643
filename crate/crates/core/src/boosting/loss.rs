use serde::{Deserialize, Serialize};

use super::{BoostError, Result};
use crate::Scalar;

/// Raw scores are clipped to this magnitude before the sigmoid.
pub const LOGIT_CLIP: f64 = 30.0;
const BASE_PROB_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossSpec {
    /// `½(ŷ − y)²`
    #[default]
    SquaredError,
    /// Binary cross-entropy on `p = σ(ŷ)`, targets in {0, 1}.
    Logistic,
}

/// First and second derivative of the loss at the current raw score.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradientPair<T> {
    pub g: T,
    pub h: T,
}

impl<T: Scalar> GradientPair<T> {
    pub fn new(g: T, h: T) -> Self {
        Self { g, h }
    }

    pub fn scaled(self, w: T) -> Self {
        Self {
            g: self.g * w,
            h: self.h * w,
        }
    }
}

pub fn sigmoid<T: Scalar>(raw: T) -> T {
    let clip = T::lit(LOGIT_CLIP);
    let z = raw.max(-clip).min(clip);
    T::one() / (T::one() + (-z).exp())
}

impl LossSpec {
    pub fn validate_targets<T: Scalar>(self, targets: &[T]) -> Result<()> {
        if self == LossSpec::Logistic {
            if let Some((i, y)) = targets
                .iter()
                .enumerate()
                .find(|(_, &y)| y != T::zero() && y != T::one())
            {
                return Err(BoostError::InvalidTarget(format!(
                    "logistic loss needs targets in {{0, 1}}; row {i} has {y}"
                )));
            }
        }
        if let Some(i) = targets.iter().position(|y| !y.is_finite()) {
            return Err(BoostError::InvalidTarget(format!("row {i} has a non-finite target")));
        }
        Ok(())
    }

    #[inline]
    pub fn gradient<T: Scalar>(self, y: T, raw: T) -> GradientPair<T> {
        match self {
            LossSpec::SquaredError => GradientPair::new(raw - y, T::one()),
            LossSpec::Logistic => {
                let p = sigmoid(raw);
                GradientPair::new(p - y, p * (T::one() - p))
            }
        }
    }

    /// Loss of one instance.
    pub fn value<T: Scalar>(self, y: T, raw: T) -> T {
        match self {
            LossSpec::SquaredError => {
                let r = raw - y;
                T::lit(0.5) * r * r
            }
            LossSpec::Logistic => {
                // log(1 + e^z) - y z, evaluated without overflow
                let z = raw;
                let softplus = if z > T::zero() {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                };
                softplus - y * z
            }
        }
    }

    /// Maps a raw score to the prediction scale: identity for squared error,
    /// probability for logistic.
    pub fn transform<T: Scalar>(self, raw: T) -> T {
        match self {
            LossSpec::SquaredError => raw,
            LossSpec::Logistic => sigmoid(raw),
        }
    }
}

pub fn compute_gradients<T: Scalar>(
    loss: LossSpec,
    targets: &[T],
    predictions: &[T],
) -> Result<Vec<GradientPair<T>>> {
    if targets.len() != predictions.len() {
        return Err(BoostError::InvalidArgument(format!(
            "{} targets but {} predictions",
            targets.len(),
            predictions.len()
        )));
    }
    loss.validate_targets(targets)?;
    Ok(targets
        .iter()
        .zip(predictions)
        .map(|(&y, &p)| loss.gradient(y, p))
        .collect())
}

/// Mean target for squared error, clipped log-odds for logistic.
pub fn init_base_score<T: Scalar>(loss: LossSpec, targets: &[T]) -> Result<T> {
    if targets.is_empty() {
        return Err(BoostError::EmptyDataset);
    }
    let n = T::from_usize_lossy(targets.len());
    let mean = targets.iter().copied().sum::<T>() / n;
    Ok(match loss {
        LossSpec::SquaredError => mean,
        LossSpec::Logistic => {
            let lo = T::lit(BASE_PROB_CLIP);
            let p = mean.max(lo).min(T::one() - lo);
            (p / (T::one() - p)).ln()
        }
    })
}
