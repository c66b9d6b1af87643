use serde::{Deserialize, Serialize};

use super::{BoostError, LossSpec, Result};
use crate::growers::{GrowerKind, SplitFinder, TreeParams};
use crate::strategies::goss::validate_fractions;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossParams {
    /// Fraction kept by largest `|g|`.
    pub a: f64,
    /// Sample rate of the remainder.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedParams {
    pub n_permutations: usize,
    pub n_blocks: usize,
}

impl Default for OrderedParams {
    fn default() -> Self {
        Self {
            n_permutations: 1,
            n_blocks: 8,
        }
    }
}

/// Training hyperparameters. Serialized verbatim into model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub loss: LossSpec,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub max_depth: usize,
    pub max_leaves: usize,
    pub min_child_hessian: f64,
    pub max_bins: usize,
    pub grower: GrowerKind,
    pub finder: SplitFinder,
    pub goss: Option<GossParams>,
    /// `max_conflicts` for exclusive feature bundling.
    pub efb: Option<usize>,
    pub ordered: Option<OrderedParams>,
    pub seed: u64,
    /// Start from a raw score of 0 instead of the mean / log-odds.
    pub zero_base_score: bool,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            loss: LossSpec::SquaredError,
            n_trees: 100,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            max_depth: 6,
            max_leaves: 31,
            min_child_hessian: 1.0,
            max_bins: 256,
            grower: GrowerKind::LevelWise,
            finder: SplitFinder::Histogram,
            goss: None,
            efb: None,
            ordered: None,
            seed: 0,
            zero_base_score: false,
        }
    }
}

impl BoostConfig {
    pub fn tree_params<T: Scalar>(&self) -> TreeParams<T> {
        TreeParams {
            lambda: T::lit(self.lambda),
            gamma: T::lit(self.gamma),
            max_depth: self.max_depth,
            max_leaves: self.max_leaves,
            min_child_hessian: T::lit(self.min_child_hessian),
            finder: self.finder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BoostError::InvalidConfig(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate must be in (0, 1], got {}", self.learning_rate));
        }
        if !(2..=u16::MAX as usize).contains(&self.max_bins) {
            return bad(format!("max_bins must be in [2, 65535], got {}", self.max_bins));
        }
        self.tree_params::<f64>()
            .validate(self.grower)
            .map_err(|e| BoostError::InvalidConfig(e.to_string()))?;
        if let Some(g) = self.goss {
            if self.grower != GrowerKind::LeafWise {
                return bad("GOSS requires the leaf-wise grower".into());
            }
            validate_fractions(g.a, g.b).map_err(|e| BoostError::InvalidConfig(e.to_string()))?;
            if g.a + g.b > 1.0 + 1e-12 {
                return bad(format!("GOSS needs a + b <= 1, got {} + {}", g.a, g.b));
            }
        }
        if let Some(o) = self.ordered {
            if self.grower != GrowerKind::Oblivious {
                return bad("ordered boosting requires the oblivious grower".into());
            }
            if o.n_blocks == 0 || o.n_permutations == 0 {
                return bad("ordered boosting needs n_blocks >= 1 and n_permutations >= 1".into());
            }
        }
        if self.efb.is_some() && self.finder == SplitFinder::Presorted {
            return bad("feature bundling works on histograms; use the histogram finder".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_grower_pairing() {
        let mut c = BoostConfig {
            goss: Some(GossParams { a: 0.2, b: 0.1 }),
            ..BoostConfig::default()
        };
        assert!(c.validate().is_err());
        c.grower = GrowerKind::LeafWise;
        assert!(c.validate().is_ok());
        c.goss = Some(GossParams { a: 0.7, b: 0.5 });
        assert!(c.validate().is_err());

        let mut c = BoostConfig {
            ordered: Some(OrderedParams::default()),
            ..BoostConfig::default()
        };
        assert!(c.validate().is_err());
        c.grower = GrowerKind::Oblivious;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn ranges() {
        for c in [
            BoostConfig { learning_rate: 0.0, ..Default::default() },
            BoostConfig { learning_rate: 1.5, ..Default::default() },
            BoostConfig { lambda: -1.0, ..Default::default() },
            BoostConfig { max_bins: 1, ..Default::default() },
            BoostConfig { max_depth: 0, ..Default::default() },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
