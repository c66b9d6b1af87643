//! Tree construction: leaf weights, split gain, the exact and histogram split
//! finders and the level-wise, leaf-wise and oblivious growth strategies.

pub mod histogram;
mod leaf_wise;
mod level_wise;
pub mod node;
mod oblivious;
pub mod split;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boosting::GradientPair;
use crate::dataset::FeatureMatrix;
use crate::Scalar;

pub use histogram::{build_histogram, Histogram, HistogramSource};
pub use leaf_wise::grow_leaf_wise;
pub use level_wise::grow_level_wise;
pub use node::{leaf_weight, split_gain, NodeStats};
pub use oblivious::grow_oblivious;
pub use split::{find_best_split_histogram, find_best_split_presorted, SplitCandidate};
pub use tree::{DecisionTree, LevelSplit, Node};

#[derive(Debug, Error, PartialEq)]
pub enum GrowError {
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error("invalid tree parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, GrowError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitFinder {
    /// Exact enumeration over sorted raw values.
    Presorted,
    #[default]
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GrowerKind {
    #[default]
    LevelWise,
    LeafWise,
    Oblivious,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams<T> {
    pub lambda: T,
    pub gamma: T,
    pub max_depth: usize,
    /// Only bounds leaf-wise growth.
    pub max_leaves: usize,
    pub min_child_hessian: T,
    pub finder: SplitFinder,
}

impl<T: Scalar> Default for TreeParams<T> {
    fn default() -> Self {
        Self {
            lambda: T::one(),
            gamma: T::zero(),
            max_depth: 6,
            max_leaves: 31,
            min_child_hessian: T::one(),
            finder: SplitFinder::Histogram,
        }
    }
}

impl<T: Scalar> TreeParams<T> {
    pub fn validate(&self, grower: GrowerKind) -> Result<()> {
        if !(self.lambda >= T::zero()) || !(self.gamma >= T::zero()) {
            return Err(GrowError::InvalidParams(
                "lambda and gamma must be non-negative".into(),
            ));
        }
        if !(self.min_child_hessian >= T::zero()) {
            return Err(GrowError::InvalidParams(
                "min_child_hessian must be non-negative".into(),
            ));
        }
        if self.max_depth == 0 {
            return Err(GrowError::InvalidParams("max_depth must be at least 1".into()));
        }
        if grower == GrowerKind::LeafWise && self.max_leaves < 2 {
            return Err(GrowError::InvalidParams(
                "leaf-wise growth needs max_leaves >= 2".into(),
            ));
        }
        if grower == GrowerKind::Oblivious && self.finder == SplitFinder::Presorted {
            return Err(GrowError::InvalidParams(
                "oblivious trees share bin thresholds across leaves; use the histogram finder"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Everything a grower reads: raw features for routing and exact search,
/// the histogram source, this iteration's gradients and the parameters.
#[derive(Debug, Clone, Copy)]
pub struct GrowContext<'a, T> {
    pub features: &'a FeatureMatrix,
    pub source: HistogramSource<'a>,
    pub grads: &'a [GradientPair<T>],
    pub params: &'a TreeParams<T>,
}

/// An open node during growth. `instances` is kept ascending.
#[derive(Debug, Clone)]
pub(crate) struct WorkNode<T> {
    pub instances: Vec<usize>,
    pub stats: NodeStats<T>,
    pub hist: Option<Histogram<T>>,
    pub depth: usize,
}

impl<'a, T: Scalar> GrowContext<'a, T> {
    pub fn grow(&self, kind: GrowerKind, instances: &[usize]) -> DecisionTree<T> {
        match kind {
            GrowerKind::LevelWise => grow_level_wise(self, instances),
            GrowerKind::LeafWise => grow_leaf_wise(self, instances),
            GrowerKind::Oblivious => grow_oblivious(self, instances),
        }
    }

    fn uses_histograms(&self) -> bool {
        self.params.finder == SplitFinder::Histogram
    }

    pub(crate) fn root(&self, instances: &[usize]) -> WorkNode<T> {
        let mut instances = instances.to_vec();
        instances.sort_unstable();
        let stats = NodeStats::from_instances(&instances, self.grads);
        let hist = self
            .uses_histograms()
            .then(|| self.source.build(&instances, self.grads, &stats));
        WorkNode {
            instances,
            stats,
            hist,
            depth: 0,
        }
    }

    pub(crate) fn best_split(&self, node: &WorkNode<T>) -> Option<SplitCandidate<T>> {
        match &node.hist {
            Some(h) => find_best_split_histogram(h, &node.stats, self.source.binned(), self.params),
            None => find_best_split_presorted(
                &node.instances,
                self.features,
                self.grads,
                &node.stats,
                self.params,
            ),
        }
    }

    #[inline]
    pub(crate) fn goes_left(&self, feature: usize, threshold: f64, default_left: bool, row: usize) -> bool {
        let v = self.features.value(feature, row);
        if v.is_nan() {
            default_left
        } else {
            v <= threshold
        }
    }

    /// Splits a node into its children; the smaller child's histogram is
    /// built and the larger one's derived by subtraction. Children that can
    /// no longer split (`depth == max_depth`) get no histogram.
    pub(crate) fn split_node(
        &self,
        node: WorkNode<T>,
        feature: usize,
        threshold: f64,
        default_left: bool,
    ) -> (WorkNode<T>, WorkNode<T>) {
        let depth = node.depth + 1;
        let keep_hist = depth < self.params.max_depth;
        let (left, right): (Vec<usize>, Vec<usize>) = node
            .instances
            .iter()
            .partition(|&&i| self.goes_left(feature, threshold, default_left, i));
        let ls = NodeStats::from_instances(&left, self.grads);
        let rs = NodeStats::from_instances(&right, self.grads);
        let (lh, rh) = match node.hist.filter(|_| keep_hist) {
            Some(parent) => {
                if left.len() <= right.len() {
                    let lh = self.source.build(&left, self.grads, &ls);
                    let rh = parent.subtract(&lh);
                    (Some(lh), Some(rh))
                } else {
                    let rh = self.source.build(&right, self.grads, &rs);
                    let lh = parent.subtract(&rh);
                    (Some(lh), Some(rh))
                }
            }
            None => (None, None),
        };
        (
            WorkNode {
                instances: left,
                stats: ls,
                hist: lh,
                depth,
            },
            WorkNode {
                instances: right,
                stats: rs,
                hist: rh,
                depth,
            },
        )
    }

    pub(crate) fn leaf_value(&self, stats: &NodeStats<T>) -> T {
        node::safe_leaf_weight(stats, self.params.lambda)
    }
}
