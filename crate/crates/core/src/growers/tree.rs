use serde::{Deserialize, Serialize};

use crate::scalar::decimal17;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Node<T> {
    Leaf {
        #[serde(with = "decimal17")]
        weight: T,
    },
    Split {
        feature: usize,
        /// Rows with `value <= threshold` go left.
        #[serde(with = "decimal17::f64")]
        threshold: f64,
        /// Direction for missing values.
        default_left: bool,
        left: usize,
        right: usize,
        #[serde(with = "decimal17")]
        gain: T,
    },
}

/// The split shared by every node of one level in an oblivious tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LevelSplit<T> {
    pub feature: usize,
    #[serde(with = "decimal17::f64")]
    pub threshold: f64,
    pub default_left: bool,
    /// Gain summed over the leaves the split was applied to.
    #[serde(with = "decimal17")]
    pub gain: T,
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DecisionTree<T> {
    pub nodes: Vec<Node<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_splits: Option<Vec<LevelSplit<T>>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn leaf(weight: T) -> Self {
        Self {
            nodes: vec![Node::Leaf { weight }],
            level_splits: None,
        }
    }

    /// Index of the leaf reached by a row whose feature `f` has value `value(f)`.
    #[inline]
    pub fn leaf_index(&self, value: impl Fn(usize) -> f64) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { .. } => return idx,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let v = value(*feature);
                    let go_left = if v.is_nan() {
                        *default_left
                    } else {
                        v <= *threshold
                    };
                    idx = if go_left { *left } else { *right };
                }
            }
        }
    }

    #[inline]
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> T {
        match self.nodes[self.leaf_index(value)] {
            Node::Leaf { weight } => weight,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> T {
        self.predict_with(|f| row[f])
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// (feature, gain) of every recorded split. Oblivious trees report one
    /// entry per level.
    pub fn split_gains(&self) -> Vec<(usize, T)> {
        if let Some(levels) = &self.level_splits {
            return levels.iter().map(|l| (l.feature, l.gain)).collect();
        }
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, gain, .. } => Some((*feature, *gain)),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    pub fn leaf_weights(&self) -> Vec<T> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { weight } => Some(*weight),
                Node::Split { .. } => None,
            })
            .collect()
    }
}
