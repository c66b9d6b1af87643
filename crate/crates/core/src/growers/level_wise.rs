use super::{DecisionTree, GrowContext, Node, WorkNode};
use crate::Scalar;

/// Depth-first by level: every splittable node of a depth is expanded before
/// any node of the next. Stops at `max_depth` or when no node has a
/// positive-gain split.
pub fn grow_level_wise<T: Scalar>(ctx: &GrowContext<T>, instances: &[usize]) -> DecisionTree<T> {
    let mut nodes: Vec<Node<T>> = vec![Node::Leaf { weight: T::zero() }];
    let mut level: Vec<(usize, WorkNode<T>)> = vec![(0, ctx.root(instances))];

    while !level.is_empty() {
        let mut next = Vec::new();
        for (id, work) in level {
            let split = if work.depth < ctx.params.max_depth {
                ctx.best_split(&work)
            } else {
                None
            };
            let Some(c) = split else {
                nodes[id] = Node::Leaf {
                    weight: ctx.leaf_value(&work.stats),
                };
                continue;
            };
            let (l, r) = ctx.split_node(work, c.feature, c.threshold, c.default_left);
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { weight: T::zero() });
            nodes.push(Node::Leaf { weight: T::zero() });
            nodes[id] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                default_left: c.default_left,
                left: li,
                right: ri,
                gain: c.gain,
            };
            next.push((li, l));
            next.push((ri, r));
        }
        level = next;
    }
    DecisionTree {
        nodes,
        level_splits: None,
    }
}
