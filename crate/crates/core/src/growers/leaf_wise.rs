use super::{DecisionTree, GrowContext, Node, SplitCandidate, WorkNode};
use crate::Scalar;

struct OpenLeaf<T> {
    id: usize,
    work: WorkNode<T>,
    best: Option<SplitCandidate<T>>,
}

/// Best-first growth: repeatedly splits the open leaf with the largest gain
/// (ties to the earliest created) until `max_leaves`, the depth bound, or no
/// positive gain remains.
pub fn grow_leaf_wise<T: Scalar>(ctx: &GrowContext<T>, instances: &[usize]) -> DecisionTree<T> {
    let open = |id: usize, work: WorkNode<T>| {
        let best = if work.depth < ctx.params.max_depth {
            ctx.best_split(&work)
        } else {
            None
        };
        OpenLeaf { id, work, best }
    };

    let mut nodes: Vec<Node<T>> = vec![Node::Leaf { weight: T::zero() }];
    let mut leaves = vec![open(0, ctx.root(instances))];

    while leaves.len() < ctx.params.max_leaves {
        // leaves stay ordered by id, so the first maximum is the earliest
        let mut pick: Option<usize> = None;
        for (k, leaf) in leaves.iter().enumerate() {
            if let Some(c) = &leaf.best {
                if pick.map_or(true, |p| c.gain > leaves[p].best.as_ref().unwrap().gain) {
                    pick = Some(k);
                }
            }
        }
        let Some(k) = pick else { break };
        let leaf = leaves.remove(k);
        let c = leaf.best.expect("picked leaves have a split");
        let (l, r) = ctx.split_node(leaf.work, c.feature, c.threshold, c.default_left);
        let (li, ri) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { weight: T::zero() });
        nodes.push(Node::Leaf { weight: T::zero() });
        nodes[leaf.id] = Node::Split {
            feature: c.feature,
            threshold: c.threshold,
            default_left: c.default_left,
            left: li,
            right: ri,
            gain: c.gain,
        };
        leaves.push(open(li, l));
        leaves.push(open(ri, r));
    }

    for leaf in leaves {
        nodes[leaf.id] = Node::Leaf {
            weight: ctx.leaf_value(&leaf.work.stats),
        };
    }
    DecisionTree {
        nodes,
        level_splits: None,
    }
}
