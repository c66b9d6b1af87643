use super::split::candidate_gain;
use super::{DecisionTree, GrowContext, LevelSplit, Node, NodeStats, WorkNode};
use crate::Scalar;

struct LevelChoice<T> {
    feature: usize,
    threshold: f64,
    default_left: bool,
    score: T,
}

/// Score of one shared cut: the sum of the valid per-leaf gains.
fn shared_gains<T: Scalar>(
    ctx: &GrowContext<T>,
    lefts: impl Iterator<Item = (NodeStats<T>, NodeStats<T>)>,
) -> (T, Vec<T>) {
    let mut total = T::zero();
    let gains = lefts
        .map(|(left, parent)| {
            let g = candidate_gain(&left, &parent, ctx.params).map_or(T::zero(), |(g, _)| g);
            total = total + g;
            g
        })
        .collect();
    (total, gains)
}

fn choose_level<T: Scalar>(ctx: &GrowContext<T>, leaves: &[WorkNode<T>]) -> Option<LevelChoice<T>> {
    let binned = ctx.source.binned();
    let mut best: Option<LevelChoice<T>> = None;
    let mut offer = |feature, threshold, default_left, score: T| {
        if best.as_ref().map_or(true, |b| score > b.score) {
            best = Some(LevelChoice {
                feature,
                threshold,
                default_left,
                score,
            });
        }
    };
    for f in 0..binned.n_features() {
        let edges = binned.boundaries(f);
        let n_real = edges.len();
        let hists: Vec<&[NodeStats<T>]> = leaves
            .iter()
            .map(|l| l.hist.as_ref().expect("oblivious leaves carry histograms").feature(f))
            .collect();
        let any_missing = hists.iter().any(|h| h[n_real].count > 0);
        let mut prefixes = vec![NodeStats::default(); leaves.len()];
        for k in 0..n_real {
            for (p, h) in prefixes.iter_mut().zip(&hists) {
                *p += h[k];
            }
            if k + 1 == n_real {
                break;
            }
            let with_missing = prefixes.iter().zip(&hists).zip(leaves).map(|((&p, h), l)| (p + h[n_real], l.stats));
            offer(f, edges[k], true, shared_gains(ctx, with_missing).0);
            if any_missing {
                let without = prefixes.iter().zip(leaves).map(|(&p, l)| (p, l.stats));
                offer(f, edges[k], false, shared_gains(ctx, without).0);
            }
        }
        if any_missing {
            let without = prefixes.iter().zip(leaves).map(|(&p, l)| (p, l.stats));
            offer(f, f64::INFINITY, false, shared_gains(ctx, without).0);
        }
    }
    best.filter(|b| b.score > T::zero())
}

/// Balanced tree: each level applies one (feature, threshold) to every leaf,
/// chosen to maximize the summed gain, giving `2^depth` leaves. Leaves that
/// receive no instances get weight 0.
pub fn grow_oblivious<T: Scalar>(ctx: &GrowContext<T>, instances: &[usize]) -> DecisionTree<T> {
    let mut leaves = vec![ctx.root(instances)];
    let mut levels: Vec<(LevelSplit<T>, Vec<T>)> = Vec::new();

    while levels.len() < ctx.params.max_depth {
        let Some(choice) = choose_level(ctx, &leaves) else {
            break;
        };
        let (_, gains) = shared_gains(
            ctx,
            leaves.iter().map(|l| {
                let left = NodeStats::from_instances(
                    &l.instances
                        .iter()
                        .copied()
                        .filter(|&i| ctx.goes_left(choice.feature, choice.threshold, choice.default_left, i))
                        .collect::<Vec<_>>(),
                    ctx.grads,
                );
                (left, l.stats)
            }),
        );
        levels.push((
            LevelSplit {
                feature: choice.feature,
                threshold: choice.threshold,
                default_left: choice.default_left,
                gain: choice.score,
            },
            gains,
        ));
        leaves = leaves
            .into_iter()
            .flat_map(|l| {
                let (a, b) = ctx.split_node(l, choice.feature, choice.threshold, choice.default_left);
                [a, b]
            })
            .collect();
    }

    let depth = levels.len();
    let mut nodes = Vec::with_capacity((1 << (depth + 1)) - 1);
    for (l, (split, gains)) in levels.iter().enumerate() {
        let first_child = (1usize << (l + 1)) - 1;
        for (j, &gain) in gains.iter().enumerate() {
            nodes.push(Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                default_left: split.default_left,
                left: first_child + 2 * j,
                right: first_child + 2 * j + 1,
                gain,
            });
        }
    }
    for leaf in &leaves {
        nodes.push(Node::Leaf {
            weight: ctx.leaf_value(&leaf.stats),
        });
    }
    DecisionTree {
        nodes,
        level_splits: Some(levels.into_iter().map(|(s, _)| s).collect()),
    }
}
