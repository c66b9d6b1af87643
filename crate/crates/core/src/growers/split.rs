use super::histogram::Histogram;
use super::node::gain_with_parent;
use super::{NodeStats, TreeParams};
use crate::boosting::GradientPair;
use crate::dataset::binning::midpoint;
use crate::dataset::{BinnedDataset, FeatureMatrix};
use crate::Scalar;

/// Best split of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate<T> {
    pub feature: usize,
    /// Raw-value threshold: `value <= threshold` goes left.
    pub threshold: f64,
    /// Last bin sent left, when found from a histogram.
    pub bin: Option<usize>,
    pub default_left: bool,
    pub gain: T,
    pub left: NodeStats<T>,
    pub right: NodeStats<T>,
}

#[inline]
pub(crate) fn child_ok<T: Scalar>(s: &NodeStats<T>, params: &TreeParams<T>) -> bool {
    s.count >= 1 && s.sum_h >= params.min_child_hessian && s.sum_h + params.lambda > T::zero()
}

/// Gain of sending `left` left when the node holds `parent`, or `None` when a
/// child is empty or violates the hessian guard.
#[inline]
pub(crate) fn candidate_gain<T: Scalar>(
    left: &NodeStats<T>,
    parent: &NodeStats<T>,
    params: &TreeParams<T>,
) -> Option<(T, NodeStats<T>)> {
    let right = *parent - *left;
    if !child_ok(left, params) || !child_ok(&right, params) {
        return None;
    }
    Some((
        gain_with_parent(left, &right, parent, params.lambda, params.gamma),
        right,
    ))
}

/// Keeps the first candidate with the strictly largest gain, so the
/// enumeration order (feature, then threshold, then default_left = true
/// before false) is the tie rule.
struct Tracker<'p, T> {
    parent: NodeStats<T>,
    params: &'p TreeParams<T>,
    best: Option<SplitCandidate<T>>,
}

impl<'p, T: Scalar> Tracker<'p, T> {
    fn new(parent: NodeStats<T>, params: &'p TreeParams<T>) -> Self {
        Self {
            parent,
            params,
            best: None,
        }
    }

    #[inline]
    fn offer(
        &mut self,
        feature: usize,
        threshold: f64,
        bin: Option<usize>,
        default_left: bool,
        left: NodeStats<T>,
    ) {
        let Some((gain, right)) = candidate_gain(&left, &self.parent, self.params) else {
            return;
        };
        if self.best.as_ref().map_or(true, |b| gain > b.gain) {
            self.best = Some(SplitCandidate {
                feature,
                threshold,
                bin,
                default_left,
                gain,
                left,
                right,
            });
        }
    }

    /// Offers both missing-value directions for a cut whose non-missing left
    /// side is `prefix`.
    #[inline]
    fn offer_cut(
        &mut self,
        feature: usize,
        threshold: f64,
        bin: Option<usize>,
        prefix: NodeStats<T>,
        missing: NodeStats<T>,
    ) {
        self.offer(feature, threshold, bin, true, prefix + missing);
        if missing.count > 0 {
            self.offer(feature, threshold, bin, false, prefix);
        }
    }

    fn finish(self) -> Option<SplitCandidate<T>> {
        self.best.filter(|b| b.gain > T::zero())
    }
}

/// Exact split search: every midpoint between consecutive distinct values of
/// every feature within the node. `instances` must be ascending and `parent`
/// their summed statistics.
pub fn find_best_split_presorted<T: Scalar>(
    instances: &[usize],
    features: &FeatureMatrix,
    grads: &[GradientPair<T>],
    parent: &NodeStats<T>,
    params: &TreeParams<T>,
) -> Option<SplitCandidate<T>> {
    if instances.len() < 2 {
        return None;
    }
    let mut tracker = Tracker::new(*parent, params);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(instances.len());
    for f in 0..features.n_features() {
        let column = features.column(f);
        order.clear();
        let mut missing = NodeStats::default();
        for &i in instances {
            let v = column[i];
            if v.is_nan() {
                missing.push(grads[i]);
            } else {
                order.push((v, i));
            }
        }
        // stable: equal values keep ascending instance order
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut prefix = NodeStats::default();
        let mut k = 0;
        while k < order.len() {
            let v = order[k].0;
            let mut group = NodeStats::default();
            while k < order.len() && order[k].0 == v {
                group.push(grads[order[k].1]);
                k += 1;
            }
            prefix += group;
            if k < order.len() {
                tracker.offer_cut(f, midpoint(v, order[k].0), None, prefix, missing);
            }
        }
        if missing.count > 0 && !order.is_empty() {
            tracker.offer(f, f64::INFINITY, None, false, prefix);
        }
    }
    tracker.finish()
}

/// Split search over cumulative bin prefixes. Thresholds are bin upper
/// edges; the missing bin is tried on both sides.
pub fn find_best_split_histogram<T: Scalar>(
    hist: &Histogram<T>,
    parent: &NodeStats<T>,
    binned: &BinnedDataset,
    params: &TreeParams<T>,
) -> Option<SplitCandidate<T>> {
    let mut tracker = Tracker::new(*parent, params);
    for f in 0..hist.n_features() {
        let bins = hist.feature(f);
        let edges = binned.boundaries(f);
        let n_real = edges.len();
        let missing = bins[n_real];
        let Some(last) = bins[..n_real].iter().rposition(|b| b.count > 0) else {
            continue;
        };
        let mut prefix = NodeStats::default();
        for k in 0..last {
            prefix += bins[k];
            // cut right after each non-empty bin, as the exact finder does
            if bins[k].count > 0 {
                tracker.offer_cut(f, edges[k], Some(k), prefix, missing);
            }
        }
        prefix += bins[last];
        if missing.count > 0 {
            tracker.offer(f, f64::INFINITY, Some(n_real - 1), false, prefix);
        }
    }
    tracker.finish()
}
