use super::NodeStats;
use crate::boosting::GradientPair;
use crate::dataset::{BinColumn, BinnedDataset};
use crate::strategies::BundledBins;
use crate::Scalar;

/// Per-feature, per-bin gradient statistics of one node. The last bin of
/// every feature holds missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    offsets: Vec<usize>,
    bins: Vec<NodeStats<T>>,
}

impl<T: Scalar> Histogram<T> {
    pub fn zeros(binned: &BinnedDataset) -> Self {
        let mut offsets = Vec::with_capacity(binned.n_features() + 1);
        let mut total = 0;
        for f in 0..binned.n_features() {
            offsets.push(total);
            total += binned.total_bins(f);
        }
        offsets.push(total);
        Self {
            offsets,
            bins: vec![NodeStats::default(); total],
        }
    }

    pub fn n_features(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn feature(&self, f: usize) -> &[NodeStats<T>] {
        &self.bins[self.offsets[f]..self.offsets[f + 1]]
    }

    pub fn feature_mut(&mut self, f: usize) -> &mut [NodeStats<T>] {
        &mut self.bins[self.offsets[f]..self.offsets[f + 1]]
    }

    pub fn feature_total(&self, f: usize) -> NodeStats<T> {
        self.feature(f)
            .iter()
            .fold(NodeStats::default(), |acc, &b| acc + b)
    }

    /// Elementwise `self − other`: the sibling histogram.
    pub fn subtract(&self, other: &Histogram<T>) -> Histogram<T> {
        debug_assert_eq!(self.offsets, other.offsets);
        Histogram {
            offsets: self.offsets.clone(),
            bins: self
                .bins
                .iter()
                .zip(&other.bins)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

#[inline]
fn accumulate<T: Scalar>(
    out: &mut [NodeStats<T>],
    column: &BinColumn,
    instances: &[usize],
    grads: &[GradientPair<T>],
) {
    match column {
        BinColumn::U8(bins) => {
            for &i in instances {
                out[bins[i] as usize].push(grads[i]);
            }
        }
        BinColumn::U16(bins) => {
            for &i in instances {
                out[bins[i] as usize].push(grads[i]);
            }
        }
    }
}

/// Accumulates `(g, h, count)` per feature per bin over the node's instances,
/// in the order they are listed.
pub fn build_histogram<T: Scalar>(
    instances: &[usize],
    binned: &BinnedDataset,
    grads: &[GradientPair<T>],
) -> Histogram<T> {
    let mut hist = Histogram::zeros(binned);
    for f in 0..binned.n_features() {
        accumulate(hist.feature_mut(f), binned.column(f), instances, grads);
    }
    hist
}

/// Where node histograms come from: the binned features directly, or
/// exclusive feature bundles expanded back to per-feature histograms.
#[derive(Debug, Clone, Copy)]
pub enum HistogramSource<'a> {
    Direct(&'a BinnedDataset),
    Bundled(&'a BundledBins),
}

impl<'a> HistogramSource<'a> {
    pub fn binned(&self) -> &'a BinnedDataset {
        match self {
            HistogramSource::Direct(b) => b,
            HistogramSource::Bundled(b) => b.binned(),
        }
    }

    pub fn build<T: Scalar>(
        &self,
        instances: &[usize],
        grads: &[GradientPair<T>],
        node: &NodeStats<T>,
    ) -> Histogram<T> {
        match self {
            HistogramSource::Direct(b) => build_histogram(instances, b, grads),
            HistogramSource::Bundled(b) => b.build_histogram(instances, grads, node),
        }
    }
}
