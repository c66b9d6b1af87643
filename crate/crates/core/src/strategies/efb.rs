use serde::{Deserialize, Serialize};

use super::{Result, StrategyError};
use crate::boosting::GradientPair;
use crate::dataset::{BinnedDataset, FeatureMatrix};
use crate::growers::{Histogram, NodeStats};
use crate::Scalar;

/// Features merged into one column. Member `k`'s nonzero values are shifted
/// by `offsets[k]`, so they occupy `(offsets[k], offsets[k] + ranges[k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub members: Vec<usize>,
    pub offsets: Vec<f64>,
    /// Largest value of each member.
    pub ranges: Vec<f64>,
    /// Rows where two members are nonzero together, summed over pairs.
    pub conflicts: usize,
}

impl FeatureBundle {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// Bundling is only lossless for features whose "off" state is exactly 0:
/// no missing values, no negatives, and (when binned) 0 alone in its bin.
fn eligible(features: &FeatureMatrix, binned: Option<&BinnedDataset>, f: usize) -> bool {
    let col = features.column(f);
    if col.iter().any(|v| v.is_nan() || *v < 0.0) {
        return false;
    }
    match binned {
        None => true,
        Some(b) => {
            let zero = b.bin_of(f, 0.0);
            col.iter()
                .enumerate()
                .all(|(r, &v)| v == 0.0 || b.bin(f, r) != zero)
        }
    }
}

fn bundle_with(
    features: &FeatureMatrix,
    binned: Option<&BinnedDataset>,
    max_conflicts: usize,
) -> Vec<FeatureBundle> {
    let n = features.n_rows();
    let nonzero: Vec<Vec<usize>> = (0..features.n_features())
        .map(|f| {
            let col = features.column(f);
            (0..n).filter(|&r| col[r] != 0.0).collect()
        })
        .collect();
    let (candidates, loners): (Vec<usize>, Vec<usize>) =
        (0..features.n_features()).partition(|&f| eligible(features, binned, f));
    let mut order = candidates;
    // stable: equal counts keep feature order
    order.sort_by(|&a, &b| nonzero[b].len().cmp(&nonzero[a].len()));

    struct Open {
        members: Vec<usize>,
        used: Vec<u32>,
        conflicts: usize,
    }
    let mut open: Vec<Open> = Vec::new();
    for f in order {
        let slot = open.iter().position(|o| {
            let added: usize = nonzero[f].iter().map(|&r| o.used[r] as usize).sum();
            o.conflicts + added <= max_conflicts
        });
        let idx = slot.unwrap_or_else(|| {
            open.push(Open {
                members: Vec::new(),
                used: vec![0; n],
                conflicts: 0,
            });
            open.len() - 1
        });
        let o = &mut open[idx];
        o.conflicts += nonzero[f].iter().map(|&r| o.used[r] as usize).sum::<usize>();
        for &r in &nonzero[f] {
            o.used[r] += 1;
        }
        o.members.push(f);
    }

    let finish = |members: Vec<usize>, conflicts: usize| {
        let ranges: Vec<f64> = members
            .iter()
            .map(|&f| features.column(f).iter().copied().fold(0.0, f64::max))
            .collect();
        let mut offsets = Vec::with_capacity(members.len());
        let mut acc = 0.0;
        for r in &ranges {
            offsets.push(acc);
            acc += r;
        }
        FeatureBundle {
            members,
            offsets,
            ranges,
            conflicts,
        }
    };
    open.into_iter()
        .map(|o| finish(o.members, o.conflicts))
        .chain(loners.into_iter().map(|f| finish(vec![f], 0)))
        .collect()
}

/// Greedy exclusive feature bundling. Features are visited by nonzero count
/// descending; each joins the first bundle whose total pairwise conflicts
/// stay within `max_conflicts`, otherwise it opens a new bundle. Features
/// with missing or negative values stay alone.
pub fn efb_bundle(features: &FeatureMatrix, max_conflicts: usize) -> Vec<FeatureBundle> {
    bundle_with(features, None, max_conflicts)
}

/// As [`efb_bundle`], additionally keeping alone any feature whose zero bin
/// also holds nonzero values.
pub fn efb_bundle_binned(
    features: &FeatureMatrix,
    binned: &BinnedDataset,
    max_conflicts: usize,
) -> Vec<FeatureBundle> {
    bundle_with(features, Some(binned), max_conflicts)
}

/// One column per bundle. A row whose members are all zero encodes to 0;
/// on a conflicting row the first nonzero member wins.
pub fn efb_encode(features: &FeatureMatrix, bundles: &[FeatureBundle]) -> Result<FeatureMatrix> {
    let n = features.n_rows();
    let mut names = Vec::with_capacity(bundles.len());
    let mut columns = Vec::with_capacity(bundles.len());
    for bundle in bundles {
        if bundle.is_singleton() {
            let f = bundle.members[0];
            names.push(features.names()[f].clone());
            columns.push(features.column(f).to_vec());
            continue;
        }
        let label: Vec<&str> = bundle.members.iter().map(|&f| features.names()[f].as_str()).collect();
        names.push(label.join("+"));
        let mut col = vec![0.0; n];
        for (r, slot) in col.iter_mut().enumerate() {
            for (k, &f) in bundle.members.iter().enumerate() {
                let v = features.value(f, r);
                if v != 0.0 {
                    *slot = bundle.offsets[k] + v;
                    break;
                }
            }
        }
        columns.push(col);
    }
    FeatureMatrix::new(names, columns).map_err(|e| StrategyError::InvalidArgument(e.to_string()))
}

/// Inverse of the offset encoding: `None` when every member is zero,
/// otherwise the member (as a feature index) and its value.
pub fn efb_decode(value: f64, bundle: &FeatureBundle) -> Result<Option<(usize, f64)>> {
    if bundle.is_singleton() {
        return Ok(Some((bundle.members[0], value)));
    }
    if value == 0.0 {
        return Ok(None);
    }
    for (k, &f) in bundle.members.iter().enumerate() {
        let lo = bundle.offsets[k];
        if value > lo && value <= lo + bundle.ranges[k] {
            return Ok(Some((f, value - lo)));
        }
    }
    Err(StrategyError::InvalidArgument(format!(
        "value {value} lies outside every member range of the bundle"
    )))
}

#[derive(Debug, Clone)]
struct BinBundle {
    members: Vec<usize>,
    /// Bundle code of member bin `b` is `bin_offsets[k] + 1 + b`.
    bin_offsets: Vec<usize>,
    zero_bins: Vec<usize>,
    n_codes: usize,
    codes: Vec<u32>,
}

/// Binned features with bundles stored as single code columns. Histograms
/// are accumulated per bundle and expanded back to per-feature histograms,
/// each member's zero bin recovered as the node total minus its other bins.
#[derive(Debug, Clone)]
pub struct BundledBins {
    binned: BinnedDataset,
    bundles: Vec<FeatureBundle>,
    groups: Vec<BinBundle>,
}

impl BundledBins {
    pub fn new(binned: BinnedDataset, bundles: Vec<FeatureBundle>) -> Result<Self> {
        let mut seen = vec![false; binned.n_features()];
        for &f in bundles.iter().flat_map(|b| &b.members) {
            if f >= seen.len() || std::mem::replace(&mut seen[f], true) {
                return Err(StrategyError::InvalidArgument(format!(
                    "feature {f} is missing from the data or bundled twice"
                )));
            }
        }
        if let Some(f) = seen.iter().position(|s| !s) {
            return Err(StrategyError::InvalidArgument(format!("feature {f} is in no bundle")));
        }
        let n = binned.n_rows();
        let groups = bundles
            .iter()
            .filter(|b| !b.is_singleton())
            .map(|b| {
                let mut bin_offsets = Vec::with_capacity(b.members.len());
                let mut acc = 0;
                for &f in &b.members {
                    bin_offsets.push(acc);
                    acc += binned.total_bins(f);
                }
                let zero_bins: Vec<usize> = b.members.iter().map(|&f| binned.bin_of(f, 0.0)).collect();
                let codes = (0..n)
                    .map(|r| {
                        b.members
                            .iter()
                            .enumerate()
                            .find_map(|(k, &f)| {
                                let bin = binned.bin(f, r);
                                (bin != zero_bins[k]).then(|| (bin_offsets[k] + 1 + bin) as u32)
                            })
                            .unwrap_or(0)
                    })
                    .collect();
                BinBundle {
                    members: b.members.clone(),
                    bin_offsets,
                    zero_bins,
                    n_codes: acc + 1,
                    codes,
                }
            })
            .collect();
        Ok(Self {
            binned,
            bundles,
            groups,
        })
    }

    pub fn binned(&self) -> &BinnedDataset {
        &self.binned
    }

    pub fn bundles(&self) -> &[FeatureBundle] {
        &self.bundles
    }

    /// Number of histogram columns actually scanned per node.
    pub fn n_columns(&self) -> usize {
        self.bundles.len()
    }

    pub fn build_histogram<T: Scalar>(
        &self,
        instances: &[usize],
        grads: &[GradientPair<T>],
        node: &NodeStats<T>,
    ) -> Histogram<T> {
        let mut hist = Histogram::zeros(&self.binned);
        for bundle in self.bundles.iter().filter(|b| b.is_singleton()) {
            let f = bundle.members[0];
            let out = hist.feature_mut(f);
            let col = self.binned.column(f);
            for &i in instances {
                out[col.get(i)].push(grads[i]);
            }
        }
        for group in &self.groups {
            let mut codes = vec![NodeStats::default(); group.n_codes];
            for &i in instances {
                codes[group.codes[i] as usize].push(grads[i]);
            }
            for (k, &f) in group.members.iter().enumerate() {
                let out = hist.feature_mut(f);
                let base = group.bin_offsets[k] + 1;
                let mut others = NodeStats::default();
                for (b, slot) in out.iter_mut().enumerate() {
                    if b != group.zero_bins[k] {
                        *slot = codes[base + b];
                        others += *slot;
                    }
                }
                out[group.zero_bins[k]] = *node - others;
            }
        }
        hist
    }
}
