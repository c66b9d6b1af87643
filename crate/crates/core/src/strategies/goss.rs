use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Result, StrategyError};
use crate::boosting::GradientPair;
use crate::dataset::FeatureMatrix;
use crate::Scalar;

/// One iteration's gradient-based one-side sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GossSample {
    pub a: f64,
    pub b: f64,
    /// `A`: the `⌈a·n⌉` largest `|g|`, ascending by index.
    pub top_set: Vec<usize>,
    /// `B`: drawn from the complement of `A`, ascending by index.
    pub sampled_set: Vec<usize>,
    /// Weight `(1 − a)/b` applied to `B`; 0 when `B` is empty.
    pub amplification: f64,
}

/// `x` rounded up, unless it is within 1e-9 of an integer (guards `0.1·30`).
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub fn validate_fractions(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(StrategyError::InvalidArgument(format!("GOSS a must be in (0, 1], got {a}")));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(StrategyError::InvalidArgument(format!("GOSS b must be in [0, 1], got {b}")));
    }
    if a < 1.0 && b == 0.0 {
        return Err(StrategyError::InvalidArgument(
            "GOSS with a < 1 needs b > 0: the amplification (1 - a)/b is undefined".into(),
        ));
    }
    Ok(())
}

/// Keeps the top `⌈a·n⌉` instances by `|g|` (ties to the lower index) and
/// samples `round(b·|Aᶜ|)` of the rest without replacement.
pub fn goss_select<T: Scalar>(grads: &[GradientPair<T>], a: f64, b: f64, seed: u64) -> Result<GossSample> {
    validate_fractions(a, b)?;
    let n = grads.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| grads[j].g.abs().widen().total_cmp(&grads[i].g.abs().widen()));
    let n_top = ceil_tolerant(a * n as f64).min(n);
    let mut top_set = order[..n_top].to_vec();
    let rest = &order[n_top..];
    let n_sampled = (b * rest.len() as f64).round() as usize;
    if a < 1.0 && !rest.is_empty() && n_sampled == 0 {
        return Err(StrategyError::InvalidArgument(format!(
            "GOSS samples no small-gradient instance (b = {b}, {} candidates); the amplification is undefined",
            rest.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_set: Vec<usize> = rand::seq::index::sample(&mut rng, rest.len(), n_sampled.min(rest.len()))
        .into_iter()
        .map(|k| rest[k])
        .collect();
    top_set.sort_unstable();
    sampled_set.sort_unstable();
    let amplification = if sampled_set.is_empty() { 0.0 } else { (1.0 - a) / b };
    Ok(GossSample {
        a,
        b,
        top_set,
        sampled_set,
        amplification,
    })
}

impl GossSample {
    /// `A ∪ B`, ascending.
    pub fn instances(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.top_set.iter().chain(&self.sampled_set).copied().collect();
        all.sort_unstable();
        all
    }

    /// Gradients with `B`'s `g` and `h` multiplied by the amplification.
    /// Entries outside `A ∪ B` are left as they are; growers never read them.
    pub fn weighted<T: Scalar>(&self, grads: &[GradientPair<T>]) -> Vec<GradientPair<T>> {
        let mut out = grads.to_vec();
        let w = T::lit(self.amplification);
        for &i in &self.sampled_set {
            out[i] = grads[i].scaled(w);
        }
        out
    }
}

/// Estimated variance gain `Ṽ_j(d)` of splitting `feature` at `d`
/// (`x ≤ d` left; missing values go right), with `n` the full instance count
/// and `n_L`, `n_R` counted over `A ∪ B`. `None` when a side is empty.
pub fn goss_variance_gain<T: Scalar>(
    sample: &GossSample,
    grads: &[GradientPair<T>],
    feature: usize,
    d: f64,
    features: &FeatureMatrix,
) -> Option<T> {
    let x = features.column(feature);
    let w = T::lit(sample.amplification);
    let (mut gl, mut gr) = (T::zero(), T::zero());
    let (mut nl, mut nr) = (0usize, 0usize);
    let mut add = |i: usize, scale: T| {
        if x[i] <= d {
            gl = gl + scale * grads[i].g;
            nl += 1;
        } else {
            gr = gr + scale * grads[i].g;
            nr += 1;
        }
    };
    for &i in &sample.top_set {
        add(i, T::one());
    }
    for &i in &sample.sampled_set {
        add(i, w);
    }
    if nl == 0 || nr == 0 {
        return None;
    }
    let n = T::from_usize_lossy(grads.len());
    Some((gl * gl / T::from_usize_lossy(nl) + gr * gr / T::from_usize_lossy(nr)) / n)
}
