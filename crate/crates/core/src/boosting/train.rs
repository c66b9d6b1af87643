use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ensemble::FORMAT_VERSION;
use super::{compute_gradients, init_base_score, BoostConfig, BoostError, Ensemble, GradientPair, LossSpec, Result};
use crate::dataset::{BinnedDataset, ColumnData, Dataset, FeatureMatrix};
use crate::growers::{DecisionTree, GrowContext, HistogramSource, TreeParams};
use crate::strategies::{
    efb_bundle_binned, goss_select, ordered_gradients, ordered_schedule, BundledBins, OrderedSchedule,
};
use crate::Scalar;

/// Per-iteration record of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace<T> {
    /// Total training loss before the first tree and after each tree.
    pub losses: Vec<f64>,
    /// Gradients each main tree was fitted to.
    pub gradients: Vec<Vec<GradientPair<T>>>,
    /// Permutations and blocks used by ordered boosting.
    pub schedule: Option<OrderedSchedule>,
}

/// Numeric target values of a dataset.
pub fn target_values<T: Scalar>(ds: &Dataset) -> Result<Vec<T>> {
    let col = ds.target().ok_or(BoostError::MissingTarget)?;
    match &col.data {
        ColumnData::Numeric(v) => Ok(v.iter().map(|&y| T::lit(y)).collect()),
        ColumnData::Categorical { .. } => Err(BoostError::InvalidTarget(format!(
            "target column {} is not numeric",
            col.name()
        ))),
    }
}

pub fn train<T: Scalar>(ds: &Dataset, config: &BoostConfig) -> Result<Ensemble<T>> {
    let targets = target_values(ds)?;
    let features = FeatureMatrix::from_dataset(ds)?;
    Ok(fit(&features, &targets, config, false)?.0)
}

/// As [`train`], also returning per-iteration losses and the gradients every
/// tree was fitted to.
pub fn train_with_trace<T: Scalar>(ds: &Dataset, config: &BoostConfig) -> Result<(Ensemble<T>, TrainTrace<T>)> {
    let targets = target_values(ds)?;
    let features = FeatureMatrix::from_dataset(ds)?;
    fit(&features, &targets, config, true)
}

/// Boosting on a feature matrix with one target per row.
pub fn train_matrix<T: Scalar>(features: &FeatureMatrix, targets: &[T], config: &BoostConfig) -> Result<Ensemble<T>> {
    Ok(fit(features, targets, config, false)?.0)
}

fn total_loss<T: Scalar>(loss: LossSpec, targets: &[T], preds: &[T]) -> f64 {
    targets
        .iter()
        .zip(preds)
        .map(|(&y, &p)| loss.value(y, p).widen())
        .sum()
}

fn add_tree<T: Scalar>(preds: &mut [T], rows: impl Iterator<Item = usize>, tree: &DecisionTree<T>, features: &FeatureMatrix, lr: T) {
    for i in rows {
        preds[i] = preds[i] + lr * tree.predict_with(|f| features.value(f, i));
    }
}

/// Prefix models of ordered boosting: for every permutation and block `b`,
/// a model trained only on blocks `0..b` whose raw scores feed the gradients
/// of block `b`. Block 0 keeps the zero start score.
struct PrefixModels<T> {
    schedule: OrderedSchedule,
    scores: Vec<Vec<Vec<T>>>,
    prefixes: Vec<Vec<Vec<usize>>>,
}

impl<T: Scalar> PrefixModels<T> {
    fn new(schedule: OrderedSchedule, n: usize) -> Self {
        let scores = schedule
            .permutations
            .iter()
            .map(|_| vec![vec![T::zero(); n]; schedule.n_blocks])
            .collect();
        let prefixes = schedule
            .permutations
            .iter()
            .map(|p| (0..=schedule.n_blocks).map(|b| p.prefix(b)).collect())
            .collect();
        Self {
            schedule,
            scores,
            prefixes,
        }
    }

    fn gradients(&self, loss: LossSpec, targets: &[T]) -> Result<Vec<GradientPair<T>>> {
        Ok(ordered_gradients(&self.schedule, loss, targets, &self.scores)?)
    }

    /// One boosting step for every prefix model, each on its own gradients.
    fn advance(
        &mut self,
        loss: LossSpec,
        targets: &[T],
        features: &FeatureMatrix,
        source: HistogramSource,
        params: &TreeParams<T>,
        config: &BoostConfig,
        lr: T,
    ) {
        for (p, scores) in self.scores.iter_mut().enumerate() {
            for b in 1..self.schedule.n_blocks {
                let train_on = &self.prefixes[p][b];
                let s = &mut scores[b];
                let mut grads = vec![GradientPair::default(); targets.len()];
                for &i in train_on {
                    grads[i] = loss.gradient(targets[i], s[i]);
                }
                let ctx = GrowContext {
                    features,
                    source,
                    grads: &grads,
                    params,
                };
                let tree = ctx.grow(config.grower, train_on);
                // scores matter on the prefix and on block b itself
                add_tree(s, self.prefixes[p][b + 1].iter().copied(), &tree, features, lr);
            }
        }
    }
}

fn fit<T: Scalar>(
    features: &FeatureMatrix,
    targets: &[T],
    config: &BoostConfig,
    record_gradients: bool,
) -> Result<(Ensemble<T>, TrainTrace<T>)> {
    config.validate()?;
    let n = targets.len();
    if n == 0 {
        return Err(BoostError::EmptyDataset);
    }
    if n < 2 {
        return Err(BoostError::InvalidArgument("training needs at least 2 rows".into()));
    }
    if features.n_rows() != n {
        return Err(BoostError::InvalidArgument(format!(
            "{} feature rows for {n} targets",
            features.n_rows()
        )));
    }
    if features.n_features() == 0 {
        return Err(BoostError::InvalidArgument("no features to train on".into()));
    }
    let loss = config.loss;
    loss.validate_targets(targets)?;

    let binned = BinnedDataset::from_features(features, config.max_bins)?;
    let bundled = match config.efb {
        Some(max_conflicts) => {
            let bundles = efb_bundle_binned(features, &binned, max_conflicts);
            Some(BundledBins::new(binned.clone(), bundles)?)
        }
        None => None,
    };
    let source = match &bundled {
        Some(b) => HistogramSource::Bundled(b),
        None => HistogramSource::Direct(&binned),
    };
    let params: TreeParams<T> = config.tree_params();
    let lr = T::lit(config.learning_rate);

    // ordered boosting starts from 0: a mean over all targets would leak
    // every label into block 0's gradients
    let base_score = if config.zero_base_score || config.ordered.is_some() {
        T::zero()
    } else {
        init_base_score(loss, targets)?
    };
    let mut preds = vec![base_score; n];
    let mut trace = TrainTrace {
        losses: vec![total_loss(loss, targets, &preds)],
        gradients: Vec::new(),
        schedule: None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut prefix_models = match config.ordered {
        Some(o) => Some(PrefixModels::new(
            ordered_schedule(n, o.n_permutations, o.n_blocks, rng.gen())?,
            n,
        )),
        None => None,
    };
    if record_gradients {
        trace.schedule = prefix_models.as_ref().map(|m| m.schedule.clone());
    }
    let all: Vec<usize> = (0..n).collect();
    let mut trees = Vec::with_capacity(config.n_trees);

    for _ in 0..config.n_trees {
        let grads = match &prefix_models {
            Some(m) => m.gradients(loss, targets)?,
            None => compute_gradients(loss, targets, &preds)?,
        };
        let tree = match config.goss {
            Some(g) => {
                let sample = goss_select(&grads, g.a, g.b, rng.gen())?;
                let weighted = sample.weighted(&grads);
                let ctx = GrowContext {
                    features,
                    source,
                    grads: &weighted,
                    params: &params,
                };
                ctx.grow(config.grower, &sample.instances())
            }
            None => {
                let ctx = GrowContext {
                    features,
                    source,
                    grads: &grads,
                    params: &params,
                };
                ctx.grow(config.grower, &all)
            }
        };
        add_tree(&mut preds, 0..n, &tree, features, lr);
        if let Some(m) = &mut prefix_models {
            m.advance(loss, targets, features, source, &params, config, lr);
        }
        trees.push(tree);
        if record_gradients {
            trace.gradients.push(grads);
        }
        trace.losses.push(total_loss(loss, targets, &preds));
    }

    Ok((
        Ensemble {
            format_version: FORMAT_VERSION,
            loss,
            base_score,
            learning_rate: lr,
            feature_names: features.names().to_vec(),
            config: config.clone(),
            trees,
        },
        trace,
    ))
}
