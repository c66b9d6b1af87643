use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Result, StrategyError};
use crate::boosting::{GradientPair, LossSpec};
use crate::Scalar;

/// One permutation `σ` cut into contiguous blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPermutation {
    pub order: Vec<usize>,
    /// Block of each instance.
    pub block_of: Vec<usize>,
    /// Instances of each block, ascending by index.
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPermutation {
    /// Instances of blocks `0..b`, ascending: the training set of prefix
    /// model `b`.
    pub fn prefix(&self, b: usize) -> Vec<usize> {
        let mut p: Vec<usize> = self.blocks[..b].iter().flatten().copied().collect();
        p.sort_unstable();
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSchedule {
    pub n_blocks: usize,
    pub permutations: Vec<BlockPermutation>,
}

/// Block sizes are `⌊n/B⌋`, the first `n mod B` blocks one larger.
pub fn ordered_schedule(n: usize, n_permutations: usize, n_blocks: usize, seed: u64) -> Result<OrderedSchedule> {
    if n_blocks == 0 || n_permutations == 0 {
        return Err(StrategyError::InvalidArgument(
            "ordered boosting needs at least one block and one permutation".into(),
        ));
    }
    if n_blocks > n {
        return Err(StrategyError::InvalidArgument(format!(
            "{n_blocks} blocks for {n} instances"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let permutations = (0..n_permutations)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let (base, extra) = (n / n_blocks, n % n_blocks);
            let mut block_of = vec![0; n];
            let mut blocks = Vec::with_capacity(n_blocks);
            let mut start = 0;
            for b in 0..n_blocks {
                let len = base + usize::from(b < extra);
                let mut members = order[start..start + len].to_vec();
                for &i in &members {
                    block_of[i] = b;
                }
                members.sort_unstable();
                blocks.push(members);
                start += len;
            }
            BlockPermutation {
                order,
                block_of,
                blocks,
            }
        })
        .collect();
    Ok(OrderedSchedule {
        n_blocks,
        permutations,
    })
}

/// Gradients where instance `i` is evaluated at the raw score of the prefix
/// model of its own block, `prefix_scores[p][block_p(i)][i]`, averaged over
/// permutations.
pub fn ordered_gradients<T: Scalar>(
    schedule: &OrderedSchedule,
    loss: LossSpec,
    targets: &[T],
    prefix_scores: &[Vec<Vec<T>>],
) -> Result<Vec<GradientPair<T>>> {
    if prefix_scores.len() != schedule.permutations.len()
        || prefix_scores.iter().any(|p| p.len() != schedule.n_blocks)
    {
        return Err(StrategyError::InvalidArgument(
            "one score vector per permutation and block is required".into(),
        ));
    }
    let k = T::from_usize_lossy(schedule.permutations.len());
    let mut out = vec![GradientPair::default(); targets.len()];
    for (perm, scores) in schedule.permutations.iter().zip(prefix_scores) {
        for (i, slot) in out.iter_mut().enumerate() {
            let gp = loss.gradient(targets[i], scores[perm.block_of[i]][i]);
            slot.g = slot.g + gp.g;
            slot.h = slot.h + gp.h;
        }
    }
    if schedule.permutations.len() > 1 {
        for slot in &mut out {
            slot.g = slot.g / k;
            slot.h = slot.h / k;
        }
    }
    Ok(out)
}
