use std::ops::{Add, AddAssign, Sub};

use super::{GrowError, Result};
use crate::boosting::GradientPair;
use crate::Scalar;

/// Gradient sums over an instance set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeStats<T> {
    pub sum_g: T,
    pub sum_h: T,
    pub count: usize,
}

impl<T: Scalar> NodeStats<T> {
    pub fn new(sum_g: T, sum_h: T, count: usize) -> Self {
        Self {
            sum_g,
            sum_h,
            count,
        }
    }

    /// Sums in the order the instances are listed.
    pub fn from_instances(instances: &[usize], grads: &[GradientPair<T>]) -> Self {
        let mut s = Self::default();
        for &i in instances {
            s.push(grads[i]);
        }
        s
    }

    #[inline]
    pub fn push(&mut self, gp: GradientPair<T>) {
        self.sum_g = self.sum_g + gp.g;
        self.sum_h = self.sum_h + gp.h;
        self.count += 1;
    }
}

impl<T: Scalar> Add for NodeStats<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            sum_g: self.sum_g + rhs.sum_g,
            sum_h: self.sum_h + rhs.sum_h,
            count: self.count + rhs.count,
        }
    }
}

impl<T: Scalar> AddAssign for NodeStats<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> Sub for NodeStats<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self {
            sum_g: self.sum_g - rhs.sum_g,
            sum_h: self.sum_h - rhs.sum_h,
            count: self.count - rhs.count,
        }
    }
}

/// Optimal leaf weight `−G / (H + λ)`.
pub fn leaf_weight<T: Scalar>(stats: &NodeStats<T>, lambda: T) -> Result<T> {
    let denom = stats.sum_h + lambda;
    if !(denom > T::zero()) {
        return Err(GrowError::Degenerate(format!(
            "leaf weight denominator H + lambda = {denom} is not positive"
        )));
    }
    Ok(-stats.sum_g / denom)
}

/// Leaf weight used inside growers: empty or degenerate leaves get 0.
pub(crate) fn safe_leaf_weight<T: Scalar>(stats: &NodeStats<T>, lambda: T) -> T {
    if stats.count == 0 {
        return T::zero();
    }
    leaf_weight(stats, lambda).unwrap_or_else(|_| T::zero())
}

#[inline]
fn score<T: Scalar>(g: T, h: T, lambda: T) -> T {
    g * g / (h + lambda)
}

/// Split gain with an explicit parent, which growers pass as the directly
/// summed node statistics.
#[inline]
pub(crate) fn gain_with_parent<T: Scalar>(
    left: &NodeStats<T>,
    right: &NodeStats<T>,
    parent: &NodeStats<T>,
    lambda: T,
    gamma: T,
) -> T {
    T::lit(0.5)
        * (score(left.sum_g, left.sum_h, lambda) + score(right.sum_g, right.sum_h, lambda)
            - score(parent.sum_g, parent.sum_h, lambda))
        - gamma
}

/// Second-order gain of splitting `left ∪ right` into the two children,
/// minus the per-split penalty `gamma`.
pub fn split_gain<T: Scalar>(
    left: &NodeStats<T>,
    right: &NodeStats<T>,
    lambda: T,
    gamma: T,
) -> Result<T> {
    for (side, s) in [("left", left), ("right", right)] {
        if !(s.sum_h + lambda > T::zero()) {
            return Err(GrowError::Degenerate(format!(
                "{side} child has H + lambda = {} (not positive)",
                s.sum_h + lambda
            )));
        }
    }
    let parent = *left + *right;
    Ok(gain_with_parent(left, right, &parent, lambda, gamma))
}
