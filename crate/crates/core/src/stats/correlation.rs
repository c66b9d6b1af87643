use serde::{Deserialize, Serialize};

use super::{Result, StatsError};
use crate::dataset::Dataset;
use crate::scalar::decimal17;
use crate::Scalar;

/// Pairwise Pearson correlations and their squares. Entries involving a
/// column that is constant over the rows used are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CorrelationMatrix<T> {
    pub labels: Vec<String>,
    #[serde(with = "decimal17::matrix")]
    pub r: Vec<Vec<T>>,
    #[serde(with = "decimal17::matrix")]
    pub r_squared: Vec<Vec<T>>,
    /// Rows contributing to each pair (both values present).
    pub n: Vec<Vec<usize>>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.r[i][j])
    }
}

/// Pearson r of the pairs where both values are present.
pub fn pearson<T: Scalar>(x: &[f64], y: &[f64]) -> (T, usize) {
    let pairs: Vec<(T, T)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (T::lit(a), T::lit(b)))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return (T::nan(), n);
    }
    let nf = T::from_usize_lossy(n);
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / nf;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(a, b) in &pairs {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return (T::nan(), n);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    (r.max(-T::one()).min(T::one()), n)
}

pub fn pearson_correlation_matrix<T: Scalar, S: AsRef<str>>(
    ds: &Dataset,
    columns: &[S],
) -> Result<CorrelationMatrix<T>> {
    if columns.len() < 2 {
        return Err(StatsError::InvalidArgument("correlation needs at least two columns".into()));
    }
    if ds.n_rows() < 2 {
        return Err(StatsError::InvalidArgument(format!(
            "correlation needs at least two rows, got {}",
            ds.n_rows()
        )));
    }
    let data: Vec<&[f64]> = columns
        .iter()
        .map(|c| ds.numeric(c.as_ref()))
        .collect::<std::result::Result<_, _>>()?;
    let k = data.len();
    let mut r = vec![vec![T::nan(); k]; k];
    let mut n = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (v, m) = pearson::<T>(data[i], data[j]);
            // the diagonal is exactly 1 whenever r is defined
            let v = if i == j && !v.is_nan() { T::one() } else { v };
            r[i][j] = v;
            r[j][i] = v;
            n[i][j] = m;
            n[j][i] = m;
        }
    }
    let r_squared = r.iter().map(|row| row.iter().map(|&v| v * v).collect()).collect();
    Ok(CorrelationMatrix {
        labels: columns.iter().map(|c| c.as_ref().to_string()).collect(),
        r,
        r_squared,
        n,
    })
}
