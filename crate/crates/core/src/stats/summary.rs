use serde::{Deserialize, Serialize};

use super::chi2::require_factor;
use super::{Result, StatsError};
use crate::dataset::Dataset;
use crate::scalar::decimal17;

/// Box-plot numbers for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// One label per grouping column.
    pub group: Vec<String>,
    pub count: usize,
    #[serde(with = "decimal17::f64")]
    pub mean: f64,
    #[serde(with = "decimal17::f64")]
    pub median: f64,
    #[serde(with = "decimal17::f64")]
    pub q1: f64,
    #[serde(with = "decimal17::f64")]
    pub q3: f64,
    #[serde(with = "decimal17::f64")]
    pub min: f64,
    #[serde(with = "decimal17::f64")]
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub value: String,
    pub by: Vec<String>,
    pub groups: Vec<GroupStats>,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// (q1, median, q3): medians of the lower and upper halves, leaving the
/// middle element out of both halves when the count is odd. A single value
/// is its own quartiles.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 1 {
        return Some((v[0], v[0], v[0]));
    }
    let half = n / 2;
    Some((median_sorted(&v[..half]), median_sorted(&v), median_sorted(&v[n - half..])))
}

/// Statistics of `value` for every observed combination of the `by` columns,
/// in lexicographic order of label codes. Rows missing the value or any key
/// are skipped.
pub fn group_summary<S: AsRef<str>>(ds: &Dataset, value: &str, by: &[S]) -> Result<GroupSummary> {
    if by.is_empty() {
        return Err(StatsError::InvalidArgument("no grouping columns given".into()));
    }
    let y = ds.numeric(value)?;
    let keys: Vec<(Vec<Option<u32>>, Vec<String>)> =
        by.iter().map(|b| require_factor(ds, b.as_ref())).collect::<Result<_>>()?;
    let mut buckets: std::collections::BTreeMap<Vec<u32>, Vec<f64>> = Default::default();
    'rows: for (i, &v) in y.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        let mut key = Vec::with_capacity(keys.len());
        for (codes, _) in &keys {
            match codes[i] {
                Some(c) => key.push(c),
                None => continue 'rows,
            }
        }
        buckets.entry(key).or_default().push(v);
    }
    if buckets.is_empty() {
        return Err(StatsError::InvalidArgument(format!("no complete rows to group {value} by")));
    }
    let groups = buckets
        .into_iter()
        .map(|(key, vals)| {
            let (q1, median, q3) = quartiles(&vals).expect("bucket is nonempty");
            GroupStats {
                group: key
                    .iter()
                    .zip(&keys)
                    .map(|(&c, (_, labels))| labels[c as usize].clone())
                    .collect(),
                count: vals.len(),
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                median,
                q1,
                q3,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(GroupSummary {
        value: value.to_string(),
        by: by.iter().map(|b| b.as_ref().to_string()).collect(),
        groups,
    })
}
