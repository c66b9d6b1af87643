use serde::{Deserialize, Serialize};

use super::special::chi2_upper_tail;
use super::{Result, StatsError};
use crate::dataset::{Column, ColumnData, Dataset, MISSING_CODE};
use crate::scalar::decimal17;
use crate::Scalar;

/// Cross-tabulated counts of two categorical columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_variable: String,
    pub col_variable: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub col_totals: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn from_counts(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != col_labels.len()) {
            return Err(StatsError::InvalidArgument("count matrix does not match the labels".into()));
        }
        let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_totals: Vec<u64> = (0..col_labels.len())
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let total = row_totals.iter().sum();
        if total == 0 {
            return Err(StatsError::InvalidArgument("contingency table is empty".into()));
        }
        Ok(Self {
            row_variable: String::new(),
            col_variable: String::new(),
            row_labels,
            col_labels,
            counts,
            row_totals,
            col_totals,
            total,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ChiSquaredResult<T> {
    #[serde(with = "decimal17")]
    pub statistic: T,
    pub dof: usize,
    #[serde(with = "decimal17")]
    pub p_value: T,
    #[serde(with = "decimal17::matrix")]
    pub expected: Vec<Vec<T>>,
}

impl<T: Scalar> ChiSquaredResult<T> {
    pub fn rejects_at(&self, alpha: T) -> bool {
        self.p_value < alpha
    }
}

/// Codes and labels of a column used as a factor. Categorical columns use
/// their label table; numeric (e.g. target) columns use their rendered
/// values, interned in first-seen order. Missing cells map to `None`.
pub(crate) fn factor_codes(col: &Column) -> (Vec<Option<u32>>, Vec<String>) {
    match &col.data {
        ColumnData::Categorical { codes, labels } => (
            codes.iter().map(|&c| (c != MISSING_CODE).then_some(c)).collect(),
            labels.clone(),
        ),
        ColumnData::Numeric(values) => {
            let mut labels: Vec<String> = Vec::new();
            let mut seen: Vec<u64> = Vec::new();
            let codes = values
                .iter()
                .map(|&v| {
                    if v.is_nan() {
                        return None;
                    }
                    // +0 and -0 are one level
                    let key = (v + 0.0).to_bits();
                    Some(match seen.iter().position(|&k| k == key) {
                        Some(i) => i as u32,
                        None => {
                            seen.push(key);
                            labels.push(crate::dataset::format_number(v));
                            (labels.len() - 1) as u32
                        }
                    })
                })
                .collect();
            (codes, labels)
        }
    }
}

pub(crate) fn require_factor(ds: &Dataset, name: &str) -> Result<(Vec<Option<u32>>, Vec<String>)> {
    let col = ds.column(name)?;
    if col.kind() == crate::dataset::ColumnKind::Numeric {
        return Err(StatsError::NotCategorical(name.to_string()));
    }
    Ok(factor_codes(col))
}

/// Co-occurrence counts of `a` (rows) and `b` (columns). Either may be a
/// categorical or the target column; rows missing either value are skipped.
pub fn contingency_table(ds: &Dataset, a: &str, b: &str) -> Result<ContingencyTable> {
    if ds.n_rows() == 0 {
        return Err(StatsError::InvalidArgument("dataset has no rows".into()));
    }
    let (ra, la) = require_factor(ds, a)?;
    let (rb, lb) = require_factor(ds, b)?;
    let mut counts = vec![vec![0u64; lb.len()]; la.len()];
    for (x, y) in ra.iter().zip(&rb) {
        if let (Some(x), Some(y)) = (x, y) {
            counts[*x as usize][*y as usize] += 1;
        }
    }
    let mut t = ContingencyTable::from_counts(la, lb, counts)?;
    t.row_variable = a.to_string();
    t.col_variable = b.to_string();
    Ok(t)
}

/// Pearson's chi-squared test of independence, without continuity
/// correction.
pub fn chi_squared_test<T: Scalar>(t: &ContingencyTable) -> Result<ChiSquaredResult<T>> {
    let (r, c) = (t.row_labels.len(), t.col_labels.len());
    if r < 2 || c < 2 {
        return Err(StatsError::ZeroDof(format!("{r}x{c} table has no degrees of freedom")));
    }
    if let Some(i) = t.row_totals.iter().position(|&v| v == 0) {
        return Err(StatsError::ZeroMarginal(format!("row {:?} has total 0", t.row_labels[i])));
    }
    if let Some(j) = t.col_totals.iter().position(|&v| v == 0) {
        return Err(StatsError::ZeroMarginal(format!("column {:?} has total 0", t.col_labels[j])));
    }
    let grand = T::lit(t.total as f64);
    let mut statistic = T::zero();
    let expected: Vec<Vec<T>> = (0..r)
        .map(|i| {
            (0..c)
                .map(|j| {
                    let e = T::lit(t.row_totals[i] as f64) * T::lit(t.col_totals[j] as f64) / grand;
                    let d = T::lit(t.counts[i][j] as f64) - e;
                    statistic = statistic + d * d / e;
                    e
                })
                .collect()
        })
        .collect();
    let dof = (r - 1) * (c - 1);
    let p_value = chi2_upper_tail(statistic, dof)?.max(T::zero()).min(T::one());
    Ok(ChiSquaredResult {
        statistic,
        dof,
        p_value,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(counts: Vec<Vec<u64>>) -> ContingencyTable {
        let rows = (0..counts.len()).map(|i| format!("r{i}")).collect();
        let cols = (0..counts[0].len()).map(|j| format!("c{j}")).collect();
        ContingencyTable::from_counts(rows, cols, counts).unwrap()
    }

    /// χ² with one degree of freedom is a squared standard normal, so its
    /// tail is erfc(√(x/2)); erfc by Simpson integration of the density.
    fn chi2_dof1_tail_oracle(x: f64) -> f64 {
        let z = (x).sqrt();
        let upper = z + 40.0;
        let n = 400_000;
        let h = (upper - z) / n as f64;
        let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(z) + phi(upper);
        for k in 1..n {
            acc += phi(z + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        2.0 * acc * h / 3.0
    }

    #[test]
    fn two_by_two_oracles() {
        let (a, b, c, d) = (10.0, 20.0, 20.0, 10.0);
        let n: f64 = a + b + c + d;
        let closed = n * (a * d - b * c) * (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d));
        let oracle_p = chi2_dof1_tail_oracle(closed);

        let r: ChiSquaredResult<f64> = chi_squared_test(&table(vec![vec![10, 20], vec![20, 10]])).unwrap();
        assert!((r.statistic - closed).abs() < 1e-12);
        assert!((r.statistic - 6.6667).abs() < 1e-3);
        assert_eq!(r.dof, 1);
        assert!((r.p_value - oracle_p).abs() < 1e-8);
        assert!((r.p_value - 0.00982).abs() < 1e-4);
    }

    #[test]
    fn proportional_rows_are_independent() {
        let r: ChiSquaredResult<f64> = chi_squared_test(&table(vec![vec![10, 10], vec![20, 20]])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn homogeneous_in_counts() {
        let base = vec![vec![3, 9, 4], vec![7, 2, 5]];
        let r1: ChiSquaredResult<f64> = chi_squared_test(&table(base.clone())).unwrap();
        for k in [2u64, 5, 13] {
            let scaled = base.iter().map(|row| row.iter().map(|v| v * k).collect()).collect();
            let rk: ChiSquaredResult<f64> = chi_squared_test(&table(scaled)).unwrap();
            assert!((rk.statistic - k as f64 * r1.statistic).abs() < 1e-10 * rk.statistic);
        }
    }

    #[test]
    fn degenerate_tables() {
        assert!(matches!(
            chi_squared_test::<f64>(&table(vec![vec![1, 2]])),
            Err(StatsError::ZeroDof(_))
        ));
        assert!(matches!(
            chi_squared_test::<f64>(&table(vec![vec![1, 0], vec![2, 0]])),
            Err(StatsError::ZeroMarginal(_))
        ));
    }

    #[test]
    fn counting_from_a_dataset() {
        let ds = Dataset::new(vec![
            Column::labels("a", &["A", "A", "B", "B"]),
            Column::labels("b", &["x", "y", "x", "x"]),
            Column::numeric("n", vec![1.0, 2.0, 3.0, 4.0]),
        ])
        .unwrap();
        let t = contingency_table(&ds, "a", "b").unwrap();
        assert_eq!(t.counts, [[1, 1], [2, 0]]);
        assert_eq!(t.row_labels, ["A", "B"]);
        assert!(matches!(contingency_table(&ds, "a", "n"), Err(StatsError::NotCategorical(_))));
        let single = Dataset::new(vec![Column::labels("a", &["A", "A"]), Column::labels("b", &["x", "y"])]).unwrap();
        assert_eq!(contingency_table(&single, "a", "b").unwrap().counts.len(), 1);
        let empty = ds.select_rows(&[]);
        assert!(contingency_table(&empty, "a", "b").is_err());
    }

    #[test]
    fn target_column_as_factor() {
        let ds = Dataset::new(vec![
            Column::labels("a", &["1", "2", "1", "2"]),
            Column::target("y", vec![2.0, 1.0, 2.0, 2.0]),
        ])
        .unwrap();
        let t = contingency_table(&ds, "a", "y").unwrap();
        assert_eq!(t.col_labels, ["2", "1"]);
        assert_eq!(t.counts, [[2, 0], [1, 1]]);
    }
}
