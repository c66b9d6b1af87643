use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    Column, ColumnData, Dataset, DatasetError, Result, MISSING_CODE,
};

/// Appends `new_name = scale * num / den`.
pub fn add_ratio_column(
    ds: &Dataset,
    new_name: &str,
    num: &str,
    den: &str,
    scale: f64,
) -> Result<Dataset> {
    if ds.column_index(new_name).is_ok() {
        return Err(DatasetError::DuplicateColumn(new_name.to_string()));
    }
    let n = ds.numeric(num)?;
    let d = ds.numeric(den)?;
    let mut out = Vec::with_capacity(ds.n_rows());
    for (row, (&a, &b)) in n.iter().zip(d).enumerate() {
        if b == 0.0 {
            return Err(DatasetError::ZeroDenominator {
                row,
                column: den.to_string(),
            });
        }
        // missing propagates as NaN
        out.push(scale * (a / b));
    }
    let mut col = Column::numeric(new_name, out);
    if n.iter().chain(d).any(|v| v.is_nan()) {
        col.schema.missing_marker = ds
            .column(num)?
            .schema
            .missing_marker
            .clone()
            .or_else(|| ds.column(den).ok()?.schema.missing_marker.clone());
    }
    ds.with_column(col)
}

/// Keeps the rows whose value in `column` is not one of `excluded`.
///
/// Tokens are compared against categorical labels, or parsed as numbers for
/// numeric columns. A token equal to the column's missing marker excludes the
/// missing rows.
pub fn filter_rows<S: AsRef<str>>(ds: &Dataset, column: &str, excluded: &[S]) -> Result<Dataset> {
    let col = ds.column(column)?;
    let marker = col.schema.missing_marker.as_deref();
    let drop_missing = excluded
        .iter()
        .any(|t| marker.is_some_and(|m| m == t.as_ref()));
    let keep: Vec<usize> = match &col.data {
        ColumnData::Numeric(values) => {
            let mut set = Vec::new();
            for t in excluded {
                let t = t.as_ref();
                if marker == Some(t) {
                    continue;
                }
                let v = t.trim().parse::<f64>().map_err(|_| DatasetError::Unparseable {
                    row: 0,
                    column: column.to_string(),
                    value: t.to_string(),
                })?;
                set.push(v);
            }
            (0..ds.n_rows())
                .filter(|&r| {
                    let v = values[r];
                    if v.is_nan() {
                        !drop_missing
                    } else {
                        !set.contains(&v)
                    }
                })
                .collect()
        }
        ColumnData::Categorical { codes, labels } => {
            let set: HashSet<&str> = excluded.iter().map(AsRef::as_ref).collect();
            let excluded_codes: Vec<bool> = labels.iter().map(|l| set.contains(l.as_str())).collect();
            (0..ds.n_rows())
                .filter(|&r| {
                    let c = codes[r];
                    if c == MISSING_CODE {
                        !drop_missing
                    } else {
                        !excluded_codes[c as usize]
                    }
                })
                .collect()
        }
    };
    Ok(ds.select_rows(&keep))
}

/// Removes `columns`, then every row with a missing cell in what remains.
pub fn drop_missing<S: AsRef<str>>(ds: &Dataset, columns: &[S]) -> Result<Dataset> {
    let reduced = ds.drop_columns(columns)?;
    let keep: Vec<usize> = (0..reduced.n_rows())
        .filter(|&r| reduced.columns().iter().all(|c| !c.data.is_missing(r)))
        .collect();
    Ok(reduced.select_rows(&keep))
}

/// Replaces a categorical column by one 0/1 indicator column per level, named
/// `column=label`, in label-table order. Missing rows get all zeros.
pub fn one_hot_encode(ds: &Dataset, column: &str) -> Result<Dataset> {
    let idx = ds.column_index(column)?;
    let (codes, labels) = ds.categorical(column)?;
    if labels.len() < 2 {
        return Err(DatasetError::TooFewLevels {
            column: column.to_string(),
            levels: labels.len(),
        });
    }
    let indicators = labels.iter().enumerate().map(|(level, label)| {
        let values = codes
            .iter()
            .map(|&c| if c == level as u32 { 1.0 } else { 0.0 })
            .collect();
        Column::numeric(format!("{column}={label}"), values)
    });
    let mut columns: Vec<Column> = ds.columns()[..idx].to_vec();
    columns.extend(indicators);
    columns.extend_from_slice(&ds.columns()[idx + 1..]);
    Dataset::new(columns)
}

/// Number of training rows for `n` rows: nearest integer to
/// `train_fraction * n`, ties upward, clamped so both parts are nonempty.
pub(crate) fn train_size(n: usize, train_fraction: f64) -> usize {
    let raw = (train_fraction * n as f64 + 0.5).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Seeded shuffle split into (train, test).
pub fn train_test_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if ds.n_rows() < 2 {
        return Err(DatasetError::InvalidArgument(
            "train/test split needs at least 2 rows".into(),
        ));
    }
    let mut order: Vec<usize> = (0..ds.n_rows()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = train_size(ds.n_rows(), train_fraction);
    Ok((ds.select_rows(&order[..cut]), ds.select_rows(&order[cut..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds_targets(values: &[f64]) -> Dataset {
        Dataset::new(vec![
            Column::target("y", values.to_vec()),
            Column::numeric("i", (0..values.len()).map(|i| i as f64).collect()),
        ])
        .unwrap()
    }

    #[test]
    fn ratio_column_percent() {
        let ds = Dataset::new(vec![
            Column::numeric("COVID-19 Deaths", vec![25.0, 10.0]),
            Column::numeric("Total Deaths", vec![100.0, 40.0]),
        ])
        .unwrap();
        let out = add_ratio_column(&ds, "CTDPercentage", "COVID-19 Deaths", "Total Deaths", 100.0)
            .unwrap();
        assert_eq!(out.numeric("CTDPercentage").unwrap(), [25.0, 25.0]);
        assert_eq!(out.numeric("Total Deaths").unwrap(), [100.0, 40.0]);
    }

    #[test]
    fn ratio_identity_is_constant() {
        let ds = Dataset::new(vec![Column::numeric("a", vec![3.0, 7.5, 1e-3])]).unwrap();
        let ds = ds.with_column(Column::numeric("b", vec![3.0, 7.5, 1e-3])).unwrap();
        let out = add_ratio_column(&ds, "r", "a", "b", 100.0).unwrap();
        assert!(out.numeric("r").unwrap().iter().all(|&v| v == 100.0));
    }

    #[test]
    fn ratio_zero_denominator_cites_row() {
        let ds = Dataset::new(vec![
            Column::numeric("a", vec![1.0, 2.0]),
            Column::numeric("b", vec![1.0, 0.0]),
        ])
        .unwrap();
        let err = add_ratio_column(&ds, "r", "a", "b", 1.0).unwrap_err();
        assert!(matches!(err, DatasetError::ZeroDenominator { row: 1, .. }));
        let err = add_ratio_column(&ds, "a", "a", "b", 1.0).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateColumn(_)));
    }

    #[test]
    fn filter_excludes_listed_values() {
        let ds = ds_targets(&[1.0, 2.0, 3.0, 1.0, 3.0]);
        let out = filter_rows(&ds, "y", &["3"]).unwrap();
        assert_eq!(out.numeric("y").unwrap(), [1.0, 2.0, 1.0]);
        assert_eq!(out.numeric("i").unwrap(), [0.0, 1.0, 3.0]);

        let same = filter_rows::<&str>(&ds, "y", &[]).unwrap();
        assert_eq!(same, ds);

        let none = filter_rows(&ds, "y", &["1", "2", "3"]).unwrap();
        assert_eq!(none.n_rows(), 0);

        assert!(matches!(
            filter_rows(&ds, "nope", &["1"]).unwrap_err(),
            DatasetError::UnknownColumn(_)
        ));
    }

    #[test]
    fn filter_categorical_labels() {
        let ds = Dataset::new(vec![Column::labels("c", &["a", "b", "a", "c"])]).unwrap();
        let out = filter_rows(&ds, "c", &["a"]).unwrap();
        assert_eq!(out.categorical("c").unwrap().1, ["b", "c"]);
    }

    #[test]
    fn drop_missing_removes_rows() {
        let ds = Dataset::new(vec![
            Column::numeric("a", vec![1.0, 2.0, f64::NAN, 4.0, 5.0]),
            Column::numeric("junk", vec![f64::NAN; 5]),
        ])
        .unwrap();
        let out = drop_missing(&ds, &["junk"]).unwrap();
        assert_eq!(out.shape(), (4, 1));

        let clean = Dataset::new(vec![Column::numeric("a", vec![1.0, 2.0])]).unwrap();
        assert_eq!(drop_missing::<&str>(&clean, &[]).unwrap(), clean);
        assert!(drop_missing(&clean, &["zzz"]).is_err());
    }

    #[test]
    fn one_hot_three_levels() {
        let ds = Dataset::new(vec![
            Column::numeric("x", vec![0.0; 4]),
            Column::categorical("c", &[Some("A"), Some("B"), Some("C"), None]),
        ])
        .unwrap();
        let out = one_hot_encode(&ds, "c").unwrap();
        assert_eq!(out.column_names(), ["x", "c=A", "c=B", "c=C"]);
        let row = |r: usize| -> Vec<f64> {
            ["c=A", "c=B", "c=C"]
                .iter()
                .map(|n| out.numeric(n).unwrap()[r])
                .collect()
        };
        assert_eq!(row(1), [0.0, 1.0, 0.0]);
        assert_eq!(row(3), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn one_hot_two_levels_partition() {
        let ds = Dataset::new(vec![Column::labels("c", &["p", "q", "q", "p", "q"])]).unwrap();
        let out = one_hot_encode(&ds, "c").unwrap();
        let a = out.numeric("c=p").unwrap();
        let b = out.numeric("c=q").unwrap();
        assert!(a.iter().zip(b).all(|(x, y)| x + y == 1.0));
    }

    #[test]
    fn one_hot_rejects_degenerate() {
        let ds = Dataset::new(vec![
            Column::labels("c", &["a", "a"]),
            Column::numeric("n", vec![1.0, 2.0]),
        ])
        .unwrap();
        assert!(matches!(
            one_hot_encode(&ds, "c").unwrap_err(),
            DatasetError::TooFewLevels { .. }
        ));
        assert!(matches!(
            one_hot_encode(&ds, "n").unwrap_err(),
            DatasetError::WrongKind { .. }
        ));
    }

    #[test]
    fn split_sizes() {
        assert_eq!(train_size(1252, 0.75), 939);
        assert_eq!(train_size(4, 0.5), 2);
        assert_eq!(train_size(5, 0.5), 3);
        let ds = ds_targets(&[0.0, 1.0, 2.0, 3.0]);
        let (tr, te) = train_test_split(&ds, 0.5, 7).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (2, 2));
        assert!(train_test_split(&ds, 1.0, 7).is_err());
        assert!(train_test_split(&ds, 0.0, 7).is_err());
    }

    #[test]
    fn split_is_deterministic() {
        let ds = ds_targets(&(0..50).map(f64::from).collect::<Vec<_>>());
        let a = train_test_split(&ds, 0.75, 11).unwrap();
        let b = train_test_split(&ds, 0.75, 11).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn split_partitions_rows(n in 2usize..120, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let ds = ds_targets(&vec![0.0; n]);
            let (tr, te) = train_test_split(&ds, frac, seed).unwrap();
            let mut ids: Vec<f64> = tr.numeric("i").unwrap().iter().chain(te.numeric("i").unwrap()).copied().collect();
            ids.sort_by(f64::total_cmp);
            let expected: Vec<f64> = (0..n).map(|i| i as f64).collect();
            prop_assert_eq!(ids, expected);
        }

        #[test]
        fn disjoint_filters_commute(values in proptest::collection::vec(0u8..6, 1..40)) {
            let ds = ds_targets(&values.iter().map(|&v| f64::from(v)).collect::<Vec<_>>());
            let ab = filter_rows(&filter_rows(&ds, "y", &["1", "2"]).unwrap(), "y", &["4"]).unwrap();
            let ba = filter_rows(&filter_rows(&ds, "y", &["4"]).unwrap(), "y", &["1", "2"]).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn one_hot_adds_k_minus_one(labels in proptest::collection::vec(0u8..5, 2..40)) {
            let text: Vec<String> = labels.iter().map(|l| format!("L{l}")).collect();
            let ds = Dataset::new(vec![Column::labels("c", &text), Column::numeric("z", vec![0.0; text.len()])]).unwrap();
            let k = ds.categorical("c").unwrap().1.len();
            prop_assume!(k >= 2);
            let out = one_hot_encode(&ds, "c").unwrap();
            prop_assert_eq!(out.n_rows(), ds.n_rows());
            prop_assert_eq!(out.n_cols(), ds.n_cols() + k - 1);
        }
    }
}
