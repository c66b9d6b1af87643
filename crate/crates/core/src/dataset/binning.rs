use super::{ColumnData, ColumnKind, Dataset, DatasetError, Result};

/// Column-major numeric feature values, the raw input to tree growth.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(DatasetError::InvalidArgument(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DatasetError::LengthMismatch {
                    column: name.clone(),
                    expected: n_rows,
                    actual: col.len(),
                });
            }
        }
        Ok(Self {
            names,
            columns,
            n_rows,
        })
    }

    /// Every non-target column; categorical features must be one-hot encoded
    /// beforehand.
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for col in ds.features() {
            match &col.data {
                ColumnData::Numeric(v) => {
                    names.push(col.name().to_string());
                    columns.push(v.clone());
                }
                ColumnData::Categorical { .. } => {
                    return Err(DatasetError::WrongKind {
                        column: col.name().to_string(),
                        expected: "numeric",
                        actual: "categorical",
                    })
                }
            }
        }
        let mut fm = Self::new(names, columns)?;
        fm.n_rows = ds.n_rows();
        Ok(fm)
    }

    /// The named numeric columns of `ds`, in the given order.
    pub fn select(ds: &Dataset, names: &[String]) -> Result<Self> {
        let columns = names
            .iter()
            .map(|n| ds.numeric(n).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        let mut fm = Self::new(names.to_vec(), columns)?;
        fm.n_rows = ds.n_rows();
        Ok(fm)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    pub fn value(&self, feature: usize, row: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }
}

/// Bin indices of one feature, stored in the narrowest width that fits the
/// bin count (including the missing bin).
#[derive(Debug, Clone, PartialEq)]
pub enum BinColumn {
    U8(Vec<u8>),
    U16(Vec<u16>),
}

impl BinColumn {
    #[inline]
    pub fn get(&self, row: usize) -> usize {
        match self {
            BinColumn::U8(v) => v[row] as usize,
            BinColumn::U16(v) => v[row] as usize,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BinColumn::U8(v) => v.len(),
            BinColumn::U16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDataset {
    feature_names: Vec<String>,
    bins: Vec<BinColumn>,
    boundaries: Vec<Vec<f64>>,
    max_bins: usize,
    n_rows: usize,
}

impl BinnedDataset {
    pub fn from_features(features: &FeatureMatrix, max_bins: usize) -> Result<Self> {
        if max_bins < 2 {
            return Err(DatasetError::InvalidArgument(format!(
                "max_bins must be at least 2, got {max_bins}"
            )));
        }
        if max_bins > u16::MAX as usize {
            return Err(DatasetError::InvalidArgument(format!(
                "max_bins must be at most {}, got {max_bins}",
                u16::MAX
            )));
        }
        let (bins, boundaries) = (0..features.n_features())
            .map(|f| bin_column(features.column(f), max_bins))
            .unzip();
        Ok(Self {
            feature_names: features.names().to_vec(),
            bins,
            boundaries,
            max_bins,
            n_rows: features.n_rows(),
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.bins.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn max_bins(&self) -> usize {
        self.max_bins
    }

    pub fn column(&self, feature: usize) -> &BinColumn {
        &self.bins[feature]
    }

    #[inline]
    pub fn bin(&self, feature: usize, row: usize) -> usize {
        self.bins[feature].get(row)
    }

    /// Sorted upper edges of the real bins; the last edge is `+inf`.
    pub fn boundaries(&self, feature: usize) -> &[f64] {
        &self.boundaries[feature]
    }

    pub fn n_real_bins(&self, feature: usize) -> usize {
        self.boundaries[feature].len()
    }

    /// Index of the reserved bin holding missing values.
    pub fn missing_bin(&self, feature: usize) -> usize {
        self.boundaries[feature].len()
    }

    /// Real bins plus the missing bin.
    pub fn total_bins(&self, feature: usize) -> usize {
        self.boundaries[feature].len() + 1
    }

    /// Bin a raw value would fall into.
    pub fn bin_of(&self, feature: usize, value: f64) -> usize {
        locate(&self.boundaries[feature], value)
    }

    /// Half-open value interval `(lower, upper]` of a real bin.
    pub fn interval(&self, feature: usize, bin: usize) -> (f64, f64) {
        let b = &self.boundaries[feature];
        let lower = if bin == 0 { f64::NEG_INFINITY } else { b[bin - 1] };
        (lower, b[bin])
    }
}

/// Bins every non-target numeric column of `ds`.
pub fn bin_features(ds: &Dataset, max_bins: usize) -> Result<BinnedDataset> {
    if !ds
        .features()
        .any(|c| c.kind() == ColumnKind::Numeric)
    {
        return Err(DatasetError::InvalidArgument(
            "binning needs at least one numeric feature".into(),
        ));
    }
    BinnedDataset::from_features(&FeatureMatrix::from_dataset(ds)?, max_bins)
}

#[inline]
fn locate(edges: &[f64], value: f64) -> usize {
    if value.is_nan() {
        edges.len()
    } else {
        edges.partition_point(|&e| e < value)
    }
}

pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    if m >= b || !m.is_finite() {
        a
    } else {
        m
    }
}

/// Quantile binning of one column.
///
/// With at most `max_bins` distinct values each value gets its own bin.
/// Otherwise cuts are placed after the first distinct value whose cumulative
/// count reaches each rank `k * n / max_bins`, `k = 1..max_bins`; duplicate
/// cuts collapse. Edges are midpoints between the distinct values on either
/// side of a cut; the final edge is `+inf`.
pub fn bin_column(values: &[f64], max_bins: usize) -> (BinColumn, Vec<f64>) {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    let mut cumulative: Vec<usize> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if distinct.last() == Some(&v) {
            *cumulative.last_mut().unwrap() = i + 1;
        } else {
            distinct.push(v);
            cumulative.push(i + 1);
        }
    }

    let cuts: Vec<usize> = if distinct.len() <= max_bins {
        (0..distinct.len().saturating_sub(1)).collect()
    } else {
        let n = sorted.len() as f64;
        let mut cuts = Vec::with_capacity(max_bins - 1);
        for k in 1..max_bins {
            let rank = k as f64 * n / max_bins as f64;
            let j = cumulative.partition_point(|&c| (c as f64) < rank);
            if j + 1 < distinct.len() && cuts.last() != Some(&j) {
                cuts.push(j);
            }
        }
        cuts
    };

    let mut edges: Vec<f64> = cuts
        .iter()
        .map(|&j| midpoint(distinct[j], distinct[j + 1]))
        .collect();
    edges.push(f64::INFINITY);

    let total = edges.len() + 1;
    let column = if total <= 256 {
        BinColumn::U8(values.iter().map(|&v| locate(&edges, v) as u8).collect())
    } else {
        BinColumn::U16(values.iter().map(|&v| locate(&edges, v) as u16).collect())
    };
    (column, edges)
}
