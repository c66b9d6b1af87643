//! Columnar datasets: typed columns, CSV ingestion, preprocessing
//! transformations, categorical encoding and histogram binning.
//!
//! A [`Dataset`] is immutable once built. Every transformation returns a new
//! dataset and leaves its input untouched.

pub(crate) mod binning;
mod csv_io;
mod recipe;
mod transform;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binning::{bin_column, bin_features, BinColumn, BinnedDataset, FeatureMatrix};
pub use csv_io::{load_csv, load_csv_with, write_csv, CsvOptions, LoadedCsv};
pub use recipe::{apply_recipe, DerivedColumn, RecipeOutcome, RecipeSpec, RowFilter, ShapeCheck};
pub use transform::{
    add_ratio_column, drop_missing, filter_rows, one_hot_encode, train_test_split,
};

/// Code stored in a categorical column for a missing cell.
pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("more than one target column ({0:?} and {1:?})")]
    MultipleTargets(String, String),
    #[error("column {column:?} has {actual} rows, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        actual: usize,
    },
    #[error("column {column:?} is {actual}, expected {expected}")]
    WrongKind {
        column: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    Unparseable {
        row: usize,
        column: String,
        value: String,
    },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("row {row}: zero denominator in column {column:?}")]
    ZeroDenominator { row: usize, column: String },
    #[error("column {column:?} has {levels} level(s); one-hot encoding needs at least 2")]
    TooFewLevels { column: String, levels: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape check failed for {stage}: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        stage: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    /// Numeric response column; at most one per dataset.
    Target,
}

impl ColumnKind {
    fn describe(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Cell token read as a missing value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing_marker: Option<String>,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
            missing_marker: None,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Numeric)
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Categorical)
    }

    pub fn target(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Target)
    }

    pub fn with_missing(mut self, marker: impl Into<String>) -> Self {
        self.missing_marker = Some(marker.into());
        self
    }
}

/// Column storage. Numeric (and target) columns hold `f64` with `NaN` as the
/// missing sentinel; categorical columns hold dense codes into a label table,
/// with [`MISSING_CODE`] for missing cells.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, labels: Vec<String> },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Numeric(v) => v[row].is_nan(),
            ColumnData::Categorical { codes, .. } => codes[row] == MISSING_CODE,
        }
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, labels } => {
                let picked: Vec<u32> = rows.iter().map(|&r| codes[r]).collect();
                compact_codes(&picked, labels)
            }
        }
    }
}

/// Drops labels no longer referenced, keeping the surviving labels in their
/// original table order so codes stay dense.
fn compact_codes(codes: &[u32], labels: &[String]) -> ColumnData {
    let mut used = vec![false; labels.len()];
    for &c in codes {
        if c != MISSING_CODE {
            used[c as usize] = true;
        }
    }
    let mut remap = vec![MISSING_CODE; labels.len()];
    let mut kept = Vec::new();
    for (old, label) in labels.iter().enumerate() {
        if used[old] {
            remap[old] = kept.len() as u32;
            kept.push(label.clone());
        }
    }
    let codes = codes
        .iter()
        .map(|&c| if c == MISSING_CODE { c } else { remap[c as usize] })
        .collect();
    ColumnData::Categorical {
        codes,
        labels: kept,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub schema: ColumnSchema,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            schema: ColumnSchema::numeric(name),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn target(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            schema: ColumnSchema::target(name),
            data: ColumnData::Numeric(values),
        }
    }

    /// Interns labels in first-seen order. `None` marks a missing cell.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let mut interner = Interner::default();
        let codes = values
            .iter()
            .map(|v| match v {
                Some(s) => interner.intern(s.as_ref()),
                None => MISSING_CODE,
            })
            .collect();
        Self {
            schema: ColumnSchema::categorical(name),
            data: ColumnData::Categorical {
                codes,
                labels: interner.labels,
            },
        }
    }

    /// Categorical column without missing cells.
    pub fn labels<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        let opt: Vec<Option<&str>> = values.iter().map(|s| Some(s.as_ref())).collect();
        Self::categorical(name, &opt)
    }

    pub fn with_missing_marker(mut self, marker: impl Into<String>) -> Self {
        self.schema.missing_marker = Some(marker.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.schema.kind
    }

    /// Renders a cell as text, `None` when missing.
    pub fn cell_text(&self, row: usize) -> Option<String> {
        match &self.data {
            ColumnData::Numeric(v) => (!v[row].is_nan()).then(|| format_number(v[row])),
            ColumnData::Categorical { codes, labels } => {
                (codes[row] != MISSING_CODE).then(|| labels[codes[row] as usize].clone())
            }
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub(crate) fn format_number(v: f64) -> String {
    format!("{v}")
}

#[derive(Default)]
pub(crate) struct Interner {
    pub(crate) labels: Vec<String>,
    index: std::collections::HashMap<String, u32>,
}

impl Interner {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&c) = self.index.get(s) {
            return c;
        }
        let code = self.labels.len() as u32;
        self.labels.push(s.to_string());
        self.index.insert(s.to_string(), code);
        code
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Validates equal lengths, unique names and at most one target column.
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.data.len());
        let mut names = HashSet::new();
        let mut target: Option<&str> = None;
        for col in &columns {
            if !names.insert(col.name()) {
                return Err(DatasetError::DuplicateColumn(col.name().to_string()));
            }
            if col.data.len() != n_rows {
                return Err(DatasetError::LengthMismatch {
                    column: col.name().to_string(),
                    expected: n_rows,
                    actual: col.data.len(),
                });
            }
            let kind_ok = match (&col.data, col.kind()) {
                (ColumnData::Numeric(_), ColumnKind::Categorical) => false,
                (ColumnData::Categorical { .. }, ColumnKind::Numeric | ColumnKind::Target) => false,
                _ => true,
            };
            if !kind_ok {
                return Err(DatasetError::InvalidArgument(format!(
                    "column {:?}: storage does not match declared kind {}",
                    col.name(),
                    col.kind().describe()
                )));
            }
            if col.kind() == ColumnKind::Target {
                if let Some(prev) = target {
                    return Err(DatasetError::MultipleTargets(
                        prev.to_string(),
                        col.name().to_string(),
                    ));
                }
                target = Some(col.name());
            }
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.columns.len())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn schema(&self) -> Vec<ColumnSchema> {
        self.columns.iter().map(|c| c.schema.clone()).collect()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(Column::name).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name() == name)
            .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }

    /// Values of a numeric or target column.
    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        let col = self.column(name)?;
        match &col.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical { .. } => Err(DatasetError::WrongKind {
                column: name.to_string(),
                expected: "numeric",
                actual: "categorical",
            }),
        }
    }

    /// Codes and label table of a categorical column.
    pub fn categorical(&self, name: &str) -> Result<(&[u32], &[String])> {
        let col = self.column(name)?;
        match &col.data {
            ColumnData::Categorical { codes, labels } => Ok((codes, labels)),
            ColumnData::Numeric(_) => Err(DatasetError::WrongKind {
                column: name.to_string(),
                expected: "categorical",
                actual: col.kind().describe(),
            }),
        }
    }

    pub fn target(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.kind() == ColumnKind::Target)
    }

    /// Every non-target column, in schema order.
    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind() != ColumnKind::Target)
    }

    /// Rows in the given order (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    schema: c.schema.clone(),
                    data: c.data.take(rows),
                })
                .collect(),
            n_rows: rows.len(),
        }
    }

    /// Keeps only the named columns, in the order given.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| self.column(n.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Ok(Dataset {
                columns: cols,
                n_rows: self.n_rows,
            });
        }
        Dataset::new(cols)
    }

    pub fn drop_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        for n in names {
            self.column_index(n.as_ref())?;
        }
        let drop: HashSet<&str> = names.iter().map(AsRef::as_ref).collect();
        let columns = self
            .columns
            .iter()
            .filter(|c| !drop.contains(c.name()))
            .cloned()
            .collect();
        Ok(Dataset {
            columns,
            n_rows: self.n_rows,
        })
    }

    pub fn with_column(&self, column: Column) -> Result<Dataset> {
        let mut columns = self.columns.clone();
        columns.push(column);
        Dataset::new(columns)
    }

    /// Changes the declared kind of a column. Numeric columns may become the
    /// target and vice versa; a numeric column becomes categorical by using
    /// its rendered values as labels.
    pub fn with_kind(&self, name: &str, kind: ColumnKind) -> Result<Dataset> {
        let idx = self.column_index(name)?;
        let mut columns = self.columns.clone();
        let col = &mut columns[idx];
        match (&col.data, kind) {
            (ColumnData::Numeric(values), ColumnKind::Categorical) => {
                let labels: Vec<Option<String>> = values
                    .iter()
                    .map(|v| (!v.is_nan()).then(|| format_number(*v)))
                    .collect();
                let mut converted = Column::categorical(name, &labels);
                converted.schema.missing_marker = col.schema.missing_marker.clone();
                *col = converted;
            }
            (ColumnData::Numeric(_), _) => col.schema.kind = kind,
            (ColumnData::Categorical { .. }, ColumnKind::Categorical) => {}
            (ColumnData::Categorical { .. }, _) => {
                return Err(DatasetError::WrongKind {
                    column: name.to_string(),
                    expected: "numeric",
                    actual: "categorical",
                })
            }
        }
        Dataset::new(columns)
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            rows: self.n_rows,
            cols: self.columns.len(),
            schema: self.schema(),
            label_tables: self
                .columns
                .iter()
                .filter_map(|c| match &c.data {
                    ColumnData::Categorical { labels, .. } => Some(LabelTable {
                        column: c.name().to_string(),
                        labels: labels.clone(),
                    }),
                    ColumnData::Numeric(_) => None,
                })
                .collect(),
            missing_cells: self
                .columns
                .iter()
                .map(|c| (0..self.n_rows).filter(|&r| c.data.is_missing(r)).count())
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelTable {
    pub column: String,
    pub labels: Vec<String>,
}

/// JSON-friendly description of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub cols: usize,
    pub schema: Vec<ColumnSchema>,
    pub label_tables: Vec<LabelTable>,
    pub missing_cells: usize,
}
