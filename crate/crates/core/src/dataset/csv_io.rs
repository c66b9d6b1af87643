use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use super::{
    Column, ColumnData, ColumnKind, ColumnSchema, Dataset, DatasetError, Interner,
    Result, MISSING_CODE,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Header columns absent from the schema are skipped instead of being an
    /// error.
    pub allow_extra_columns: bool,
}

#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Number of columns in the file header, including skipped ones.
    pub header_cols: usize,
}

/// Reads a comma-separated file whose header names exactly the schema columns
/// (in any order). Columns come back in schema order.
pub fn load_csv(path: impl AsRef<Path>, schema: &[ColumnSchema]) -> Result<Dataset> {
    load_csv_with(path, schema, CsvOptions::default()).map(|l| l.dataset)
}

pub fn load_csv_with(
    path: impl AsRef<Path>,
    schema: &[ColumnSchema],
    options: CsvOptions,
) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, schema, options)
}

pub(crate) fn read_csv<R: std::io::Read>(
    reader: R,
    schema: &[ColumnSchema],
    options: CsvOptions,
) -> Result<LoadedCsv> {
    let mut names = HashSet::new();
    for s in schema {
        if !names.insert(s.name.as_str()) {
            return Err(DatasetError::DuplicateColumn(s.name.clone()));
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if position.insert(h.as_str(), i).is_some() {
            return Err(DatasetError::HeaderMismatch(format!("duplicate header {h:?}")));
        }
    }
    let missing: Vec<&str> = schema
        .iter()
        .map(|s| s.name.as_str())
        .filter(|n| !position.contains_key(n))
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::HeaderMismatch(format!(
            "columns not in header: {missing:?}"
        )));
    }
    if !options.allow_extra_columns {
        let extra: Vec<&String> = header.iter().filter(|h| !names.contains(h.as_str())).collect();
        if !extra.is_empty() {
            return Err(DatasetError::HeaderMismatch(format!(
                "header columns not in schema: {extra:?}"
            )));
        }
    }

    enum Builder {
        Numeric(Vec<f64>),
        Categorical(Vec<u32>, Interner),
    }
    let mut builders: Vec<Builder> = schema
        .iter()
        .map(|s| match s.kind {
            ColumnKind::Categorical => Builder::Categorical(Vec::new(), Interner::default()),
            ColumnKind::Numeric | ColumnKind::Target => Builder::Numeric(Vec::new()),
        })
        .collect();
    let slots: Vec<usize> = schema.iter().map(|s| position[s.name.as_str()]).collect();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for ((spec, &slot), builder) in schema.iter().zip(&slots).zip(builders.iter_mut()) {
            let cell = record.get(slot).unwrap_or("");
            let is_missing = spec.missing_marker.as_deref().is_some_and(|m| cell.trim() == m.trim());
            match builder {
                Builder::Numeric(values) => {
                    if is_missing {
                        values.push(f64::NAN);
                        continue;
                    }
                    let v = cell.trim().parse::<f64>().ok().filter(|v| !v.is_nan());
                    match v {
                        Some(v) => values.push(v),
                        None => {
                            return Err(DatasetError::Unparseable {
                                row: row + 1,
                                column: spec.name.clone(),
                                value: cell.to_string(),
                            })
                        }
                    }
                }
                Builder::Categorical(codes, interner) => {
                    codes.push(if is_missing {
                        MISSING_CODE
                    } else {
                        interner.intern(cell)
                    });
                }
            }
        }
    }

    let columns = schema
        .iter()
        .zip(builders)
        .map(|(spec, b)| Column {
            schema: spec.clone(),
            data: match b {
                Builder::Numeric(v) => ColumnData::Numeric(v),
                Builder::Categorical(codes, interner) => ColumnData::Categorical {
                    codes,
                    labels: interner.labels,
                },
            },
        })
        .collect::<Vec<_>>();
    let dataset = if columns.is_empty() {
        Dataset::new(Vec::new())?
    } else {
        Dataset::new(columns)?
    };
    Ok(LoadedCsv {
        dataset,
        header_cols: header.len(),
    })
}

/// Writes the dataset in the canonical dialect. Missing cells are written as
/// the column's missing marker, or empty when it has none.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(ds.column_names())?;
    let mut record = Vec::with_capacity(ds.n_cols());
    for row in 0..ds.n_rows() {
        record.clear();
        for col in ds.columns() {
            record.push(match col.cell_text(row) {
                Some(text) => text,
                None => col.schema.missing_marker.clone().unwrap_or_default(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|source| DatasetError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
