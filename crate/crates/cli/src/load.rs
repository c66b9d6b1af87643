//! CSV loading with column-kind inference and tolerant header matching.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use boostlab_core::dataset::{load_csv_with, ColumnKind, ColumnSchema, CsvOptions, Dataset};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// How to type the columns of an input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputSpec {
    pub target: Option<String>,
    pub categorical: Vec<String>,
    pub numeric: Vec<String>,
    /// Cell text read as missing, in every column.
    pub missing_marker: String,
    /// Load header columns not named above, typed by inspection. When false
    /// they are skipped.
    pub infer_unlisted: bool,
    /// Other header spellings accepted for a column name.
    pub aliases: BTreeMap<String, Vec<String>>,
}

impl Default for InputSpec {
    fn default() -> Self {
        Self {
            target: None,
            categorical: Vec::new(),
            numeric: Vec::new(),
            missing_marker: String::new(),
            infer_unlisted: true,
            aliases: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub dataset: Dataset,
    /// Rows and header columns of the file as read.
    pub input_shape: (usize, usize),
    pub header: Vec<String>,
}

/// Lower-case alphanumerics only, so `covid-res`, `COVID_RES` and
/// `covid res` name the same column.
pub fn normalize(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Header entry for a requested name: exact match first, then the unique
/// header with the same normalized form.
pub fn resolve<'h>(name: &str, header: &'h [String]) -> Result<&'h str> {
    if let Some(h) = header.iter().find(|h| h.as_str() == name) {
        return Ok(h);
    }
    let key = normalize(name);
    let hits: Vec<&String> = header.iter().filter(|h| normalize(h) == key).collect();
    match hits.as_slice() {
        [one] => Ok(one),
        [] => Err(CliError::runtime(format!("column {name:?} not found in the input header"))),
        _ => Err(CliError::runtime(format!("column {name:?} matches several headers: {hits:?}"))),
    }
}

/// Like [`resolve`], falling back to the aliases listed for `name`.
pub fn locate<'h>(name: &str, header: &'h [String], aliases: &BTreeMap<String, Vec<String>>) -> Result<&'h str> {
    let first = resolve(name, header);
    if first.is_ok() {
        return first;
    }
    for alt in aliases.get(name).into_iter().flatten() {
        if let Ok(h) = resolve(alt, header) {
            return Ok(h);
        }
    }
    first
}

/// Header and, per column, whether every non-missing cell parses as a number.
fn scan(path: &Path, marker: &str) -> Result<(Vec<String>, Vec<bool>, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut numeric = vec![true; header.len()];
    let mut rows = 0;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        rows += 1;
        for (j, cell) in record.iter().enumerate().take(header.len()) {
            if numeric[j] {
                let cell = cell.trim();
                if cell != marker.trim() && !cell.parse::<f64>().is_ok_and(|v| !v.is_nan()) {
                    numeric[j] = false;
                }
            }
        }
    }
    Ok((header, numeric, rows))
}

/// Loads `path`, typing columns from `spec`. Columns requested under a
/// different spelling than the header's are renamed to the requested name.
pub fn load_table(path: &Path, spec: &InputSpec) -> Result<LoadedTable> {
    let (header, numeric, rows) = scan(path, &spec.missing_marker)?;

    let mut kinds: HashMap<&str, ColumnKind> = HashMap::new();
    let mut renames: HashMap<String, String> = HashMap::new();
    let mut request = |name: &String, kind: ColumnKind| -> Result<()> {
        let actual = locate(name, &header, &spec.aliases)?;
        if actual != name {
            renames.insert(actual.to_string(), name.clone());
        }
        kinds.insert(actual, kind);
        Ok(())
    };
    for n in &spec.numeric {
        request(n, ColumnKind::Numeric)?;
    }
    for n in &spec.categorical {
        request(n, ColumnKind::Categorical)?;
    }
    if let Some(t) = &spec.target {
        request(t, ColumnKind::Target)?;
    }

    let schema: Vec<ColumnSchema> = header
        .iter()
        .zip(&numeric)
        .filter_map(|(h, &is_num)| {
            let kind = match kinds.get(h.as_str()) {
                Some(&k) => k,
                None if spec.infer_unlisted => {
                    if is_num {
                        ColumnKind::Numeric
                    } else {
                        ColumnKind::Categorical
                    }
                }
                None => return None,
            };
            Some(ColumnSchema::new(h.clone(), kind).with_missing(spec.missing_marker.clone()))
        })
        .collect();

    let loaded = load_csv_with(path, &schema, CsvOptions { allow_extra_columns: true })?;
    let mut dataset = loaded.dataset;
    if !renames.is_empty() {
        let mut columns = dataset.columns().to_vec();
        for c in &mut columns {
            if let Some(new) = renames.get(c.name()) {
                c.schema.name = new.clone();
            }
        }
        dataset = Dataset::new(columns)?;
    }
    Ok(LoadedTable {
        dataset,
        input_shape: (rows, loaded.header_cols),
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn infers_kinds_and_missing() {
        let f = file("a,b,c\n1,x,\n2,y,3.5\n");
        let t = load_table(f.path(), &InputSpec::default()).unwrap();
        assert_eq!(t.input_shape, (2, 3));
        let ds = t.dataset;
        assert_eq!(ds.column("a").unwrap().kind(), ColumnKind::Numeric);
        assert_eq!(ds.column("b").unwrap().kind(), ColumnKind::Categorical);
        assert!(ds.numeric("c").unwrap()[0].is_nan());
    }

    #[test]
    fn tolerant_names_and_explicit_kinds() {
        let f = file("covid_res,Renal Chronic,age\n1,2,30\n2,1,40\n");
        let spec = InputSpec {
            target: Some("covid-res".into()),
            categorical: vec!["renal-chronic".into()],
            infer_unlisted: false,
            ..InputSpec::default()
        };
        let ds = load_table(f.path(), &spec).unwrap().dataset;
        assert_eq!(ds.column_names(), ["covid-res", "renal-chronic"]);
        assert_eq!(ds.target().unwrap().name(), "covid-res");
        assert!(resolve("nope", &["a".to_string()]).is_err());
        assert!(resolve("a-b", &["a_b".to_string(), "AB".to_string()]).is_err());
    }

    #[test]
    fn aliases_rename() {
        let f = file("covid_res,x\n1,2\n");
        let spec = InputSpec {
            target: Some("cov-res".into()),
            aliases: [("cov-res".to_string(), vec!["covid_res".to_string()])].into(),
            ..InputSpec::default()
        };
        let ds = load_table(f.path(), &spec).unwrap().dataset;
        assert_eq!(ds.column_names(), ["cov-res", "x"]);
    }
}
