//! Report files: `<dir>/<name>.json` (metadata plus the full result) and
//! `<dir>/<name>.csv` (the headline table).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
    pub analysis: String,
    pub op: String,
    pub seed: u64,
}

impl Metadata {
    pub fn new(recipe: Option<&str>, analysis: &str, op: &str, seed: u64) -> Self {
        Self {
            tool: "boostlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            recipe: recipe.map(str::to_string),
            analysis: analysis.into(),
            op: op.into(),
            seed,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    metadata: &'a Metadata,
    result: &'a R,
}

/// Shortest text that reads back to the same `f64`; non-finite values as
/// `nan`, `inf`, `-inf`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

pub struct ReportWriter {
    dir: PathBuf,
}

impl ReportWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn json<R: Serialize>(&self, meta: &Metadata, result: &R) -> Result<PathBuf> {
        let path = self.path(&format!("{}.json", meta.analysis));
        let mut text = serde_json::to_string_pretty(&Envelope { metadata: meta, result })?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(&format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(6.0), "6");
    }

    #[test]
    fn writes_envelope() {
        let dir = tempfile::tempdir().unwrap();
        let w = ReportWriter::new(dir.path().join("r")).unwrap();
        let meta = Metadata::new(Some("rec"), "a", "corr", 7);
        let p = w.json(&meta, &vec![1, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["metadata"]["seed"], 7);
        assert_eq!(v["result"][1], 2);
    }
}
