//! Replication recipes: preprocessing, expected shapes and the analyses to
//! run, as JSON. Four are built in; any other path is read from disk.

use std::path::Path;

use boostlab_core::dataset::{apply_recipe, Dataset, RecipeSpec, ShapeCheck};
use serde::{Deserialize, Serialize};

use crate::analyses::{run_analysis, Analysis, Headline, RunContext};
use crate::error::{CliError, Result};
use crate::load::{load_table, locate, InputSpec};
use crate::report::{Metadata, ReportWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationRecipe {
    pub recipe: RecipeSpec,
    #[serde(default)]
    pub input: InputSpec,
    /// Columns to keep; every other header column is dropped.
    #[serde(default)]
    pub keep_columns: Option<Vec<String>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
}

pub const BUILTIN: [(&str, &str); 4] = [
    ("education-covid", include_str!("../recipes/education-covid.json")),
    ("region-health", include_str!("../recipes/region-health.json")),
    ("mexican-covid", include_str!("../recipes/mexican-covid.json")),
    ("covid19-vax", include_str!("../recipes/covid19-vax.json")),
];

impl ReplicationRecipe {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("invalid recipe: {e}")))
    }

    /// A built-in recipe by name, else a recipe file.
    pub fn lookup(name_or_path: &str) -> Result<Self> {
        if let Some((_, text)) = BUILTIN.iter().find(|(n, _)| *n == name_or_path) {
            return Self::from_json(text);
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            return Self::from_json(&std::fs::read_to_string(path)?);
        }
        let names: Vec<&str> = BUILTIN.iter().map(|(n, _)| *n).collect();
        Err(CliError::validation(format!(
            "unknown recipe {name_or_path:?}; built-in recipes are {}",
            names.join(", ")
        )))
    }

    /// Every column name the recipe refers to.
    fn referenced(&self) -> Vec<String> {
        let r = &self.recipe;
        let mut names: Vec<String> = r.dropped_columns.clone();
        names.extend(r.row_filters.iter().map(|f| f.column.clone()));
        names.extend(r.derived_columns.iter().flat_map(|d| [d.numerator.clone(), d.denominator.clone()]));
        names.extend(self.keep_columns.iter().flatten().cloned());
        names.extend(self.analyses.iter().flat_map(Analysis::columns));
        names
    }

    /// Loads `input` and runs the preprocessing. Shape checks are recorded;
    /// the caller decides whether a failed one is fatal.
    pub fn prepare(&self, input: &Path) -> Result<Prepared> {
        let table = load_table(input, &self.input)?;
        let dataset = canonicalize(&table.dataset, &self.referenced(), &self.input);
        let mut spec = self.recipe.clone();
        if let Some(keep) = &self.keep_columns {
            for k in keep {
                dataset.column(k)?;
            }
            spec.dropped_columns.extend(
                dataset
                    .column_names()
                    .into_iter()
                    .filter(|n| !keep.iter().any(|k| k == n))
                    .map(str::to_string),
            );
        }
        let outcome = apply_recipe(&dataset, &spec, table.input_shape)?;
        let outcome_ok = outcome.ensure_shapes().map_err(CliError::from);
        Ok(Prepared {
            input_shape: table.input_shape,
            shape_checks: outcome.shape_checks,
            dataset: outcome.dataset,
            outcome_ok,
        })
    }
}

/// Columns spelled differently from a requested name (by case or
/// punctuation) take the requested name.
fn canonicalize(ds: &Dataset, wanted: &[String], spec: &InputSpec) -> Dataset {
    let header: Vec<String> = ds.column_names().into_iter().map(str::to_string).collect();
    let mut columns = ds.columns().to_vec();
    let mut changed = false;
    for w in wanted {
        if header.contains(w) {
            continue;
        }
        if let Ok(actual) = locate(w, &header, &spec.aliases) {
            if let Some(c) = columns.iter_mut().find(|c| c.name() == actual) {
                c.schema.name = w.clone();
                changed = true;
            }
        }
    }
    if changed {
        Dataset::new(columns).unwrap_or_else(|_| ds.clone())
    } else {
        ds.clone()
    }
}

pub struct Prepared {
    pub dataset: Dataset,
    pub input_shape: (usize, usize),
    pub shape_checks: Vec<ShapeCheck>,
    outcome_ok: Result<()>,
}

impl Prepared {
    pub fn mismatches(&self) -> Vec<&ShapeCheck> {
        self.shape_checks.iter().filter(|c| !c.ok).collect()
    }

    /// The first failed shape check as a validation error.
    pub fn ensure_shapes(&self) -> Result<()> {
        match &self.outcome_ok {
            Ok(()) => Ok(()),
            Err(e) => Err(CliError::validation(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct PreprocessReport {
    input_shape: (usize, usize),
    output_shape: (usize, usize),
    shape_checks: Vec<ShapeCheck>,
    columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeRun {
    pub recipe: String,
    pub input_shape: (usize, usize),
    pub output_shape: (usize, usize),
    pub shape_checks: Vec<ShapeCheck>,
    pub analyses: Vec<Headline>,
}

pub struct RunOptions {
    pub strict_shapes: bool,
    pub seed: Option<u64>,
}

/// Prepares the data, writes `preprocess` and one report per analysis under
/// `<out>/<recipe name>/`, and returns the index entries.
pub fn run_recipe(recipe: &ReplicationRecipe, input: &Path, out: &Path, opts: &RunOptions) -> Result<RecipeRun> {
    let name = recipe.recipe.name.clone();
    let prepared = recipe.prepare(input)?;
    for c in prepared.mismatches() {
        eprintln!(
            "warning: {name}: {} shape is {}x{}, expected {}x{}",
            c.stage, c.actual.0, c.actual.1, c.expected.0, c.expected.1
        );
    }
    if opts.strict_shapes {
        prepared.ensure_shapes()?;
    }
    let seed = opts.seed.unwrap_or(recipe.seed);
    let writer = ReportWriter::new(out.join(&name))?;
    let ds = &prepared.dataset;
    writer.json(
        &Metadata::new(Some(&name), "preprocess", "preprocess", seed),
        &PreprocessReport {
            input_shape: prepared.input_shape,
            output_shape: ds.shape(),
            shape_checks: prepared.shape_checks.clone(),
            columns: ds.column_names().into_iter().map(str::to_string).collect(),
        },
    )?;
    let ctx = RunContext {
        writer: &writer,
        recipe: Some(&name),
        seed,
    };
    let mut headlines = Vec::new();
    for a in &recipe.analyses {
        headlines.push(run_analysis(&ctx, ds, a)?);
    }
    let run = RecipeRun {
        recipe: name.clone(),
        input_shape: prepared.input_shape,
        output_shape: ds.shape(),
        shape_checks: prepared.shape_checks,
        analyses: headlines,
    };
    write_index(&writer, &run, seed)?;
    Ok(run)
}

/// `report.json` and `report.csv`: one line per analysis.
pub fn write_index(writer: &ReportWriter, run: &RecipeRun, seed: u64) -> Result<()> {
    let rows: Vec<Vec<String>> = run
        .analyses
        .iter()
        .map(|h| vec![h.analysis.clone(), h.op.clone(), h.headline.clone()])
        .collect();
    writer.csv("report", &["analysis", "op", "headline"], &rows)?;
    writer.json(&Metadata::new(Some(&run.recipe), "report", "report", seed), run)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_recipes_parse() {
        for (name, _) in BUILTIN {
            let r = ReplicationRecipe::lookup(name).unwrap();
            assert_eq!(r.recipe.name, name);
            assert!(!r.analyses.is_empty());
        }
        assert!(matches!(ReplicationRecipe::lookup("nope"), Err(CliError::Validation(_))));
    }
}
