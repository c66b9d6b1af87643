use serde::{Deserialize, Serialize};

use super::{add_ratio_column, drop_missing, filter_rows, Dataset, DatasetError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedColumn {
    pub name: String,
    pub numerator: String,
    pub denominator: String,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFilter {
    pub column: String,
    pub excluded: Vec<String>,
}

/// Declarative preprocessing: drop columns (optionally with missing rows),
/// filter rows, then append ratio columns.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecipeSpec {
    pub name: String,
    #[serde(default)]
    pub dropped_columns: Vec<String>,
    /// Also remove every row with a missing cell after dropping columns.
    #[serde(default)]
    pub drop_missing_rows: bool,
    #[serde(default)]
    pub row_filters: Vec<RowFilter>,
    #[serde(default)]
    pub derived_columns: Vec<DerivedColumn>,
    /// Shape of the raw file (rows, header columns).
    #[serde(default)]
    pub expected_input_shape: Option<(usize, usize)>,
    /// Shape after every transformation.
    #[serde(default)]
    pub expected_shape: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCheck {
    pub stage: String,
    pub expected: (usize, usize),
    pub actual: (usize, usize),
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct RecipeOutcome {
    pub dataset: Dataset,
    pub shape_checks: Vec<ShapeCheck>,
}

impl RecipeOutcome {
    /// First failed shape check as an error.
    pub fn ensure_shapes(&self) -> Result<()> {
        match self.shape_checks.iter().find(|c| !c.ok) {
            None => Ok(()),
            Some(c) => Err(DatasetError::ShapeMismatch {
                stage: c.stage.clone(),
                expected_rows: c.expected.0,
                expected_cols: c.expected.1,
                rows: c.actual.0,
                cols: c.actual.1,
            }),
        }
    }
}

/// Runs the recipe. Shape checks are recorded, never enforced here, and never
/// alter the data.
pub fn apply_recipe(
    ds: &Dataset,
    spec: &RecipeSpec,
    input_shape: (usize, usize),
) -> Result<RecipeOutcome> {
    for d in &spec.derived_columns {
        if d.scale.is_nan() {
            return Err(DatasetError::InvalidArgument(format!(
                "derived column {:?} has NaN scale",
                d.name
            )));
        }
    }
    let mut checks = Vec::new();
    if let Some(expected) = spec.expected_input_shape {
        checks.push(ShapeCheck {
            stage: "input".into(),
            expected,
            actual: input_shape,
            ok: expected == input_shape,
        });
    }

    let mut out = if spec.drop_missing_rows {
        drop_missing(ds, &spec.dropped_columns)?
    } else {
        ds.drop_columns(&spec.dropped_columns)?
    };
    for f in &spec.row_filters {
        out = filter_rows(&out, &f.column, &f.excluded)?;
    }
    for d in &spec.derived_columns {
        out = add_ratio_column(&out, &d.name, &d.numerator, &d.denominator, d.scale)?;
    }

    if let Some(expected) = spec.expected_shape {
        checks.push(ShapeCheck {
            stage: "output".into(),
            expected,
            actual: out.shape(),
            ok: expected == out.shape(),
        });
    }
    Ok(RecipeOutcome {
        dataset: out,
        shape_checks: checks,
    })
}
