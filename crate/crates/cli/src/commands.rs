//! Subcommand bodies.

use std::fs;
use std::path::Path;

use boostlab_core::boosting::Ensemble;
use boostlab_core::dataset::{write_csv, Column, ColumnKind, Dataset, DatasetSummary, ShapeCheck};
use boostlab_core::stats::feature_importance;
use serde::Serialize;

use crate::analyses::{fit_plan, run_analysis, write_train_reports, Analysis, Headline, RunContext, TrainPlan};
use crate::args::*;
use crate::error::{CliError, Result};
use crate::load::load_table;
use crate::plan::{run_recipe, write_index, RecipeRun, ReplicationRecipe, RunOptions};
use crate::report::{num, Metadata, ReportWriter};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Recipe(a) => recipe(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Importance(a) => importance(a),
        Command::Chi2(a) => {
            let analysis = Analysis::Chi2 {
                name: a.out.name.clone().unwrap_or_else(|| "chi2".into()),
                variables: a.variables,
                against: a.against,
                alpha: a.alpha,
            };
            single(&a.input, &a.out, analysis)
        }
        Command::Anova(a) => {
            let analysis = Analysis::Anova {
                name: a.out.name.clone().unwrap_or_else(|| "anova".into()),
                response: a.response,
                factors: a.factors,
            };
            single(&a.input, &a.out, analysis)
        }
        Command::Corr(a) => {
            let analysis = Analysis::Corr {
                name: a.out.name.clone().unwrap_or_else(|| "corr".into()),
                columns: (!a.columns.is_empty()).then_some(a.columns),
            };
            single(&a.input, &a.out, analysis)
        }
        Command::Summary(a) => {
            let analysis = Analysis::Summary {
                name: a.out.name.clone().unwrap_or_else(|| "summary".into()),
                value: a.value,
                by: a.by,
            };
            single(&a.input, &a.out, analysis)
        }
        Command::Report(a) => report(a),
    }
}

fn print_headline(h: &Headline) {
    println!("{} ({}): {}", h.analysis, h.op, h.headline);
}

fn single(input: &InputArgs, out: &OutputArgs, analysis: Analysis) -> Result<()> {
    let ds = load_table(&input.input, &input.spec())?.dataset;
    let writer = ReportWriter::new(&out.output_dir)?;
    let ctx = RunContext {
        writer: &writer,
        recipe: None,
        seed: out.seed,
    };
    print_headline(&run_analysis(&ctx, &ds, &analysis)?);
    Ok(())
}

#[derive(Serialize)]
struct IngestReport {
    input_shape: (usize, usize),
    #[serde(skip_serializing_if = "Vec::is_empty")]
    shape_checks: Vec<ShapeCheck>,
    summary: DatasetSummary,
}

fn ingest(a: IngestArgs) -> Result<()> {
    let (ds, input_shape, checks, recipe) = match &a.recipe {
        Some(name) => {
            let r = ReplicationRecipe::lookup(name)?;
            let prepared = r.prepare(&a.input.input)?;
            for c in prepared.mismatches() {
                eprintln!(
                    "warning: {} shape is {}x{}, expected {}x{}",
                    c.stage, c.actual.0, c.actual.1, c.expected.0, c.expected.1
                );
            }
            if a.strict_shapes {
                prepared.ensure_shapes()?;
            }
            (prepared.dataset, prepared.input_shape, prepared.shape_checks, Some(r.recipe.name))
        }
        None => {
            let t = load_table(&a.input.input, &a.input.spec())?;
            (t.dataset, t.input_shape, Vec::new(), None)
        }
    };
    let writer = ReportWriter::new(&a.output_dir)?;
    writer.json(
        &Metadata::new(recipe.as_deref(), "ingest", "ingest", 0),
        &IngestReport {
            input_shape,
            shape_checks: checks,
            summary: ds.summary(),
        },
    )?;
    let file = fs::File::create(writer.path("dataset.csv"))?;
    write_csv(&ds, std::io::BufWriter::new(file))?;
    println!("{} rows x {} columns", ds.n_rows(), ds.n_cols());
    Ok(())
}

fn recipe(a: RecipeArgs) -> Result<()> {
    let r = ReplicationRecipe::lookup(&a.recipe)?;
    let run = run_recipe(
        &r,
        &a.input,
        &a.output_dir,
        &RunOptions {
            strict_shapes: a.strict_shapes,
            seed: a.seed,
        },
    )?;
    for h in &run.analyses {
        print_headline(h);
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let target = a
        .input
        .target
        .clone()
        .ok_or_else(|| CliError::validation("train needs --target"))?;
    let mut plan = TrainPlan::new("train", target, a.boost.config());
    plan.features = (!a.features.is_empty()).then(|| a.features.clone());
    plan.exclude = a.exclude.clone();
    plan.positive_label = a.positive_label;
    plan.test_fraction = a.test_fraction;
    plan.config.validate()?;
    let ds = load_table(&a.input.input, &a.input.spec())?.dataset;
    let seed = plan.config.seed;
    let fitted = fit_plan(&ds, &plan, seed)?;
    fs::write(&a.model, fitted.model.to_json()? + "\n")?;
    if let Some(dir) = &a.output_dir {
        let writer = ReportWriter::new(dir)?;
        let meta = Metadata::new(None, "train", "train", seed);
        let headline = write_train_reports(&writer, &plan, &fitted, &meta, &a.model.display().to_string())?;
        println!("{headline}");
    } else {
        println!("{} trees written to {}", fitted.model.trees.len(), a.model.display());
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<Ensemble<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("cannot read model {}: {e}", path.display())))?;
    Ensemble::from_json(&text).map_err(|e| CliError::runtime(format!("model {}: {e}", path.display())))
}

/// The model's feature columns from `ds`; `column=label` features are
/// rebuilt as indicators of a categorical column.
fn model_inputs(model: &Ensemble<f64>, ds: &Dataset) -> Result<Dataset> {
    let mut columns = Vec::with_capacity(model.feature_names.len());
    for f in &model.feature_names {
        if let Ok(c) = ds.column(f) {
            if c.kind() != ColumnKind::Categorical {
                columns.push(Column::numeric(f.clone(), ds.numeric(f)?.to_vec()));
                continue;
            }
        }
        let indicator = f.split_once('=').and_then(|(col, label)| {
            let (codes, labels) = ds.categorical(col).ok()?;
            let level = labels.iter().position(|l| l == label).map(|p| p as u32);
            Some(codes.iter().map(|&c| if Some(c) == level { 1.0 } else { 0.0 }).collect())
        });
        match indicator {
            Some(values) => columns.push(Column::numeric(f.clone(), values)),
            None => return Err(CliError::runtime(format!("input has no numeric column {f:?} the model needs"))),
        }
    }
    Ok(Dataset::new(columns)?)
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let ds = load_table(&a.input.input, &a.input.spec())?.dataset;
    let inputs = model_inputs(&model, &ds)?;
    let raw = model.predict(&inputs)?;
    let mut w = csv::Writer::from_path(&a.output)?;
    w.write_record(["row", "raw", "prediction"])?;
    for (i, r) in raw.iter().enumerate() {
        w.write_record([i.to_string(), num(*r), num(model.loss.transform(*r))])?;
    }
    w.flush()?;
    println!("{} predictions written to {}", raw.len(), a.output.display());
    Ok(())
}

fn importance(a: ImportanceArgs) -> Result<()> {
    let mut model = load_model(&a.model)?;
    if let Some(n) = a.trees {
        if n > model.trees.len() {
            return Err(CliError::validation(format!(
                "--trees {n} exceeds the model's {} trees",
                model.trees.len()
            )));
        }
        model = model.truncated(n);
    }
    let report = feature_importance(&model, a.metric.into(), a.normalized)?;
    let name = a.out.name.clone().unwrap_or_else(|| "importance".into());
    let writer = ReportWriter::new(&a.out.output_dir)?;
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .enumerate()
        .map(|(rank, e)| {
            vec![
                (rank + 1).to_string(),
                e.name.clone(),
                num(e.gain_importance),
                e.split_count.to_string(),
                num(e.score),
            ]
        })
        .collect();
    writer.csv(&name, &["rank", "feature", "gain_importance", "split_count", "score"], &rows)?;
    writer.json(&Metadata::new(None, &name, "importance", a.out.seed), &report)?;
    for e in report.entries.iter().take(5) {
        println!("{}\t{}", e.name, num(e.score));
    }
    Ok(())
}

/// Re-indexes `<output-dir>/<recipe>/` from its report envelopes, keeping
/// the headlines of the last recipe run.
fn report(a: ReportArgs) -> Result<()> {
    let name = ReplicationRecipe::lookup(&a.recipe)
        .map(|r| r.recipe.name)
        .unwrap_or_else(|_| a.recipe.clone());
    let writer = ReportWriter::new(a.output_dir.join(&name))?;
    let previous: Option<RecipeRun> = fs::read_to_string(writer.path("report.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| serde_json::from_value(v["result"].clone()).ok());
    let mut files: Vec<_> = fs::read_dir(writer.dir())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let f = p.file_name().and_then(|f| f.to_str()).unwrap_or("");
            f.ends_with(".json") && !f.ends_with(".model.json") && f != "report.json"
        })
        .collect();
    files.sort();
    let mut analyses = Vec::new();
    let mut seed = 0;
    for p in files {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p)?)?;
        let meta: Metadata = serde_json::from_value(v["metadata"].clone())
            .map_err(|e| CliError::runtime(format!("{}: not a report envelope: {e}", p.display())))?;
        seed = meta.seed;
        if meta.op == "preprocess" {
            continue;
        }
        let headline = previous
            .iter()
            .flat_map(|r| &r.analyses)
            .find(|h| h.analysis == meta.analysis)
            .map(|h| h.headline.clone())
            .unwrap_or_default();
        analyses.push(Headline {
            analysis: meta.analysis,
            op: meta.op,
            headline,
        });
    }
    if analyses.is_empty() {
        return Err(CliError::runtime(format!("no reports under {}", writer.dir().display())));
    }
    let run = RecipeRun {
        recipe: name,
        input_shape: previous.as_ref().map_or((0, 0), |r| r.input_shape),
        output_shape: previous.as_ref().map_or((0, 0), |r| r.output_shape),
        shape_checks: previous.map(|r| r.shape_checks).unwrap_or_default(),
        analyses,
    };
    write_index(&writer, &run, seed)?;
    for h in &run.analyses {
        print_headline(h);
    }
    Ok(())
}
