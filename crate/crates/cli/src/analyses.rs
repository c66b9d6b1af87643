//! The analyses a recipe plan or a subcommand can run, and their report
//! files.

use boostlab_core::boosting::{train, BoostConfig, Ensemble, LossSpec};
use boostlab_core::dataset::{one_hot_encode, train_test_split, Column, ColumnKind, Dataset};
use boostlab_core::stats::{
    chi_squared_test, contingency_table, feature_importance, group_summary, one_way_anova,
    pearson_correlation_matrix, two_way_anova, AnovaTable, ChiSquaredResult, ContingencyTable,
    FeatureImportanceReport, ImportanceMetric, StatsError,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::{num, Metadata, ReportWriter};

fn default_alpha() -> f64 {
    0.05
}

fn default_normalized() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    /// Independence of each variable from `against`.
    Chi2 {
        name: String,
        variables: Vec<String>,
        against: String,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// One factor gives a one-way table, two an additive two-way table.
    Anova {
        name: String,
        response: String,
        factors: Vec<String>,
    },
    Summary {
        name: String,
        value: String,
        by: Vec<String>,
    },
    /// All numeric columns when `columns` is absent.
    Corr {
        name: String,
        #[serde(default)]
        columns: Option<Vec<String>>,
    },
    Train(TrainPlan),
}

impl Analysis {
    pub fn name(&self) -> &str {
        match self {
            Analysis::Chi2 { name, .. }
            | Analysis::Anova { name, .. }
            | Analysis::Summary { name, .. }
            | Analysis::Corr { name, .. } => name,
            Analysis::Train(t) => &t.name,
        }
    }

    pub fn op(&self) -> &'static str {
        match self {
            Analysis::Chi2 { .. } => "chi2",
            Analysis::Anova { .. } => "anova",
            Analysis::Summary { .. } => "summary",
            Analysis::Corr { .. } => "corr",
            Analysis::Train(_) => "train",
        }
    }

    /// Column names the analysis reads.
    pub fn columns(&self) -> Vec<String> {
        match self {
            Analysis::Chi2 { variables, against, .. } => {
                variables.iter().chain(std::iter::once(against)).cloned().collect()
            }
            Analysis::Anova { response, factors, .. } => {
                std::iter::once(response).chain(factors).cloned().collect()
            }
            Analysis::Summary { value, by, .. } => std::iter::once(value).chain(by).cloned().collect(),
            Analysis::Corr { columns, .. } => columns.clone().unwrap_or_default(),
            Analysis::Train(t) => std::iter::once(&t.target)
                .chain(t.features.iter().flatten())
                .chain(&t.exclude)
                .cloned()
                .collect(),
        }
    }
}

/// A boosting run: fit, score, and report feature importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainPlan {
    pub name: String,
    pub target: String,
    /// Every other column when absent.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default)]
    pub exclude: Vec<String>,
    /// Recode the target to 1 for this value and 0 otherwise.
    #[serde(default)]
    pub positive_label: Option<f64>,
    /// Held-out share of the rows.
    #[serde(default)]
    pub test_fraction: Option<f64>,
    #[serde(default)]
    pub config: BoostConfig,
    /// Tree counts at which importance is reported; the model is trained
    /// once with the largest.
    #[serde(default)]
    pub importance_at: Vec<usize>,
    #[serde(default)]
    pub metric: ImportanceMetric,
    #[serde(default = "default_normalized")]
    pub normalized: bool,
}

impl TrainPlan {
    pub fn new(name: impl Into<String>, target: impl Into<String>, config: BoostConfig) -> Self {
        Self {
            name: name.into(),
            target: target.into(),
            features: None,
            exclude: Vec::new(),
            positive_label: None,
            test_fraction: None,
            config,
            importance_at: Vec::new(),
            metric: ImportanceMetric::Gain,
            normalized: true,
        }
    }
}

/// Where reports go and what metadata they carry.
pub struct RunContext<'a> {
    pub writer: &'a ReportWriter,
    pub recipe: Option<&'a str>,
    pub seed: u64,
}

impl RunContext<'_> {
    fn meta(&self, analysis: &Analysis) -> Metadata {
        Metadata::new(self.recipe, analysis.name(), analysis.op(), self.seed)
    }
}

/// One line of the report index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub analysis: String,
    pub op: String,
    pub headline: String,
}

/// Numeric (non-target) columns become factors on their rendered values.
fn as_factors(ds: &Dataset, names: &[String]) -> Result<Dataset> {
    let mut out = ds.clone();
    for n in names {
        let col = out.column(n)?;
        if col.kind() == ColumnKind::Numeric {
            out = out.with_kind(n, ColumnKind::Categorical)?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Chi2Entry {
    variable: String,
    against: String,
    table: ContingencyTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<ChiSquaredResult<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejects_independence: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Chi2Report {
    alpha: f64,
    tests: Vec<Chi2Entry>,
}

pub fn run_analysis(ctx: &RunContext, ds: &Dataset, analysis: &Analysis) -> Result<Headline> {
    let meta = ctx.meta(analysis);
    let w = ctx.writer;
    let headline = match analysis {
        Analysis::Chi2 {
            name,
            variables,
            against,
            alpha,
        } => {
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(CliError::validation(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            let mut all = variables.clone();
            all.push(against.clone());
            let fds = as_factors(ds, &all)?;
            let mut tests = Vec::new();
            for v in variables {
                let table = contingency_table(&fds, v, against)?;
                let entry = match chi_squared_test::<f64>(&table) {
                    Ok(r) => Chi2Entry {
                        variable: v.clone(),
                        against: against.clone(),
                        rejects_independence: Some(r.rejects_at(*alpha)),
                        test: Some(r),
                        table,
                        error: None,
                    },
                    // a degenerate table is reported, not fatal
                    Err(e @ (StatsError::ZeroDof(_) | StatsError::ZeroMarginal(_))) => Chi2Entry {
                        variable: v.clone(),
                        against: against.clone(),
                        table,
                        test: None,
                        rejects_independence: None,
                        error: Some(e.to_string()),
                    },
                    Err(e) => return Err(e.into()),
                };
                tests.push(entry);
            }
            let rows: Vec<Vec<String>> = tests
                .iter()
                .map(|t| match &t.test {
                    Some(r) => vec![
                        t.variable.clone(),
                        t.against.clone(),
                        num(r.statistic),
                        r.dof.to_string(),
                        num(r.p_value),
                        t.table.total.to_string(),
                        r.rejects_at(*alpha).to_string(),
                    ],
                    None => vec![
                        t.variable.clone(),
                        t.against.clone(),
                        "nan".into(),
                        "0".into(),
                        "nan".into(),
                        t.table.total.to_string(),
                        String::new(),
                    ],
                })
                .collect();
            w.csv(
                name,
                &["variable", "against", "statistic", "dof", "p_value", "n", "rejects_independence"],
                &rows,
            )?;
            let rejected = tests.iter().filter(|t| t.rejects_independence == Some(true)).count();
            w.json(&meta, &Chi2Report { alpha: *alpha, tests })?;
            format!("{rejected} of {} variables reject independence at alpha {alpha}", variables.len())
        }
        Analysis::Anova {
            name,
            response,
            factors,
        } => {
            let fds = as_factors(ds, factors)?;
            let table: AnovaTable<f64> = match factors.as_slice() {
                [a] => one_way_anova(&fds, response, a)?,
                [a, b] => two_way_anova(&fds, response, a, b)?,
                _ => {
                    return Err(CliError::validation(format!(
                        "anova takes one or two factors, got {}",
                        factors.len()
                    )))
                }
            };
            let mut rows: Vec<Vec<String>> = table
                .terms
                .iter()
                .map(|t| {
                    vec![
                        t.name.clone(),
                        num(t.sum_sq),
                        t.dof.to_string(),
                        num(t.mean_sq),
                        num(t.f),
                        num(t.p),
                    ]
                })
                .collect();
            let r = &table.residual;
            rows.push(vec![
                "Residual".into(),
                num(r.sum_sq),
                r.dof.to_string(),
                num(r.mean_sq),
                String::new(),
                String::new(),
            ]);
            rows.push(vec![
                "Total".into(),
                num(table.total_sum_sq),
                (table.n - 1).to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            w.csv(name, &["term", "sum_sq", "dof", "mean_sq", "f", "p_value"], &rows)?;
            w.json(&meta, &table)?;
            table
                .terms
                .iter()
                .map(|t| format!("{}: F = {:.4}, p = {:.4}", t.name, t.f, t.p))
                .collect::<Vec<_>>()
                .join("; ")
        }
        Analysis::Summary { name, value, by } => {
            let fds = as_factors(ds, by)?;
            let s = group_summary(&fds, value, by)?;
            let mut header: Vec<&str> = by.iter().map(String::as_str).collect();
            header.extend(["count", "mean", "median", "q1", "q3", "min", "max"]);
            let rows: Vec<Vec<String>> = s
                .groups
                .iter()
                .map(|g| {
                    let mut r = g.group.clone();
                    r.push(g.count.to_string());
                    r.extend([g.mean, g.median, g.q1, g.q3, g.min, g.max].map(num));
                    r
                })
                .collect();
            w.csv(name, &header, &rows)?;
            w.json(&meta, &s)?;
            let top = s
                .groups
                .iter()
                .max_by(|a, b| a.median.total_cmp(&b.median))
                .map(|g| format!("highest median {} in {}", num(g.median), g.group.join("/")))
                .unwrap_or_default();
            format!("{} groups; {top}", s.groups.len())
        }
        Analysis::Corr { name, columns } => {
            let cols: Vec<String> = match columns {
                Some(c) => c.clone(),
                None => ds
                    .columns()
                    .iter()
                    .filter(|c| c.kind() != ColumnKind::Categorical)
                    .map(|c| c.name().to_string())
                    .collect(),
            };
            let m = pearson_correlation_matrix::<f64, _>(ds, &cols)?;
            let mut rows = Vec::new();
            for (i, a) in m.labels.iter().enumerate() {
                for (j, b) in m.labels.iter().enumerate() {
                    rows.push(vec![
                        a.clone(),
                        b.clone(),
                        num(m.r[i][j]),
                        num(m.r_squared[i][j]),
                        m.n[i][j].to_string(),
                    ]);
                }
            }
            w.csv(name, &["row", "column", "r", "r_squared", "n"], &rows)?;
            w.json(&meta, &m)?;
            let mut strongest: Option<(f64, usize, usize)> = None;
            for i in 0..cols.len() {
                for j in i + 1..cols.len() {
                    let r = m.r[i][j];
                    if !r.is_nan() && strongest.is_none_or(|(s, _, _)| r.abs() > s.abs()) {
                        strongest = Some((r, i, j));
                    }
                }
            }
            match strongest {
                Some((r, i, j)) => format!("strongest pair {} ~ {}: r = {:.4}", cols[i], cols[j], r),
                None => "no defined correlations".into(),
            }
        }
        Analysis::Train(plan) => run_train(ctx, ds, plan, &meta)?,
    };
    Ok(Headline {
        analysis: analysis.name().to_string(),
        op: analysis.op().to_string(),
        headline,
    })
}

/// Features and target for a plan: the chosen columns, the plan's target
/// (recoded when a positive label is set), rows with a missing target
/// removed, categorical features one-hot encoded.
pub fn training_frame(ds: &Dataset, plan: &TrainPlan) -> Result<Dataset> {
    ds.column(&plan.target)?;
    for e in &plan.exclude {
        ds.column(e)?;
    }
    let features: Vec<String> = match &plan.features {
        Some(f) => f.clone(),
        None => ds
            .column_names()
            .into_iter()
            .filter(|n| *n != plan.target)
            .map(str::to_string)
            .collect(),
    };
    let features: Vec<String> = features.into_iter().filter(|f| !plan.exclude.contains(f)).collect();
    if features.is_empty() {
        return Err(CliError::validation(format!("plan {:?} has no features", plan.name)));
    }
    if features.contains(&plan.target) {
        return Err(CliError::validation(format!("target {:?} is also a feature", plan.target)));
    }

    let mut frame = ds.clone();
    if let Some(t) = ds.target() {
        if t.name() != plan.target {
            frame = frame.with_kind(&t.name().to_string(), ColumnKind::Numeric)?;
        }
    }
    frame = frame.with_kind(&plan.target, ColumnKind::Target)?;
    let mut keep = features.clone();
    keep.push(plan.target.clone());
    frame = frame.select_columns(&keep)?;

    let y = frame.numeric(&plan.target)?.to_vec();
    let present: Vec<usize> = (0..y.len()).filter(|&i| !y[i].is_nan()).collect();
    if present.len() < y.len() {
        frame = frame.select_rows(&present);
    }
    if let Some(label) = plan.positive_label {
        let coded = frame
            .numeric(&plan.target)?
            .iter()
            .map(|&v| if v == label { 1.0 } else { 0.0 })
            .collect();
        frame = frame
            .drop_columns(&[plan.target.as_str()])?
            .with_column(Column::target(plan.target.clone(), coded))?;
    }
    for f in &features {
        if frame.column(f)?.kind() == ColumnKind::Categorical {
            frame = one_hot_encode(&frame, f)?;
        }
    }
    Ok(frame)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rows: usize,
    pub mean_loss: f64,
    /// Squared error only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    /// Logistic only, at probability 0.5.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

pub fn evaluate(model: &Ensemble<f64>, ds: &Dataset) -> Result<FitMetrics> {
    let y = ds
        .target()
        .ok_or_else(|| CliError::runtime("evaluation data has no target"))?
        .name()
        .to_string();
    let y = ds.numeric(&y)?;
    let raw = model.predict(ds)?;
    let n = y.len() as f64;
    let mean_loss = y.iter().zip(&raw).map(|(&t, &p)| model.loss.value(t, p)).sum::<f64>() / n;
    Ok(match model.loss {
        LossSpec::SquaredError => {
            let sse: f64 = y.iter().zip(&raw).map(|(t, p)| (t - p) * (t - p)).sum();
            let mean = y.iter().sum::<f64>() / n;
            let sst: f64 = y.iter().map(|t| (t - mean) * (t - mean)).sum();
            FitMetrics {
                rows: y.len(),
                mean_loss,
                rmse: Some((sse / n).sqrt()),
                r_squared: (sst > 0.0).then(|| 1.0 - sse / sst),
                accuracy: None,
            }
        }
        LossSpec::Logistic => {
            let hits = y
                .iter()
                .zip(&raw)
                .filter(|(&t, &p)| (model.loss.transform(p) >= 0.5) == (t == 1.0))
                .count();
            FitMetrics {
                rows: y.len(),
                mean_loss,
                rmse: None,
                r_squared: None,
                accuracy: Some(hits as f64 / n),
            }
        }
    })
}

#[derive(Serialize)]
struct ImportanceAt {
    n_trees: usize,
    report: FeatureImportanceReport<f64>,
}

#[derive(Serialize)]
struct TrainReport<'a> {
    target: &'a str,
    features: &'a [String],
    config: &'a BoostConfig,
    train: FitMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<FitMetrics>,
    importance: Vec<ImportanceAt>,
    model_file: String,
}

/// Importance of the first `k` trees; falls back to raw scores when the
/// trees have no splits to normalize by.
fn importance(model: &Ensemble<f64>, metric: ImportanceMetric, normalized: bool) -> Result<FeatureImportanceReport<f64>> {
    match feature_importance(model, metric, normalized) {
        Err(StatsError::ZeroTotal(_)) => Ok(feature_importance(model, metric, false)?),
        other => Ok(other?),
    }
}

/// A fitted plan with its training and held-out rows.
pub struct Fitted {
    pub model: Ensemble<f64>,
    pub fit_on: Dataset,
    pub held_out: Option<Dataset>,
    /// Tree counts for importance reports, ascending.
    pub importance_at: Vec<usize>,
}

pub fn fit_plan(ds: &Dataset, plan: &TrainPlan, seed: u64) -> Result<Fitted> {
    let mut config = plan.config.clone();
    config.seed = seed;
    config.validate()?;
    let mut counts = plan.importance_at.clone();
    if counts.is_empty() {
        counts.push(config.n_trees);
    }
    counts.sort_unstable();
    counts.dedup();
    config.n_trees = config.n_trees.max(*counts.last().unwrap());

    let frame = training_frame(ds, plan)?;
    let (fit_on, held_out) = match plan.test_fraction {
        Some(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::validation(format!("test_fraction must lie in (0, 1), got {f}")));
            }
            let (a, b) = train_test_split(&frame, 1.0 - f, seed)?;
            (a, Some(b))
        }
        None => (frame, None),
    };
    let model = train(&fit_on, &config)?;
    Ok(Fitted {
        model,
        fit_on,
        held_out,
        importance_at: counts,
    })
}

fn run_train(ctx: &RunContext, ds: &Dataset, plan: &TrainPlan, meta: &Metadata) -> Result<String> {
    let fitted = fit_plan(ds, plan, ctx.seed)?;
    let model_file = format!("{}.model.json", plan.name);
    std::fs::write(ctx.writer.path(&model_file), fitted.model.to_json()? + "\n")?;
    write_train_reports(ctx.writer, plan, &fitted, meta, &model_file)
}

/// Metrics and importance of a fitted plan as `<name>.csv` and `<name>.json`;
/// returns the headline.
pub fn write_train_reports(
    writer: &ReportWriter,
    plan: &TrainPlan,
    fitted: &Fitted,
    meta: &Metadata,
    model_file: &str,
) -> Result<String> {
    let model = &fitted.model;
    let train_metrics = evaluate(model, &fitted.fit_on)?;
    let test_metrics = fitted.held_out.as_ref().map(|t| evaluate(model, t)).transpose()?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &k in &fitted.importance_at {
        let report = importance(&model.truncated(k), plan.metric, plan.normalized)?;
        for (rank, e) in report.entries.iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                (rank + 1).to_string(),
                e.name.clone(),
                num(e.gain_importance),
                e.split_count.to_string(),
                num(e.score),
            ]);
        }
        reports.push(ImportanceAt { n_trees: k, report });
    }
    writer.csv(
        &plan.name,
        &["n_trees", "rank", "feature", "gain_importance", "split_count", "score"],
        &rows,
    )?;
    let top: Vec<String> = reports
        .last()
        .map(|r| r.report.entries.iter().take(3).map(|e| e.name.clone()).collect())
        .unwrap_or_default();
    let pick = |m: &FitMetrics| match model.loss {
        LossSpec::SquaredError => format!("rmse {}", num(m.rmse.unwrap_or(f64::NAN))),
        LossSpec::Logistic => format!("accuracy {}", num(m.accuracy.unwrap_or(f64::NAN))),
    };
    let score = match &test_metrics {
        Some(t) => format!("test {}", pick(t)),
        None => format!("train {}", pick(&train_metrics)),
    };
    writer.json(
        meta,
        &TrainReport {
            target: &plan.target,
            features: &model.feature_names,
            config: &model.config,
            train: train_metrics,
            test: test_metrics,
            importance: reports,
            model_file: model_file.to_string(),
        },
    )?;
    Ok(format!("{} trees, {score}; top features: {}", model.trees.len(), top.join(", ")))
}
