//! Command-line grammar.

use std::path::PathBuf;

use boostlab_core::boosting::{BoostConfig, GossParams, LossSpec, OrderedParams};
use boostlab_core::growers::{GrowerKind, SplitFinder};
use boostlab_core::stats::ImportanceMetric;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::load::InputSpec;

#[derive(Debug, Parser)]
#[command(name = "boostlab", version, about = "Gradient-boosted trees and the statistics around them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV (optionally through a recipe's preprocessing) and write its summary
    Ingest(IngestArgs),
    /// Run a replication recipe end to end
    Recipe(RecipeArgs),
    /// Fit a model and save it as JSON
    Train(TrainArgs),
    /// Score a CSV with a saved model
    Predict(PredictArgs),
    /// Feature importance of a saved model
    Importance(ImportanceArgs),
    /// Chi-squared tests of independence
    Chi2(Chi2Args),
    /// One- or two-way ANOVA
    Anova(AnovaArgs),
    /// Pearson correlation matrix
    Corr(CorrArgs),
    /// Grouped descriptive statistics
    Summary(SummaryArgs),
    /// Rebuild the index of a recipe's report directory
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: Option<String>,
    /// Columns read as labels even when they hold numbers
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Cell text read as missing
    #[arg(long, default_value = "")]
    pub missing_marker: String,
}

impl InputArgs {
    pub fn spec(&self) -> InputSpec {
        InputSpec {
            target: self.target.clone(),
            categorical: self.categorical.clone(),
            missing_marker: self.missing_marker.clone(),
            ..InputSpec::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Report file stem; defaults to the subcommand name
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Apply this recipe's preprocessing and write the prepared CSV too
    #[arg(long)]
    pub recipe: Option<String>,
    #[arg(long)]
    pub strict_shapes: bool,
}

#[derive(Debug, Args)]
pub struct RecipeArgs {
    /// Built-in recipe name or recipe file
    #[arg(long)]
    pub recipe: String,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail on a shape mismatch instead of warning
    #[arg(long)]
    pub strict_shapes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    SquaredError,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrowerArg {
    LevelWise,
    LeafWise,
    Oblivious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FinderArg {
    Histogram,
    Presorted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Gain,
    SplitCount,
}

impl From<MetricArg> for ImportanceMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Gain => ImportanceMetric::Gain,
            MetricArg::SplitCount => ImportanceMetric::SplitCount,
        }
    }
}

/// Hyperparameters; unset flags keep the library defaults.
#[derive(Debug, Args)]
pub struct BoostArgs {
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long, value_enum)]
    pub grower: Option<GrowerArg>,
    #[arg(long, value_enum)]
    pub finder: Option<FinderArg>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_leaves: Option<usize>,
    #[arg(long)]
    pub min_child_hessian: Option<f64>,
    #[arg(long)]
    pub max_bins: Option<usize>,
    /// GOSS top fraction; needs --goss-b
    #[arg(long, requires = "goss_b")]
    pub goss_a: Option<f64>,
    #[arg(long, requires = "goss_a")]
    pub goss_b: Option<f64>,
    /// Enable feature bundling with this conflict budget
    #[arg(long)]
    pub efb_max_conflicts: Option<usize>,
    /// Enable ordered boosting with this many prefix blocks
    #[arg(long)]
    pub ordered_blocks: Option<usize>,
    #[arg(long, requires = "ordered_blocks")]
    pub ordered_permutations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl BoostArgs {
    pub fn config(&self) -> BoostConfig {
        let mut c = BoostConfig::default();
        if let Some(l) = self.loss {
            c.loss = match l {
                LossArg::SquaredError => LossSpec::SquaredError,
                LossArg::Logistic => LossSpec::Logistic,
            };
        }
        if let Some(g) = self.grower {
            c.grower = match g {
                GrowerArg::LevelWise => GrowerKind::LevelWise,
                GrowerArg::LeafWise => GrowerKind::LeafWise,
                GrowerArg::Oblivious => GrowerKind::Oblivious,
            };
        }
        if let Some(f) = self.finder {
            c.finder = match f {
                FinderArg::Histogram => SplitFinder::Histogram,
                FinderArg::Presorted => SplitFinder::Presorted,
            };
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        set!(trees => n_trees, learning_rate => learning_rate, lambda => lambda, gamma => gamma,
             max_depth => max_depth, max_leaves => max_leaves,
             min_child_hessian => min_child_hessian, max_bins => max_bins);
        if let (Some(a), Some(b)) = (self.goss_a, self.goss_b) {
            c.goss = Some(GossParams { a, b });
        }
        c.efb = self.efb_max_conflicts;
        if let Some(n_blocks) = self.ordered_blocks {
            c.ordered = Some(OrderedParams {
                n_blocks,
                n_permutations: self.ordered_permutations.unwrap_or(1),
            });
        }
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Where to write the model JSON
    #[arg(long)]
    pub model: PathBuf,
    /// Feature columns; every non-target column by default
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Recode the target to 1 for this value, 0 otherwise
    #[arg(long)]
    pub positive_label: Option<f64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Also write metrics and importance reports here
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[command(flatten)]
    pub boost: BoostArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// Prediction CSV to write
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "gain")]
    pub metric: MetricArg,
    /// Scale scores to sum to 1
    #[arg(long)]
    pub normalized: bool,
    /// Use only the first N trees
    #[arg(long)]
    pub trees: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Chi2Args {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub variables: Vec<String>,
    #[arg(long)]
    pub against: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnovaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub response: String,
    /// One or two factor columns
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..=2)]
    pub factors: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Every numeric column by default
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub value: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub by: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Recipe whose directory to index
    #[arg(long)]
    pub recipe: String,
}
