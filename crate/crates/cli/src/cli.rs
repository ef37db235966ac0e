use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bodyshape", version, about = "Body-shape classification from silhouette masks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every stochastic step (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Suppress summaries on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Embed a generation timestamp in report documents.
    #[arg(long, global = true)]
    pub stamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic silhouette masks with a manifest.
    Gen(GenArgs),
    /// Extract measurements from the masks of a manifest.
    Measure(MeasureArgs),
    /// Classify measurements or masks with a chosen method.
    Classify(ClassifyArgs),
    /// Train a neural classifier.
    Train(TrainArgs),
    /// Cluster a numeric table.
    Cluster(ClusterArgs),
    /// Score a predictions file.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Masks per class.
    #[arg(long, conflicts_with = "counts")]
    pub n_per_class: Option<usize>,

    /// Per-class counts in canonical class order, e.g. 50,315,166,315,95.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub counts: Option<Vec<usize>>,

    /// Top every class up to this size with rotated/flipped copies.
    #[arg(long)]
    pub augment_to: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Manifest CSV (`path,label`); mask paths are relative to it.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Drop,
    Kmeans,
    Fcm,
    #[value(name = "lda-nm")]
    LdaNm,
    Mlp13,
    Rescnn,
    Incnn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Drop => "drop",
            Method::Kmeans => "kmeans",
            Method::Fcm => "fcm",
            Method::LdaNm => "lda-nm",
            Method::Mlp13 => "mlp13",
            Method::Rescnn => "rescnn",
            Method::Incnn => "incnn",
        }
    }

    pub fn is_neural(self) -> bool {
        matches!(self, Method::Mlp13 | Method::Rescnn | Method::Incnn)
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Measurement CSV or manifest.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub method: Option<Method>,

    /// Fitted model: population stats, classifier JSON or network checkpoint.
    #[arg(long, conflicts_with = "fit_on")]
    pub model: Option<PathBuf>,

    /// Fit the model on this labeled measurement CSV or manifest first.
    #[arg(long)]
    pub fit_on: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Mlp13,
    Rescnn,
    Incnn,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled manifest, or a measurement CSV for mlp13.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub arch: Option<ArchArg>,

    /// Training epochs (default 50)
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Learning rate (default 0.01)
    #[arg(long)]
    pub lr: Option<f64>,

    /// SGD momentum (default 0.9)
    #[arg(long)]
    pub momentum: Option<f64>,

    /// Mini-batch size (default 32)
    #[arg(long)]
    pub batch_size: Option<usize>,

    /// Held-out fraction per class (default 0.2)
    #[arg(long)]
    pub val_fraction: Option<f64>,

    /// none | all | first:N | last:N | idx:I,J,...
    #[arg(long)]
    pub freeze: Option<String>,

    /// Start from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    pub init_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Bic,
    Silhouette,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Numeric CSV with an optional `label` column.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Cluster the default ratio features of a measurement CSV.
    #[arg(long)]
    pub ratios: bool,

    /// Drop rows with |z| above this in any column before normalizing.
    #[arg(long)]
    pub outlier_z: Option<f64>,

    /// PCA before clustering: a variance fraction in (0,1) or a component count.
    #[arg(long)]
    pub pca: Option<String>,

    /// Fixed k-means cluster count
    #[arg(long, conflicts_with = "select_k")]
    pub k: Option<usize>,

    /// Sweep a cluster-count range such as 2..5.
    #[arg(long)]
    pub select_k: Option<String>,

    /// Score for --select-k (default bic)
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,

    /// Fuzzy c-means instead of k-means.
    #[arg(long)]
    pub fuzzy: bool,

    /// Cluster count for fuzzy c-means.
    #[arg(long)]
    pub c: Option<usize>,

    /// Fuzzy c-means exponent m > 1 (default 2)
    #[arg(long)]
    pub fuzzifier: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with `predicted` and `actual` class-name columns.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}
