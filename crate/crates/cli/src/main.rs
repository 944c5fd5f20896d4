//! `webcolor` command-line tool.
//!
//! Every failure prints `{"error": <code>, "message": <text>}` on stderr and
//! exits with status 1 (2 for argument errors).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "webcolor",
    version,
    about = "Color theme extraction, assessment and transfer for web pages"
)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract a five-color theme from a snapshot directory or a single PNG.
    ExtractTheme(ExtractThemeArgs),
    /// Locate the fixed part of a page from its snapshots.
    LocateFixed(LocateFixedArgs),
    /// Build a feature table (CSV) from theme JSON files.
    Features(FeaturesArgs),
    /// Train an assessment model from a rated source table and a target table.
    Train(TrainArgs),
    /// Score themes (JSON) or feature tables (CSV) with a model.
    Assess(AssessArgs),
    /// Recolor a page toward a reference collection and rank the results.
    Transfer(TransferArgs),
    /// Average color-summary error of a theme against an image.
    EvalAcs(EvalAcsArgs),
    /// Residual sum of squares of a model on a rated table.
    EvalRsse(EvalRsseArgs),
    /// Pearson correlation of each feature with the rating.
    Correlate(CorrelateArgs),
    /// Download archived snapshots of a page.
    FetchSnapshots(FetchArgs),
    /// Run the generated end-to-end pipeline twice and compare outputs.
    Selftest,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Locator {
    /// Block sampling weighted by cross-snapshot similarity.
    BlockSampling,
    /// Per-pixel mean of all snapshots.
    Synthesize,
    /// Use the whole (first) image.
    None,
}

#[derive(Args, Debug)]
struct ExtractThemeArgs {
    /// Snapshot directory or PNG file.
    input: PathBuf,
    /// Default: block-sampling for directories, none for files.
    #[arg(long, value_enum)]
    locator: Option<Locator>,
    /// Clustering outlier penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// Plain weighted K-means instead of the outlier-aware variant.
    #[arg(long)]
    plain: bool,
    /// Theme JSON output (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a swatch PNG.
    #[arg(long)]
    swatch: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LocateFixedArgs {
    /// Snapshot directory.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "block-sampling")]
    locator: Locator,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    /// Theme JSON files or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// CSV with `id,rating` columns; ids are theme file stems.
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Rated source table.
    #[arg(long)]
    source: PathBuf,
    /// Unlabeled target table (required unless --no-kmm).
    #[arg(long)]
    target: Option<PathBuf>,
    /// LASSO penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// Ensemble members.
    #[arg(long = "L", alias = "members")]
    members: Option<usize>,
    /// Upper bound on each sample weight.
    #[arg(long = "B")]
    b: Option<f64>,
    /// Relative slack on the total weight.
    #[arg(long)]
    epsilon: Option<f64>,
    /// RBF kernel width (default: median pairwise distance).
    #[arg(long)]
    sigma: Option<f64>,
    /// Skip reweighting: all samples get weight 1.
    #[arg(long)]
    no_kmm: bool,
    /// Weight samples by their weights inside each bag too.
    #[arg(long)]
    weighted_bags: bool,
    /// Project features onto this many principal components first.
    #[arg(long)]
    pca: Option<usize>,
    /// Hold out this fraction of the source and report its RSSE.
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct AssessArgs {
    #[arg(long)]
    model: PathBuf,
    /// Theme JSON files or feature CSV tables.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct TransferArgs {
    /// Source page: PNG file or snapshot directory.
    #[arg(long)]
    source: PathBuf,
    /// Fixed-part mask PNG (white = recolor).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Locate the fixed part by block sampling (needs a snapshot directory).
    #[arg(long)]
    auto_mask: bool,
    /// Reference directory (with or without collection.json).
    #[arg(long)]
    collection: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Number of results to keep.
    #[arg(long)]
    top: Option<usize>,
    /// Skip references whose theme is farther than this (mean ΔE).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EvalAcsArgs {
    /// PNG file or snapshot directory (first snapshot is used).
    image: PathBuf,
    #[arg(long)]
    theme: PathBuf,
    /// Restrict to the white pixels of this mask.
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalRsseArgs {
    #[arg(long)]
    model: PathBuf,
    /// Rated feature table.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    /// Rated feature table.
    #[arg(long)]
    data: PathBuf,
    /// Keep only the strongest correlations.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct FetchArgs {
    /// Page URL.
    url: String,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Listing endpoint template ({url}, {count}).
    #[arg(long)]
    list_template: Option<String>,
    /// Image endpoint template ({url}, {timestamp}).
    #[arg(long)]
    image_template: Option<String>,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

fn report(code: &str, message: &str) {
    let body = serde_json::json!({ "error": code, "message": message });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("invalid_arguments", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.code(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
