use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ColorError {
    #[error("a theme holds exactly 5 colors and 5 proportions, got {0}")]
    ThemeSize(usize),
    #[error("theme proportions must be finite, non-negative and not all zero")]
    InvalidProportions,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no decodable PNG files in {0}")]
    EmptyDirectory(PathBuf),
    #[error("cannot decode image {path}: {reason}")]
    UndecodableImage { path: PathBuf, reason: String },
    #[error("grid {n1}x{n2} is finer than the {width}x{height} image")]
    GridTooFine {
        n1: usize,
        n2: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("no archived snapshots found for {0}")]
    NoSnapshotsFound(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum FixedPartError {
    #[error("histograms have different bin layouts")]
    LayoutMismatch,
    #[error("block-sampling location needs at least two snapshots, got {0}")]
    NeedsMultipleSnapshots(usize),
    #[error("all block similarities are zero")]
    DegenerateSimilarities,
    #[error("snapshot {index} is {got:?}, expected {expected:?}")]
    SizeMismatch {
        index: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("grid has {grid} blocks but {values} values were supplied")]
    GridMismatch { grid: usize, values: usize },
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("lambda must be finite and non-negative")]
    InvalidLambda,
    #[error("weights must be finite and positive")]
    InvalidWeights,
    #[error("points and weights differ in length")]
    LengthMismatch,
    #[error("pixel set is empty")]
    EmptyPixelSet,
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature schema mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("requested {k} components but at most {max} are available")]
    TooManyComponents { k: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("bad feature table: {0}")]
    BadTable(String),
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("schema mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all sample weights are zero")]
    AllZeroWeights,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid hyperparameter: {0}")]
    InvalidParameter(String),
    #[error("bag {bag} stayed empty after {attempts} attempts")]
    EmptyBag { bag: usize, attempts: usize },
}

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("fixed-part mask selects no pixels")]
    EmptyMask,
    #[error("mask is {got:?} but image is {expected:?}")]
    MaskSize {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("reference needs at least 2 pixels, got {0}")]
    TooFewReferencePixels(usize),
    #[error("collection in {0} has no entries")]
    EmptyCollection(PathBuf),
    #[error("duplicate reference id {0}")]
    DuplicateId(String),
    #[error("reference {0} has neither an image nor a theme")]
    Unresolvable(String),
    #[error("top-N must be at least 1")]
    InvalidTopN,
}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    FixedPart(#[from] FixedPartError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code, used by the CLI's JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Color(_) => "invalid_theme",
            Error::Ingest(e) => match e {
                IngestError::EmptyDirectory(_) => "empty_directory",
                IngestError::UndecodableImage { .. } => "undecodable_image",
                IngestError::GridTooFine { .. } => "grid_too_fine",
                IngestError::InvalidImage(_) => "invalid_image",
                IngestError::Network(_) => "network_error",
                IngestError::NoSnapshotsFound(_) => "no_snapshots_found",
                IngestError::Io(_) => "io_error",
            },
            Error::FixedPart(e) => match e {
                FixedPartError::LayoutMismatch => "layout_mismatch",
                FixedPartError::NeedsMultipleSnapshots(_) => "needs_multiple_snapshots",
                FixedPartError::DegenerateSimilarities => "degenerate_similarities",
                FixedPartError::SizeMismatch { .. } => "size_mismatch",
                FixedPartError::GridMismatch { .. } => "grid_mismatch",
            },
            Error::Cluster(e) => match e {
                ClusterError::TooFewPoints { .. } => "too_few_points",
                ClusterError::EmptyPixelSet => "empty_pixel_set",
                _ => "invalid_clustering_input",
            },
            Error::Feature(e) => match e {
                FeatureError::SchemaMismatch { .. } => "schema_mismatch",
                _ => "feature_error",
            },
            Error::Learn(e) => match e {
                LearnError::SchemaMismatch { .. } | LearnError::DimensionMismatch { .. } => {
                    "schema_mismatch"
                }
                LearnError::AllZeroWeights => "all_zero_weights",
                LearnError::EmptyBag { .. } => "empty_bag",
                LearnError::EmptyDataset => "empty_dataset",
                LearnError::InvalidParameter(_) => "invalid_parameter",
            },
            Error::Transfer(e) => match e {
                TransferError::EmptyMask => "empty_mask",
                TransferError::MaskSize { .. } => "mask_size_mismatch",
                TransferError::TooFewReferencePixels(_) => "too_few_reference_pixels",
                TransferError::EmptyCollection(_) => "empty_collection",
                TransferError::DuplicateId(_) => "duplicate_id",
                TransferError::Unresolvable(_) => "unresolvable_reference",
                TransferError::InvalidTopN => "invalid_top_n",
            },
            Error::Io { .. } => "io_error",
            Error::Json { .. } => "json_error",
            Error::Csv(_) => "csv_error",
            Error::Image(_) => "image_error",
            Error::SelfTest(_) => "selftest_failed",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
