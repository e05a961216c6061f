use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate observation for region `{region}` in year {year}")]
    DuplicateObservation { region: String, year: i32 },

    #[error("region `{region}` maps to multiple countries (`{first}` and `{second}`)")]
    RegionMultipleCountries {
        region: String,
        first: String,
        second: String,
    },

    #[error("region `{0}` has missing or inconsistent centroids across its observations")]
    InconsistentCentroid(String),

    #[error("observation has {found} predictor values but the dataset declares {expected}")]
    PredictorArity { expected: usize, found: usize },

    #[error("unknown predictor `{0}`")]
    UnknownPredictor(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("design has no usable rows after lag trimming")]
    EmptyDesign,

    #[error("column `{0}` is not available for custom clustering")]
    UnknownClusterColumn(String),

    #[error("region `{region}` year {year} has no value in clustering column `{column}`")]
    MissingClusterValue {
        region: String,
        year: i32,
        column: String,
    },

    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("not enough observations to fit: n = {n}, p = {p}")]
    TooFewObservations { n: usize, p: usize },

    #[error("rank-deficient design; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("non-positive variance for coefficient `{0}`")]
    NonPositiveVariance(String),

    #[error("term `{0}` is not present in the fitted model")]
    TermNotInModel(String),

    #[error("cross-validation fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty validation fold {0}")]
    EmptyFold(usize),

    #[error("covariance not positive definite for block size {block_size} (sigma2 = {sigma2}, rho = {rho})")]
    NotPositiveDefinite {
        block_size: usize,
        sigma2: f64,
        rho: f64,
    },

    #[error("rho is unidentified: every block has size 1")]
    RhoUnidentified,

    #[error("variance {given} is inconsistent with the residual mean square {computed}")]
    InconsistentVariance { given: f64, computed: f64 },

    #[error("bootstrap aborted: {failed} of {attempted} refits were rank-deficient")]
    BootstrapFailed { failed: usize, attempted: usize },

    #[error("scenario columns do not match the fitted model (missing: [{}], unexpected: [{}])", .missing.join(", "), .unexpected.join(", "))]
    ColumnMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
