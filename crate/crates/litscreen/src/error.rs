//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

/// All failures surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required field `{field}`{}", fmt_line(.line))]
    Schema { field: String, line: Option<usize> },

    #[error("cannot profile empty corpus")]
    EmptyCorpus,

    #[error("stratum `{stratum}` holds {available} records but {requested} were requested (short by {shortfall})")]
    Stratum {
        stratum: String,
        requested: usize,
        available: usize,
        shortfall: usize,
    },

    #[error("corpus of {size} records cannot be split with at least one record on each side")]
    SplitTooSmall { size: usize },

    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadTrainFraction(f64),

    #[error("{what} must lie in [0, 1], got {value}")]
    BadRatio { what: &'static str, value: f64 },

    #[error("prompt template invalid: {0}")]
    Template(String),

    #[error("record `{key}` has no usable field `{field}`")]
    PromptField { key: String, field: String },

    #[error("invalid LLM configuration: {0}")]
    LlmConfig(String),

    #[error("replay cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Batch(#[from] crate::llm::BatchError),

    #[error("endpoint: {0}")]
    Endpoint(String),

    #[error("recall undefined: no ground-truth inclusions (tp + fn = 0)")]
    RecallUndefined,

    #[error("agreement matrix needs at least {needed} {what}, got {got}")]
    AgreementShape {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("agreement matrix is ragged: item {item} has {got} decisions, expected {expected}")]
    RaggedMatrix {
        item: usize,
        got: usize,
        expected: usize,
    },

    #[error("vocabulary holds {size} tokens, below the minimum of {minimum}")]
    VocabularyTooSmall { size: usize, minimum: usize },

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training labels contain a single class; both inclusion and exclusion examples are required")]
    SingleClassTraining,

    #[error("stratified {folds}-fold CV needs at least {folds} records per class, got {positives} included / {negatives} excluded")]
    TooFewPerClass {
        folds: usize,
        positives: usize,
        negatives: usize,
    },

    #[error("unsupported kernel `{0}`; only `linear` is available")]
    UnsupportedKernel(String),

    #[error("unknown classifier kind `{0}`")]
    UnknownClassifier(String),

    #[error("hyperparameter `{name}`: {message}")]
    BadHyperparameter { name: String, message: String },

    #[error("experiment plan invalid: {0}")]
    Plan(String),

    #[error("run series: {0}")]
    Series(String),

    #[error("runs cover different record sets (run 0 and run {run} differ)")]
    MismatchedRecordSets { run: usize },

    #[error("consistency analysis needs at least 2 runs, got {0}")]
    NotEnoughRuns(usize),

    #[error("cross-dataset aggregation needs at least 2 datasets, got {0}")]
    NotEnoughDatasets(usize),

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("price per 1k tokens must be non-negative")]
    NegativePrice,

    #[error("unknown report format `{0}` (expected markdown, csv, or json)")]
    UnknownFormat(String),

    #[error("experiment aborted after {completed} completed runs: {cause}")]
    SeriesAborted {
        completed: usize,
        #[source]
        cause: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("config file: {0}")]
    Config(String),
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl Error {
    /// CLI exit code: 2 for data errors, 3 for endpoint failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Batch(_) | Error::Endpoint(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
