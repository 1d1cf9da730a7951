//! litscreen: screening automation and evaluation for systematic
//! literature reviews.
//!
//! The library covers the full screening workflow:
//!
//! - [`corpus`]: load, validate, filter, profile, sample, and split
//!   title/abstract screening corpora (JSONL canonical, CSV import).
//! - [`prompt`]: the zero-shot screening prompt template, its rendering
//!   per article, and token-cost estimation.
//! - [`llm`]: a chat-completion client with retries, bounded
//!   parallelism, strict one-word decision parsing, and a record/replay
//!   cache for deterministic offline runs.
//! - [`baselines`]: from-scratch word2vec features and classical
//!   classifiers (logistic regression, complement naive Bayes, linear
//!   SVC, random forest, random) with stratified cross-validated
//!   randomized grid search optimizing F2.
//! - [`metrics`]: confusion-matrix metrics for imbalanced screening
//!   (precision, recall, specificity, NPV, balanced accuracy, F2,
//!   normalized MCC), Fleiss' kappa, WSS@recall, dispersion moments.
//! - [`analysis`]: multi-run experiments, consistency and
//!   generalizability reports, effort savings, and monetary cost.
//! - [`cli`]: the `litscreen` command-line surface binding it together.
//!
//! Start with the `examples/` directory: each example is a runnable
//! walk-through of one capability.

pub mod analysis;
pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod llm;
pub mod metrics;
pub mod prompt;
pub mod text;

pub use corpus::{Corpus, DatasetProfile, Decision, ScreeningRecord};
pub use error::{Error, Result};
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use prompt::{PromptTemplate, RenderedPrompt};
