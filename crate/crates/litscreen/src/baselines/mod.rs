//! Classical baseline classifiers and feature extraction: word2vec
//! document embeddings, five classifier kinds behind one contract, and
//! the cross-validated randomized grid search that tunes them.

pub mod cv;
pub mod forest;
pub mod grid;
pub mod linear;
pub mod naive_bayes;
pub mod word2vec;

pub use cv::{cross_validate, grid_search_cv, stratified_folds, CvResult, CvSettings};
pub use grid::{default_grid, load_grids, logspace, ParamGrid, ParamMap, ParamValue};
pub use word2vec::{train_word2vec, EmbeddingModel, Word2VecConfig};

use std::str::FromStr;
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Decision};
use crate::error::{Error, Result};
use crate::text::tokenize;

use forest::{ForestParams, RandomForest};
use grid::{param_f64, param_text, param_usize};
use linear::{LinearSvc, LogisticModel, LogisticParams, Penalty, SvcParams};
use naive_bayes::{CnbParams, ComplementNb};

/// A fixed-length document feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// True when no token of the document was in the embedding
    /// vocabulary; the values are all zero in that case.
    pub all_oov: bool,
}

/// The five classifier kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Random,
    LogisticRegression,
    ComplementNaiveBayes,
    LinearSvc,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Random,
        ClassifierKind::LogisticRegression,
        ClassifierKind::ComplementNaiveBayes,
        ClassifierKind::LinearSvc,
        ClassifierKind::RandomForest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassifierKind::Random => "random",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::ComplementNaiveBayes => "complement_naive_bayes",
            ClassifierKind::LinearSvc => "linear_svc",
            ClassifierKind::RandomForest => "random_forest",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random" | "rand" => Ok(ClassifierKind::Random),
            "logistic_regression" | "lr" => Ok(ClassifierKind::LogisticRegression),
            "complement_naive_bayes" | "cnb" => Ok(ClassifierKind::ComplementNaiveBayes),
            "linear_svc" | "svc" => Ok(ClassifierKind::LinearSvc),
            "random_forest" | "rf" => Ok(ClassifierKind::RandomForest),
            other => Err(Error::UnknownClassifier(other.into())),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform random decisions with a configurable inclusion probability;
/// the floor every learned classifier must beat.
#[derive(Debug)]
pub struct RandomClassifier {
    p_include: f64,
    rng: Mutex<ChaCha8Rng>,
}

impl RandomClassifier {
    pub fn new(p_include: f64, seed: u64) -> RandomClassifier {
        RandomClassifier {
            p_include,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn predict(&self) -> Decision {
        let draw: f64 = self.rng.lock().expect("rng poisoned").gen();
        if draw < self.p_include {
            Decision::Include
        } else {
            Decision::Exclude
        }
    }

    pub fn score(&self) -> f64 {
        self.p_include
    }
}

/// A fitted classifier of any kind; predictions follow the shared
/// contract of a binary decision per feature vector, thresholding the
/// model's score at 0.5 (the random kind draws instead).
#[derive(Debug)]
pub enum TrainedClassifier {
    Random(Box<RandomClassifier>),
    Logistic(LogisticModel),
    ComplementNb(ComplementNb),
    LinearSvc(LinearSvc),
    Forest(RandomForest),
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedClassifier::Random(_) => ClassifierKind::Random,
            TrainedClassifier::Logistic(_) => ClassifierKind::LogisticRegression,
            TrainedClassifier::ComplementNb(_) => ClassifierKind::ComplementNaiveBayes,
            TrainedClassifier::LinearSvc(_) => ClassifierKind::LinearSvc,
            TrainedClassifier::Forest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn predict(&self, features: &FeatureVector) -> Decision {
        match self {
            TrainedClassifier::Random(m) => m.predict(),
            TrainedClassifier::Logistic(m) => m.predict(features),
            TrainedClassifier::ComplementNb(m) => m.predict(features),
            TrainedClassifier::LinearSvc(m) => m.predict(features),
            TrainedClassifier::Forest(m) => m.predict(features),
        }
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        match self {
            TrainedClassifier::Random(m) => m.score(),
            TrainedClassifier::Logistic(m) => m.score(features),
            TrainedClassifier::ComplementNb(m) => m.score(features),
            TrainedClassifier::LinearSvc(m) => m.score(features),
            TrainedClassifier::Forest(m) => m.score(features),
        }
    }
}

/// Mean-pool embedding vectors of the in-vocabulary tokens of
/// title + abstract. A document with no known token gets a zero vector
/// with the `all_oov` flag set.
pub fn featurize(corpus: &Corpus, model: &EmbeddingModel) -> Vec<FeatureVector> {
    let d = model.dimension();
    corpus
        .iter()
        .map(|record| {
            let mut tokens = tokenize(&record.title);
            tokens.extend(tokenize(&record.abstract_text));
            let mut values = vec![0.0f64; d];
            let mut hits = 0usize;
            for token in &tokens {
                if let Some(vector) = model.vector(token) {
                    for (acc, v) in values.iter_mut().zip(vector) {
                        *acc += v;
                    }
                    hits += 1;
                }
            }
            if hits > 0 {
                for v in values.iter_mut() {
                    *v /= hits as f64;
                }
            }
            FeatureVector {
                values,
                all_oov: hits == 0,
            }
        })
        .collect()
}

/// Fit one classifier kind with the given hyperparameters. `seed` feeds
/// the stochastic kinds (random, random forest); the rest are
/// deterministic by construction.
pub fn train_classifier(
    kind: ClassifierKind,
    params: &ParamMap,
    features: &[FeatureVector],
    labels: &[Decision],
    seed: u64,
) -> Result<TrainedClassifier> {
    let includes = labels.iter().filter(|l| **l == Decision::Include).count();
    if labels.is_empty() || includes == 0 || includes == labels.len() {
        return Err(Error::SingleClassTraining);
    }
    match kind {
        ClassifierKind::Random => {
            let p_include = param_f64(params, "p_include", 0.5)?;
            Ok(TrainedClassifier::Random(Box::new(RandomClassifier::new(
                p_include, seed,
            ))))
        }
        ClassifierKind::LogisticRegression => {
            let l1_ratio = param_f64(params, "l1_ratio", 0.5)?;
            let lr_params = LogisticParams {
                penalty: Penalty::parse(param_text(params, "penalty", "l2"), l1_ratio)?,
                c: param_f64(params, "C", 1.0)?,
                max_iter: param_usize(params, "max_iter", 300)?,
                learning_rate: param_f64(params, "learning_rate", 0.5)?,
            };
            Ok(TrainedClassifier::Logistic(LogisticModel::fit(
                features, labels, &lr_params,
            )?))
        }
        ClassifierKind::ComplementNaiveBayes => {
            let cnb_params = CnbParams {
                alpha: param_f64(params, "alpha", 1.0)?,
            };
            Ok(TrainedClassifier::ComplementNb(ComplementNb::fit(
                features, labels, &cnb_params,
            )?))
        }
        ClassifierKind::LinearSvc => {
            let kernel = param_text(params, "kernel", "linear");
            if kernel != "linear" {
                return Err(Error::UnsupportedKernel(kernel.into()));
            }
            let svc_params = SvcParams {
                c: param_f64(params, "C", 1.0)?,
                max_iter: param_usize(params, "max_iter", 500)?,
                learning_rate: param_f64(params, "learning_rate", 0.1)?,
            };
            Ok(TrainedClassifier::LinearSvc(LinearSvc::fit(
                features, labels, &svc_params,
            )?))
        }
        ClassifierKind::RandomForest => {
            let forest_params = ForestParams {
                n_estimators: param_usize(params, "n_estimators", 100)?,
                max_depth: param_usize(params, "max_depth", 80)?,
                max_features: param_usize(params, "max_features", 2)?,
                min_samples_leaf: param_usize(params, "min_samples_leaf", 3)?,
                min_samples_split: param_usize(params, "min_samples_split", 8)?,
            };
            Ok(TrainedClassifier::Forest(RandomForest::fit(
                features,
                labels,
                &forest_params,
                seed,
            )?))
        }
    }
}

/// Fit on the training set, then predict every test vector.
pub fn train_and_predict(
    kind: ClassifierKind,
    params: &ParamMap,
    train_features: &[FeatureVector],
    train_labels: &[Decision],
    test_features: &[FeatureVector],
    seed: u64,
) -> Result<Vec<Decision>> {
    let model = train_classifier(kind, params, train_features, train_labels, seed)?;
    Ok(test_features.iter().map(|fv| model.predict(fv)).collect())
}
