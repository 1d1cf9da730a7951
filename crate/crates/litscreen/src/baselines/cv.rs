//! Stratified repeated cross-validation and randomized grid search
//! optimizing the F2 score.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::grid::{ParamGrid, ParamMap};
use crate::baselines::{train_classifier, ClassifierKind, FeatureVector};
use crate::corpus::Decision;
use crate::error::{Error, Result};
use crate::metrics::{metrics_report, ConfusionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub folds: usize,
    /// Repetitions of the whole fold cycle with reshuffled folds.
    pub repeats: usize,
    /// Candidate configurations drawn from the grid.
    pub candidates: usize,
    pub seed: u64,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            folds: 5,
            repeats: 2,
            candidates: 10,
            seed: 0,
        }
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_hyperparameters: ParamMap,
    /// F2 per fold (all repeats) for the winning candidate.
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
}

/// Deal each class round-robin into `folds` buckets after a seeded
/// shuffle, so every fold holds at least one example of each class
/// whenever each class has at least `folds` members.
pub fn stratified_folds(labels: &[Decision], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut positives: Vec<usize> = Vec::new();
    let mut negatives: Vec<usize> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        match label {
            Decision::Include => positives.push(i),
            Decision::Exclude => negatives.push(i),
        }
    }
    if positives.len() < folds || negatives.len() < folds {
        return Err(Error::TooFewPerClass {
            folds,
            positives: positives.len(),
            negatives: negatives.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let mut buckets = vec![Vec::new(); folds];
    for (slot, index) in positives.into_iter().chain(negatives).enumerate() {
        buckets[slot % folds].push(index);
    }
    for bucket in buckets.iter_mut() {
        bucket.sort_unstable();
    }
    Ok(buckets)
}

/// F2 of one train/validate split; an undefined F2 (no true positives)
/// scores zero.
fn fold_f2(
    kind: ClassifierKind,
    params: &ParamMap,
    features: &[FeatureVector],
    labels: &[Decision],
    validate: &[usize],
    in_validation: &[bool],
    seed: u64,
) -> Result<f64> {
    let mut train_x = Vec::with_capacity(features.len() - validate.len());
    let mut train_y = Vec::with_capacity(labels.len() - validate.len());
    for (i, (fv, label)) in features.iter().zip(labels).enumerate() {
        if !in_validation[i] {
            train_x.push(fv.clone());
            train_y.push(*label);
        }
    }
    let model = train_classifier(kind, params, &train_x, &train_y, seed)?;
    let mut cm = ConfusionMatrix::default();
    for &i in validate {
        cm.record(labels[i], model.predict(&features[i]));
    }
    Ok(metrics_report(&cm).f2.unwrap_or(0.0))
}

/// Score one candidate by stratified repeated CV; returns one F2 per
/// fold per repeat.
pub fn cross_validate(
    kind: ClassifierKind,
    params: &ParamMap,
    features: &[FeatureVector],
    labels: &[Decision],
    settings: &CvSettings,
) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(settings.folds * settings.repeats);
    for repeat in 0..settings.repeats {
        let folds = stratified_folds(labels, settings.folds, settings.seed.wrapping_add(repeat as u64))?;
        for fold in &folds {
            let mut in_validation = vec![false; labels.len()];
            for &i in fold {
                in_validation[i] = true;
            }
            scores.push(fold_f2(
                kind,
                params,
                features,
                labels,
                fold,
                &in_validation,
                settings.seed,
            )?);
        }
    }
    Ok(scores)
}

/// Randomized grid search: draw candidates from the grid, score each by
/// mean F2 over stratified repeated CV, return the argmax. Ties break
/// toward the earlier candidate.
pub fn grid_search_cv(
    kind: ClassifierKind,
    grid: &ParamGrid,
    features: &[FeatureVector],
    labels: &[Decision],
    settings: &CvSettings,
) -> Result<CvResult> {
    let candidates = grid.sample(settings.candidates, settings.seed);
    if candidates.is_empty() {
        return Err(Error::BadHyperparameter {
            name: "grid".into(),
            message: "the search space is empty".into(),
        });
    }

    let mut best: Option<CvResult> = None;
    for params in candidates {
        let fold_scores = cross_validate(kind, &params, features, labels, settings)?;
        let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        if best.as_ref().is_none_or(|b| mean_score > b.mean_score) {
            best = Some(CvResult {
                best_hyperparameters: params,
                fold_scores,
                mean_score,
            });
        }
    }
    Ok(best.expect("at least one candidate was scored"))
}
