//! Train a classical baseline end to end: word2vec features, an 80:20
//! split, cross-validated grid search, and test-set metrics.
//!
//! Run with: `cargo run --release --example train_baseline`

use litscreen::baselines::{
    featurize, grid_search_cv, train_and_predict, train_word2vec, ClassifierKind, CvSettings,
    ParamGrid, Word2VecConfig,
};
use litscreen::corpus::{split_train_test, Corpus, Decision, ScreeningRecord};
use litscreen::metrics::{metrics_report, ConfusionMatrix};

/// Synthetic corpus with topic-specific vocabularies, imbalanced like a
/// real screening corpus.
fn synthetic_corpus(n: usize) -> Corpus {
    let relevant = ["agent", "policy", "reward", "repair", "testing", "refactoring"];
    let irrelevant = ["galaxy", "protein", "retail", "nutrition", "orchestra", "geology"];
    let records = (0..n)
        .map(|i| {
            let include = i % 5 == 0;
            let words = if include { &relevant } else { &irrelevant };
            let title: Vec<&str> = (0..6).map(|j| words[(i + j) % words.len()]).collect();
            let abstract_words: Vec<&str> = (0..40).map(|j| words[(i * 3 + j) % words.len()]).collect();
            ScreeningRecord::new(
                "SYN",
                format!("doc{i:03}"),
                title.join(" "),
                abstract_words.join(" "),
                if include { Decision::Include } else { Decision::Exclude },
            )
        })
        .collect();
    Corpus::new(records, "synthetic")
}

fn main() -> litscreen::Result<()> {
    let corpus = synthetic_corpus(300);
    let seed = 7;

    let embedding = train_word2vec(
        &corpus,
        &Word2VecConfig {
            dimension: 32,
            epochs: 5,
            seed,
            ..Word2VecConfig::default()
        },
    )?;
    println!(
        "embeddings: {} tokens × {} dims",
        embedding.vocab_size(),
        embedding.dimension()
    );

    let (train, test) = split_train_test(&corpus, 0.8, seed)?;
    let train_x = featurize(&train, &embedding);
    let test_x = featurize(&test, &embedding);
    let train_y = train.decisions();

    // randomized search over the smoothing grid, scored by mean F2 over
    // stratified 5-fold CV repeated twice
    let grid = ParamGrid::new().with_floats("alpha", &[0.001, 0.01, 0.1, 1.0, 10.0]);
    let settings = CvSettings { seed, ..CvSettings::default() };
    let kind = ClassifierKind::ComplementNaiveBayes;
    let cv = grid_search_cv(kind, &grid, &train_x, &train_y, &settings)?;
    println!(
        "best hyperparameters {:?} with mean CV F2 {:.3}",
        cv.best_hyperparameters, cv.mean_score
    );

    let predictions = train_and_predict(
        kind,
        &cv.best_hyperparameters,
        &train_x,
        &train_y,
        &test_x,
        seed,
    )?;
    let mut cm = ConfusionMatrix::default();
    for (record, predicted) in test.iter().zip(&predictions) {
        cm.record(record.decision, *predicted);
    }
    let report = metrics_report(&cm);
    println!(
        "test set: TP {} TN {} FP {} FN {}",
        cm.true_positives, cm.true_negatives, cm.false_positives, cm.false_negatives
    );
    for (name, value) in report.named_values() {
        println!("  {name:>18}: {}", value.map_or("—".into(), |v| format!("{v:.3}")));
    }
    Ok(())
}
