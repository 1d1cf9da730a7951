//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use litscreen::analysis::{
    consistency_report, cost_report, render_report, Artifact, CostBasis, EffortReport,
    ReportFormat, RunRecord, RunSeries,
};
use litscreen::baselines::{
    grid_search_cv, train_and_predict, ClassifierKind, CvSettings, FeatureVector, ParamGrid,
    ParamMap, ParamValue,
};
use litscreen::corpus::{Corpus, Decision, ScreeningRecord};
use litscreen::llm::{screen_batch, LlmConfig, ReplayCache, ScriptedTransport};
use litscreen::metrics::{
    fleiss_kappa, metrics_report, AgreementBand, ConfusionMatrix, MetricsReport,
};
use litscreen::prompt::PromptTemplate;

/// (dataset, model, recall, specificity, balanced accuracy) triples from
/// published screening benchmark runs.
const REFERENCE_ROWS: &[(&str, &str, f64, f64, f64)] = &[
    ("RL4SE", "Random", 0.515, 0.497, 0.506),
    ("RL4SE", "LR", 0.643, 0.804, 0.723),
    ("RL4SE", "CNB", 0.715, 0.740, 0.727),
    ("RL4SE", "SVC", 0.736, 0.717, 0.726),
    ("RL4SE", "RF", 0.689, 0.748, 0.719),
    ("RL4SE", "GPT-3.5", 0.821, 0.688, 0.755),
    ("DSMLCompo", "Random", 0.508, 0.499, 0.504),
    ("DSMLCompo", "LR", 0.807, 0.614, 0.711),
    ("DSMLCompo", "CNB", 0.811, 0.619, 0.715),
    ("DSMLCompo", "SVC", 0.770, 0.639, 0.704),
    ("DSMLCompo", "RF", 0.747, 0.670, 0.708),
    ("DSMLCompo", "GPT-3.5", 0.869, 0.666, 0.767),
    ("UpdateCollabMDE", "Random", 0.482, 0.498, 0.490),
    ("UpdateCollabMDE", "LR", 0.775, 0.602, 0.689),
    ("UpdateCollabMDE", "CNB", 0.704, 0.705, 0.704),
    ("UpdateCollabMDE", "SVC", 0.602, 0.631, 0.616),
    ("UpdateCollabMDE", "RF", 0.709, 0.661, 0.685),
    ("UpdateCollabMDE", "GPT-3.5", 0.947, 0.455, 0.701),
    ("MobileMDE", "Random", 0.505, 0.495, 0.500),
    ("MobileMDE", "LR", 0.660, 0.695, 0.677),
    ("MobileMDE", "CNB", 0.682, 0.733, 0.708),
    ("MobileMDE", "SVC", 0.593, 0.673, 0.633),
    ("MobileMDE", "RF", 0.580, 0.737, 0.658),
    ("MobileMDE", "GPT-3.5", 0.327, 0.928, 0.628),
    ("MPM4CPS", "Random", 0.504, 0.501, 0.502),
    ("MPM4CPS", "LR", 0.746, 0.518, 0.632),
    ("MPM4CPS", "CNB", 0.582, 0.619, 0.601),
    ("MPM4CPS", "SVC", 0.638, 0.553, 0.596),
    ("MPM4CPS", "RF", 0.713, 0.605, 0.659),
    ("MPM4CPS", "GPT-3.5", 0.738, 0.592, 0.665),
];

#[test]
fn criterion_1_balanced_accuracy_identity_on_reference_rows() {
    let started = Instant::now();
    for &(dataset, model, rec, spec, printed_bacc) in REFERENCE_ROWS {
        let cm_free_bacc = (rec + spec) / 2.0;
        assert!(
            (cm_free_bacc - printed_bacc).abs() <= 0.001 + 1e-12,
            "{dataset}/{model}: ({rec} + {spec})/2 = {cm_free_bacc} vs printed {printed_bacc}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "PASS criterion 1: bAcc identity holds within ±0.001 on {} reference rows ({elapsed:?})",
        REFERENCE_ROWS.len()
    );
}

/// Exact rational p/q with conversion through one correctly rounded
/// division. Independent of the metrics implementation.
#[derive(Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn new(num: i128, den: i128) -> Option<Frac> {
        (den != 0).then_some(Frac { num, den })
    }

    fn to_f64(self) -> f64 {
        // both sides are exact in f64 for the cell ranges used here
        self.num as f64 / self.den as f64
    }
}

/// Straight-line transcription of the metric definitions over exact
/// rational atoms, composing derived metrics the way the formulas read.
fn oracle_report(tp: u64, tn: u64, fp: u64, fn_: u64) -> MetricsReport {
    let (tp_i, tn_i, fp_i, fn_i) = (tp as i128, tn as i128, fp as i128, fn_ as i128);
    let precision = Frac::new(tp_i, tp_i + fp_i).map(Frac::to_f64);
    let recall = Frac::new(tp_i, tp_i + fn_i).map(Frac::to_f64);
    let specificity = Frac::new(tn_i, tn_i + fp_i).map(Frac::to_f64);
    let npv = Frac::new(tn_i, tn_i + fn_i).map(Frac::to_f64);
    let balanced_accuracy = match (recall, specificity) {
        (Some(r), Some(s)) => Some((r + s) / 2.0),
        _ => None,
    };
    let f2 = match (precision, recall) {
        (Some(p), Some(r)) if 4.0 * p + r > 0.0 => Some(5.0 * p * r / (4.0 * p + r)),
        _ => None,
    };
    let product = (tp_i + fp_i) * (tp_i + fn_i) * (tn_i + fp_i) * (tn_i + fn_i);
    let mcc_normalized = (product != 0).then(|| {
        let numerator = (tp_i * tn_i - fp_i * fn_i) as f64;
        numerator / (2.0 * (product as f64).sqrt()) + 0.5
    });
    MetricsReport {
        precision,
        recall,
        specificity,
        npv,
        balanced_accuracy,
        f2,
        mcc_normalized,
    }
}

fn random_matrices(n: usize, seed: u64) -> Vec<ConfusionMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            ConfusionMatrix::from_counts(
                rng.gen_range(0..=50),
                rng.gen_range(0..=50),
                rng.gen_range(0..=50),
                rng.gen_range(0..=50),
            )
        })
        .collect()
}

#[test]
fn criterion_2_metrics_agree_exactly_with_the_rational_oracle() {
    let started = Instant::now();
    for cm in random_matrices(1000, 20240601) {
        let got = metrics_report(&cm);
        let want = oracle_report(
            cm.true_positives,
            cm.true_negatives,
            cm.false_positives,
            cm.false_negatives,
        );
        assert_eq!(got, want, "cm = {cm:?}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("PASS criterion 2: exact oracle agreement on 1000 random matrices ({elapsed:?})");
}

#[test]
fn criterion_3_wss_effort_rows_reproduce() {
    // (papers, wss, saved papers, saved hours)
    let rows = [
        (1089u64, 0.644, 701u64, 11.7),
        (292, 0.880, 256, 4.3),
        (2683, 0.646, 1733, 28.9),
    ];
    for (papers, wss, saved, hours) in rows {
        let effort = EffortReport::from_wss(papers, wss, 1.0).unwrap();
        assert_eq!(effort.saved_papers, saved, "papers {papers} wss {wss}");
        assert!(
            (effort.saved_hours - hours).abs() <= 0.05,
            "papers {papers}: {} vs {hours}",
            effort.saved_hours
        );
    }
    println!("PASS criterion 3: WSS effort rows reproduce (floor rule, ±0 papers, ±0.05 h)");
}

#[test]
fn criterion_4_cost_rows_reproduce_in_exact_decimal() {
    let price = Decimal::from_str("0.002").unwrap();

    let effort = EffortReport::from_wss(1089, 0.644, 1.0).unwrap();
    let cost = cost_report(
        &effort,
        Decimal::from_str("343.728").unwrap(),
        price,
        CostBasis::PapersNotSaved,
    )
    .unwrap();
    assert_eq!(cost.papers_costed, 388);
    assert_eq!(cost.sum_tokens, 133_367);
    assert_eq!(
        cost.usd
            .round_dp_with_strategy(3, rust_decimal::RoundingStrategy::MidpointAwayFromZero),
        Decimal::from_str("0.267").unwrap()
    );
    assert_eq!(cost.fte_days, Decimal::from_str("2.275").unwrap());

    // second corpus: 1232 papers costed at mean 314.371 tokens
    let saved = 1451.0 / 2683.0;
    let effort = EffortReport::from_wss(2683, saved, 1.0).unwrap();
    assert_eq!(effort.saved_papers, 1451);
    let cost = cost_report(
        &effort,
        Decimal::from_str("314.371").unwrap(),
        price,
        CostBasis::PapersNotSaved,
    )
    .unwrap();
    assert_eq!(cost.papers_costed, 1232);
    assert_eq!(
        cost.usd
            .round_dp_with_strategy(3, rust_decimal::RoundingStrategy::MidpointAwayFromZero),
        Decimal::from_str("0.775").unwrap()
    );
    println!("PASS criterion 4: cost rows reproduce at printed precision in exact decimal");
}

#[test]
fn criterion_5_fleiss_kappa_reference_points() {
    use Decision::{Exclude, Include};

    let perfect = vec![
        vec![Include, Include, Include],
        vec![Exclude, Exclude, Exclude],
        vec![Include, Include, Include],
        vec![Exclude, Exclude, Exclude],
    ];
    let result = fleiss_kappa(&perfect).unwrap();
    assert_eq!(result.kappa, 1.0);

    // 3 raters × 3 items with include votes 3, 2, 1
    let split = vec![
        vec![Include, Include, Include],
        vec![Include, Include, Exclude],
        vec![Include, Exclude, Exclude],
    ];
    let result = fleiss_kappa(&split).unwrap();
    assert!(result.kappa.abs() <= 1e-12, "kappa = {}", result.kappa);

    assert_eq!(AgreementBand::from_kappa(0.85), AgreementBand::AlmostPerfect);
    assert_eq!(AgreementBand::from_kappa(0.85).to_string(), "almost perfect");
    println!("PASS criterion 5: kappa 1.0 exact, vote pattern 0.0 ± 1e-12, 0.85 → almost perfect");
}

const EXPECTED_RENDERING: &str = "\
I am screening papers for a systematic literature review.
The topic of the systematic review is reinforcement learning for software engineering.
The study should focus exclusively on this topic.

Decide if the article should be included or excluded from the systematic review.
I give the title and abstract of the article as input.
Only answer Include or Exclude.
Be lenient. I prefer including papers by mistake rather than excluding them by mistake.

Title: PARMOREL: a framework for customizable model repair
Abstract: In model-driven software engineering, models are used in all phases of the development process. These models must hold a high quality since the implementation of the systems they represent relies on them. Several existing tools reduce the burden of manually dealing with issues that affect models' quality, such as syntax errors, model smells, and inadequate structures. However, these tools are often inflexible for customization and hard to extend. This paper presents a customizable and extensible model repair framework, PARMOREL, that enables users to deal with different issues in different types of models. The framework uses reinforcement learning to automatically find the best sequence of actions for repairing a broken model according to user preferences. As proof of concept, we repair syntactic errors in class diagrams taking into account a model distance metric and quality characteristics. In addition, we restore inter-model consistency between UML class and sequence diagrams while improving the coupling qualities of the sequence diagrams. Furthermore, we evaluate the approach on a large publicly available dataset and a set of real-world inspired models to show that PARMOREL can decide and pick the best solution to solve the issues present in the models to satisfy user preferences.";

#[test]
fn criterion_6_prompt_renders_the_reference_instantiation_byte_exactly() {
    let record = ScreeningRecord::new(
        "RL4SE",
        "parmorel",
        "PARMOREL: a framework for customizable model repair",
        "In model-driven software engineering, models are used in all phases of the \
         development process. These models must hold a high quality since the implementation \
         of the systems they represent relies on them. Several existing tools reduce the \
         burden of manually dealing with issues that affect models' quality, such as syntax \
         errors, model smells, and inadequate structures. However, these tools are often \
         inflexible for customization and hard to extend. This paper presents a customizable \
         and extensible model repair framework, PARMOREL, that enables users to deal with \
         different issues in different types of models. The framework uses reinforcement \
         learning to automatically find the best sequence of actions for repairing a broken \
         model according to user preferences. As proof of concept, we repair syntactic errors \
         in class diagrams taking into account a model distance metric and quality \
         characteristics. In addition, we restore inter-model consistency between UML class \
         and sequence diagrams while improving the coupling qualities of the sequence \
         diagrams. Furthermore, we evaluate the approach on a large publicly available \
         dataset and a set of real-world inspired models to show that PARMOREL can decide \
         and pick the best solution to solve the issues present in the models to satisfy \
         user preferences.",
        Decision::Include,
    );
    let template = PromptTemplate::new("reinforcement learning for software engineering");
    let prompt = template.render(&record).unwrap();

    let got: Vec<&str> = prompt.text.lines().map(str::trim_end).collect();
    let want: Vec<&str> = EXPECTED_RENDERING.lines().map(str::trim_end).collect();
    assert_eq!(got, want, "rendered prompt differs from the reference text");

    // the mean estimate over a corpus of typical-length abstracts sits
    // in the published 250–450 token band
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let total: usize = (0..40)
        .map(|i| {
            let abstract_len = rng.gen_range(700..1200);
            let record = ScreeningRecord::new(
                "BAND",
                format!("b{i}"),
                "A typical article title of moderate length",
                "a ".repeat(abstract_len / 2),
                Decision::Exclude,
            );
            template.render(&record).unwrap().estimated_tokens
        })
        .sum();
    let mean_tokens = total / 40;
    assert!(
        (250..=450).contains(&mean_tokens),
        "mean estimate {mean_tokens} tokens"
    );
    println!("PASS criterion 6: reference prompt reproduced byte-exactly (modulo trailing whitespace)");
}

#[test]
fn criterion_7_recorded_fixture_replays_to_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("fixture.jsonl");

    let records: Vec<ScreeningRecord> = (0..50)
        .map(|i| {
            ScreeningRecord::new(
                "REPLAY",
                format!("rec{i:02}"),
                format!("Study number {i} on automated screening"),
                format!("Abstract text for study {i}, describing methods and results."),
                if i % 5 == 0 { Decision::Include } else { Decision::Exclude },
            )
        })
        .collect();
    let corpus = Corpus::new(records, "fixture");
    let template = PromptTemplate::new("automated screening for reviews");
    let prompts: Vec<_> = corpus
        .iter()
        .map(|r| template.render(r).unwrap())
        .collect();

    // record once with a scripted endpoint that is mostly right
    let config = LlmConfig {
        retry_backoff: Duration::from_millis(1),
        ..LlmConfig::default()
    };
    let mut script = ScriptedTransport::new();
    for (prompt, record) in prompts.iter().zip(corpus.iter()) {
        let answer = match (record.decision, record.key.as_str()) {
            (_, "rec07") => "Include",  // wrong on purpose
            (_, "rec13") => "mumbling", // never parses -> fallback
            (Decision::Include, _) => "Include",
            (Decision::Exclude, _) => "Exclude",
        };
        script = script.respond(prompt.text.clone(), answer);
    }
    let recorder = ReplayCache::record(&cache_path).unwrap();
    screen_batch(&script, &config, &prompts, Some(&recorder)).unwrap();
    drop(recorder);

    // replay the whole pipeline twice: screen -> evaluate -> report
    let pipeline = || {
        let cache = ReplayCache::replay(&cache_path).unwrap();
        let outcomes = screen_batch(&script, &config, &prompts, Some(&cache)).unwrap();
        let mut cm = ConfusionMatrix::default();
        for (record, outcome) in corpus.iter().zip(&outcomes) {
            cm.record(record.decision, outcome.decision);
        }
        let report = metrics_report(&cm);
        let mut bytes = Vec::new();
        bytes.extend(render_report(&Artifact::Metrics(&report), ReportFormat::Markdown).unwrap());
        bytes.extend(render_report(&Artifact::Metrics(&report), ReportFormat::Csv).unwrap());
        bytes.extend(render_report(&Artifact::Metrics(&report), ReportFormat::Json).unwrap());
        bytes.extend(serde_json::to_vec(&outcomes).unwrap());
        (cm, bytes)
    };
    let (cm_a, bytes_a) = pipeline();
    let (cm_b, bytes_b) = pipeline();
    assert_eq!(cm_a, cm_b);
    assert_eq!(bytes_a, bytes_b, "replayed reports must be byte-identical");

    // the fallback decision is visible in the confusion matrix: rec13
    // (truth exclude) became a flagged include, as did rec07
    assert_eq!(cm_a.false_positives, 2);
    println!("PASS criterion 7: 50-prompt fixture replays to byte-identical reports");
}

/// Linearly separable 10-dimensional documents shaped like term-count
/// vectors: each class puts its mass on its own five dimensions.
fn separable_corpus(n: usize, seed: u64) -> (Vec<FeatureVector>, Vec<Decision>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let include = i % 5 == 0; // imbalanced like a screening corpus
        let values: Vec<f64> = (0..10)
            .map(|dim| {
                let active = (dim < 5) == include;
                if active {
                    rng.gen_range(0.5..1.5)
                } else {
                    rng.gen_range(0.0..0.1)
                }
            })
            .collect();
        features.push(FeatureVector {
            values,
            all_oov: false,
        });
        labels.push(if include { Decision::Include } else { Decision::Exclude });
    }
    (features, labels)
}

#[test]
fn criterion_8_baseline_sanity_at_desk_scale() {
    let started = Instant::now();
    let (x, y) = separable_corpus(500, 77);
    let train_n = 400;
    let (train_x, test_x) = x.split_at(train_n);
    let (train_y, test_y) = y.split_at(train_n);

    for kind in [ClassifierKind::LogisticRegression, ClassifierKind::ComplementNaiveBayes] {
        let predictions =
            train_and_predict(kind, &ParamMap::new(), train_x, train_y, test_x, 1).unwrap();
        let mut cm = ConfusionMatrix::default();
        for (truth, predicted) in test_y.iter().zip(&predictions) {
            cm.record(*truth, *predicted);
        }
        let mcc = metrics_report(&cm).mcc_normalized.unwrap();
        assert!(mcc >= 0.9, "{kind}: MCCnorm {mcc}");
    }

    // random classifier stays at chance level over 100 trials
    let mut mcc_sum = 0.0;
    for trial in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let labels: Vec<Decision> = (0..1000)
            .map(|_| if rng.gen::<bool>() { Decision::Include } else { Decision::Exclude })
            .collect();
        let features: Vec<FeatureVector> = (0..1000)
            .map(|i| FeatureVector {
                values: vec![i as f64],
                all_oov: false,
            })
            .collect();
        let predictions = train_and_predict(
            ClassifierKind::Random,
            &ParamMap::new(),
            &features,
            &labels,
            &features,
            trial,
        )
        .unwrap();
        let mut cm = ConfusionMatrix::default();
        for (truth, predicted) in labels.iter().zip(&predictions) {
            cm.record(*truth, *predicted);
        }
        mcc_sum += metrics_report(&cm).mcc_normalized.unwrap();
    }
    let mcc_mean = mcc_sum / 100.0;
    assert!(
        (mcc_mean - 0.5).abs() <= 0.05,
        "random classifier MCCnorm over 100 trials: {mcc_mean}"
    );

    // a singleton grid comes straight back
    let grid = ParamGrid::new().with_floats("alpha", &[0.37]);
    let train_y_vec: Vec<Decision> = train_y.to_vec();
    let result = grid_search_cv(
        ClassifierKind::ComplementNaiveBayes,
        &grid,
        train_x,
        &train_y_vec,
        &CvSettings::default(),
    )
    .unwrap();
    assert_eq!(result.best_hyperparameters["alpha"], ParamValue::Float(0.37));

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "PASS criterion 8: LR/CNB ≥ 0.9 MCCnorm, random at 0.5 ± 0.05 (got {mcc_mean:.4}), singleton grid returned ({elapsed:?})"
    );
}

#[test]
fn criterion_9_label_swap_and_fbeta_properties() {
    // independently coded general F-beta
    fn fbeta(precision: f64, recall: f64, beta: f64) -> f64 {
        let b2 = beta * beta;
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    }

    for cm in random_matrices(1000, 994) {
        let report = metrics_report(&cm);
        let swapped = ConfusionMatrix::from_counts(
            cm.true_negatives,
            cm.true_positives,
            cm.false_negatives,
            cm.false_positives,
        );
        let swapped_report = metrics_report(&swapped);
        assert_eq!(report.mcc_normalized, swapped_report.mcc_normalized, "cm = {cm:?}");
        assert_eq!(report.precision, swapped_report.npv, "cm = {cm:?}");
        assert_eq!(report.npv, swapped_report.precision, "cm = {cm:?}");
        assert_eq!(report.recall, swapped_report.specificity, "cm = {cm:?}");
        assert_eq!(report.specificity, swapped_report.recall, "cm = {cm:?}");

        if let (Some(p), Some(r), Some(f2)) = (report.precision, report.recall, report.f2) {
            assert_eq!(f2, fbeta(p, r, 2.0), "cm = {cm:?}");
        }
    }
    println!("PASS criterion 9: label-swap symmetry and F-beta cross-check on 1000 matrices");
}

#[test]
fn consistency_of_identical_replayed_runs_is_perfect() {
    // two replays of the same fixture are two identical raters
    let keys: Vec<String> = (0..6).map(|i| format!("k{i}")).collect();
    let truth: Vec<Decision> = (0..6)
        .map(|i| if i < 2 { Decision::Include } else { Decision::Exclude })
        .collect();
    let decisions: Vec<Decision> = truth.clone();
    let series = RunSeries {
        runs: (0..2)
            .map(|i| {
                RunRecord::from_decisions(
                    i,
                    None,
                    keys.clone(),
                    truth.clone(),
                    decisions.clone(),
                    0,
                )
            })
            .collect(),
    };
    let report = consistency_report(&series).unwrap();
    assert_eq!(report.agreement.kappa, 1.0);
    assert_eq!(report.census.disagreements, 0);
}
