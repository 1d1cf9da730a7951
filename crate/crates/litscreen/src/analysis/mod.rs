//! Experiment orchestration and derived reports: repeated runs,
//! consistency (dispersion + agreement), effort savings, monetary cost,
//! and cross-dataset aggregation.

pub mod report;

pub use report::{render_report, Artifact, ReportFormat};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_decimal::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    self, featurize, grid_search_cv, train_word2vec, ClassifierKind, CvSettings, ParamGrid,
    ParamMap, Word2VecConfig,
};
use crate::corpus::{self, Corpus, CorpusFormat, Decision, FilterPolicy};
use crate::error::{Error, Result};
use crate::llm::{screen_batch, CacheMode, ChatTransport, LlmConfig, ReplayCache};
use crate::metrics::{
    dispersion_stats, fleiss_kappa, metrics_report, wss_at_recall, AgreementResult,
    ConfusionMatrix, DispersionStats, MetricsReport,
};
use crate::prompt::PromptTemplate;

/// What to run: the LLM under its endpoint contract, or a classical
/// baseline trained per run.
#[derive(Debug, Clone)]
pub enum ClassifierSpec {
    Llm {
        config: LlmConfig,
        template: PromptTemplate,
        /// Cache file and whether to record into it or replay from it.
        cache: Option<(PathBuf, CacheMode)>,
    },
    Baseline {
        kind: ClassifierKind,
        /// Fixed hyperparameters; when absent the grid is searched.
        params: Option<ParamMap>,
        grid: Option<ParamGrid>,
        embedding: Word2VecConfig,
        train_fraction: f64,
        cv: CvSettings,
    },
}

/// A declarative multi-run experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub corpus_path: PathBuf,
    pub classifier: ClassifierSpec,
    pub runs: usize,
    /// One seed per run for baseline experiments.
    pub seeds: Vec<u64>,
    pub minutes_per_paper: f64,
    pub price_per_1k_tokens: Decimal,
    pub output_dir: PathBuf,
    /// Subdirectory stamp; defaults to a wall-clock timestamp.
    pub stamp: Option<String>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::Plan("runs must be at least 1".into()));
        }
        if let ClassifierSpec::Baseline { .. } = self.classifier {
            if self.seeds.len() != self.runs {
                return Err(Error::Plan(format!(
                    "baseline experiments need one seed per run: {} seeds for {} runs",
                    self.seeds.len(),
                    self.runs
                )));
            }
        }
        if self.minutes_per_paper <= 0.0 {
            return Err(Error::NonPositive {
                what: "minutes_per_paper",
                value: self.minutes_per_paper,
            });
        }
        if self.price_per_1k_tokens < Decimal::ZERO {
            return Err(Error::NegativePrice);
        }
        Ok(())
    }

    /// Load a plan from a TOML config file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentPlan> {
        let raw = std::fs::read_to_string(path)?;
        let file: PlanFile = toml::from_str(&raw).map_err(|e| Error::Config(e.to_string()))?;
        file.into_plan()
    }
}

/// Serde shape of the plan config file.
#[derive(Debug, Deserialize)]
struct PlanFile {
    corpus: PathBuf,
    runs: usize,
    #[serde(default)]
    seeds: Vec<u64>,
    #[serde(default = "default_minutes")]
    minutes_per_paper: f64,
    /// Price as a decimal string, e.g. "0.002".
    #[serde(default = "default_price")]
    price_per_1k_tokens: String,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
    #[serde(default)]
    stamp: Option<String>,
    classifier: PlanClassifier,
}

fn default_minutes() -> f64 {
    1.0
}

fn default_price() -> String {
    "0.002".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PlanClassifier {
    Llm {
        topic: String,
        #[serde(default)]
        model: Option<String>,
        #[serde(default)]
        endpoint: Option<String>,
        #[serde(default)]
        temperature: Option<f64>,
        #[serde(default)]
        max_tokens: Option<u32>,
        #[serde(default)]
        cache: Option<PathBuf>,
        #[serde(default)]
        replay: bool,
    },
    Baseline {
        kind: String,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default)]
        folds: Option<usize>,
        #[serde(default)]
        repeats: Option<usize>,
        #[serde(default)]
        candidates: Option<usize>,
        #[serde(default)]
        dimension: Option<usize>,
        #[serde(default)]
        epochs: Option<usize>,
    },
}

fn default_train_fraction() -> f64 {
    0.8
}

impl PlanFile {
    fn into_plan(self) -> Result<ExperimentPlan> {
        let price = Decimal::from_str(&self.price_per_1k_tokens)
            .map_err(|e| Error::Config(format!("price_per_1k_tokens: {e}")))?;
        let classifier = match self.classifier {
            PlanClassifier::Llm {
                topic,
                model,
                endpoint,
                temperature,
                max_tokens,
                cache,
                replay,
            } => {
                let mut config = LlmConfig::default();
                if let Some(m) = model {
                    config.model_name = m;
                }
                if let Some(e) = endpoint {
                    config.endpoint = e;
                }
                if let Some(t) = temperature {
                    config.temperature = t;
                }
                if let Some(m) = max_tokens {
                    config.max_tokens = m;
                }
                let cache = cache.map(|path| {
                    let mode = if replay { CacheMode::Replay } else { CacheMode::Record };
                    (path, mode)
                });
                ClassifierSpec::Llm {
                    config,
                    template: PromptTemplate::new(topic),
                    cache,
                }
            }
            PlanClassifier::Baseline {
                kind,
                train_fraction,
                folds,
                repeats,
                candidates,
                dimension,
                epochs,
            } => {
                let kind: ClassifierKind = kind.parse()?;
                let mut cv = CvSettings::default();
                if let Some(f) = folds {
                    cv.folds = f;
                }
                if let Some(r) = repeats {
                    cv.repeats = r;
                }
                if let Some(c) = candidates {
                    cv.candidates = c;
                }
                let mut embedding = Word2VecConfig::default();
                if let Some(d) = dimension {
                    embedding.dimension = d;
                }
                if let Some(e) = epochs {
                    embedding.epochs = e;
                }
                ClassifierSpec::Baseline {
                    kind,
                    params: None,
                    grid: None,
                    embedding,
                    train_fraction,
                    cv,
                }
            }
        };
        Ok(ExperimentPlan {
            corpus_path: self.corpus,
            classifier,
            runs: self.runs,
            seeds: self.seeds,
            minutes_per_paper: self.minutes_per_paper,
            price_per_1k_tokens: price,
            output_dir: self.output_dir,
            stamp: self.stamp,
        })
    }
}

/// One persisted decision of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub key: String,
    pub truth: Decision,
    pub decision: Decision,
    #[serde(default)]
    pub parse_failure: bool,
}

/// One run: the decisions over its record set plus its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub keys: Vec<String>,
    pub ground_truth: Vec<Decision>,
    pub decisions: Vec<Decision>,
    pub parse_failures: usize,
    pub confusion: ConfusionMatrix,
    pub report: MetricsReport,
}

impl RunRecord {
    pub fn from_decisions(
        run_index: usize,
        seed: Option<u64>,
        keys: Vec<String>,
        ground_truth: Vec<Decision>,
        decisions: Vec<Decision>,
        parse_failures: usize,
    ) -> RunRecord {
        let mut confusion = ConfusionMatrix::default();
        for (truth, predicted) in ground_truth.iter().zip(&decisions) {
            confusion.record(*truth, *predicted);
        }
        let report = metrics_report(&confusion);
        RunRecord {
            run_index,
            seed,
            keys,
            ground_truth,
            decisions,
            parse_failures,
            confusion,
            report,
        }
    }
}

/// N repeated runs of one classifier on one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    pub runs: Vec<RunRecord>,
}

impl RunSeries {
    /// The defined values of one metric across runs.
    pub fn metric_series(&self, pick: impl Fn(&MetricsReport) -> Option<f64>) -> Vec<f64> {
        self.runs.iter().filter_map(|r| pick(&r.report)).collect()
    }
}

/// Execute a plan. LLM runs screen every record; baseline runs re-split
/// and re-train per seed. Each run's raw decisions are written under the
/// output directory before its metrics are computed. When a run aborts,
/// the error reports how many runs had completed; their files stay on
/// disk.
pub fn run_experiment(
    plan: &ExperimentPlan,
    transport: Option<&dyn ChatTransport>,
) -> Result<RunSeries> {
    plan.validate()?;
    let file = std::fs::File::open(&plan.corpus_path)?;
    let format = CorpusFormat::from_extension(&plan.corpus_path);
    let parsed = corpus::parse_corpus(file, format)?;
    let (filtered, _) = corpus::filter_records(&parsed, &FilterPolicy::default());
    run_experiment_on(plan, &filtered, transport)
}

/// [`run_experiment`] with the corpus already in memory (records are
/// assumed to have passed the retention filter).
pub fn run_experiment_on(
    plan: &ExperimentPlan,
    corpus: &Corpus,
    transport: Option<&dyn ChatTransport>,
) -> Result<RunSeries> {
    plan.validate()?;
    let stamp = plan.stamp.clone().unwrap_or_else(unix_stamp);
    let run_dir = plan.output_dir.join(&stamp);
    std::fs::create_dir_all(&run_dir)?;

    let mut runs: Vec<RunRecord> = Vec::with_capacity(plan.runs);
    for run_index in 0..plan.runs {
        let run = execute_run(plan, corpus, transport, run_index, &run_dir).map_err(|cause| {
            Error::SeriesAborted {
                completed: runs.len(),
                cause: Box::new(cause),
            }
        })?;
        runs.push(run);
    }
    Ok(RunSeries { runs })
}

fn unix_stamp() -> String {
    let seconds = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("run-{seconds}")
}

fn execute_run(
    plan: &ExperimentPlan,
    corpus: &Corpus,
    transport: Option<&dyn ChatTransport>,
    run_index: usize,
    run_dir: &Path,
) -> Result<RunRecord> {
    let (seed, keys, truth, decisions, parse_failures) = match &plan.classifier {
        ClassifierSpec::Llm {
            config,
            template,
            cache,
        } => {
            let prompts: Vec<_> = corpus
                .iter()
                .map(|r| template.render(r))
                .collect::<Result<_>>()?;
            let cache = match cache {
                Some((path, CacheMode::Replay)) => Some(ReplayCache::replay(path)?),
                Some((path, CacheMode::Record)) => Some(ReplayCache::record(path)?),
                None => None,
            };
            let transport = transport.ok_or_else(|| {
                Error::Plan("LLM experiments need a transport (live or scripted)".into())
            })?;
            let outcomes = screen_batch(transport, config, &prompts, cache.as_ref())?;
            let keys = corpus.keys();
            let truth = corpus.decisions();
            let decisions: Vec<Decision> = outcomes.iter().map(|o| o.decision).collect();
            let parse_failures = outcomes.iter().filter(|o| o.parse_failure.is_some()).count();
            (None, keys, truth, decisions, parse_failures)
        }
        ClassifierSpec::Baseline {
            kind,
            params,
            grid,
            embedding,
            train_fraction,
            cv,
        } => {
            let seed = plan.seeds[run_index];
            let (train, test) = corpus::split_train_test(corpus, *train_fraction, seed)?;
            let model = train_word2vec(corpus, embedding)?;
            let train_x = featurize(&train, &model);
            let test_x = featurize(&test, &model);
            let train_y = train.decisions();

            let best_params = match params {
                Some(p) => p.clone(),
                None => {
                    let grid = grid
                        .clone()
                        .unwrap_or_else(|| baselines::default_grid(*kind));
                    let settings = CvSettings { seed, ..*cv };
                    grid_search_cv(*kind, &grid, &train_x, &train_y, &settings)?
                        .best_hyperparameters
                }
            };
            let decisions =
                baselines::train_and_predict(*kind, &best_params, &train_x, &train_y, &test_x, seed)?;
            (
                Some(seed),
                test.keys(),
                test.decisions(),
                decisions,
                0usize,
            )
        }
    };

    persist_decisions(run_dir, run_index, &keys, &truth, &decisions)?;
    Ok(RunRecord::from_decisions(
        run_index,
        seed,
        keys,
        truth,
        decisions,
        parse_failures,
    ))
}

fn persist_decisions(
    run_dir: &Path,
    run_index: usize,
    keys: &[String],
    truth: &[Decision],
    decisions: &[Decision],
) -> Result<()> {
    let path = run_dir.join(format!("run-{run_index:02}.decisions.jsonl"));
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for ((key, t), d) in keys.iter().zip(truth).zip(decisions) {
        let row = DecisionRow {
            key: key.clone(),
            truth: *t,
            decision: *d,
            parse_failure: false,
        };
        serde_json::to_writer(&mut file, &row)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

/// Which records the runs disagreed on and in which error direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementCensus {
    pub records: usize,
    /// Records where at least one run deviates from the majority.
    pub disagreements: usize,
    /// Disagreements over excluded ground truth: spurious inclusions.
    pub false_positive_direction: usize,
    /// Disagreements over included ground truth: spurious exclusions.
    pub false_negative_direction: usize,
}

impl DisagreementCensus {
    pub fn fraction(&self) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.disagreements as f64 / self.records as f64
        }
    }
}

/// Consistency of a run series: dispersion of each metric, Fleiss'
/// kappa treating runs as raters, and the disagreement census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub metric_dispersion: BTreeMap<String, DispersionStats>,
    pub agreement: AgreementResult,
    pub census: DisagreementCensus,
}

/// Consistency analysis over N ≥ 2 runs covering the identical record
/// set (runs over different test splits cannot be compared this way).
pub fn consistency_report(series: &RunSeries) -> Result<ConsistencyReport> {
    if series.runs.len() < 2 {
        return Err(Error::NotEnoughRuns(series.runs.len()));
    }
    let reference = &series.runs[0];
    let mut reference_keys: Vec<&String> = reference.keys.iter().collect();
    reference_keys.sort();
    for (i, run) in series.runs.iter().enumerate().skip(1) {
        let mut keys: Vec<&String> = run.keys.iter().collect();
        keys.sort();
        if keys != reference_keys {
            return Err(Error::MismatchedRecordSets { run: i });
        }
    }

    let mut metric_dispersion = BTreeMap::new();
    for (name, _) in reference.report.named_values() {
        let values: Vec<f64> = series
            .runs
            .iter()
            .filter_map(|r| {
                r.report
                    .named_values()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .and_then(|(_, v)| *v)
            })
            .collect();
        metric_dispersion.insert(name.to_string(), dispersion_stats(&values));
    }

    // align decisions by key: items × runs
    let per_run_maps: Vec<BTreeMap<&String, (Decision, Decision)>> = series
        .runs
        .iter()
        .map(|run| {
            run.keys
                .iter()
                .zip(run.ground_truth.iter().zip(&run.decisions))
                .map(|(k, (t, d))| (k, (*t, *d)))
                .collect()
        })
        .collect();

    let n_runs = series.runs.len();
    let mut matrix: Vec<Vec<Decision>> = Vec::with_capacity(reference.keys.len());
    let mut census = DisagreementCensus {
        records: reference.keys.len(),
        disagreements: 0,
        false_positive_direction: 0,
        false_negative_direction: 0,
    };
    for key in &reference.keys {
        let truth = per_run_maps[0][key].0;
        let row: Vec<Decision> = per_run_maps.iter().map(|m| m[key].1).collect();
        let includes = row.iter().filter(|d| **d == Decision::Include).count();
        if includes != 0 && includes != n_runs {
            census.disagreements += 1;
            match truth {
                Decision::Exclude => census.false_positive_direction += 1,
                Decision::Include => census.false_negative_direction += 1,
            }
        }
        matrix.push(row);
    }
    let agreement = fleiss_kappa(&matrix)?;

    Ok(ConsistencyReport {
        metric_dispersion,
        agreement,
        census,
    })
}

/// Screening-effort savings derived from WSS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortReport {
    pub total_papers: u64,
    pub total_screening_hours: f64,
    pub minutes_per_paper: f64,
    pub wss: f64,
    pub saved_papers: u64,
    pub saved_hours: f64,
    /// Set when WSS was negative: nothing is saved, and the WSS value
    /// itself says the classifier cost effort.
    pub negative_wss: bool,
}

impl EffortReport {
    /// Build the report from a known WSS value.
    ///
    /// Saved papers are `floor(wss × total)`; a tiny epsilon absorbs the
    /// binary representation error of decimal WSS inputs before the
    /// floor. Saved time follows the saved papers.
    pub fn from_wss(total_papers: u64, wss: f64, minutes_per_paper: f64) -> Result<EffortReport> {
        if minutes_per_paper <= 0.0 {
            return Err(Error::NonPositive {
                what: "minutes_per_paper",
                value: minutes_per_paper,
            });
        }
        let total_screening_hours = total_papers as f64 * minutes_per_paper / 60.0;
        let negative_wss = wss < 0.0;
        let saved_papers = if negative_wss {
            0
        } else {
            (wss * total_papers as f64 + 1e-9).floor() as u64
        };
        let saved_hours = saved_papers as f64 * minutes_per_paper / 60.0;
        Ok(EffortReport {
            total_papers,
            total_screening_hours,
            minutes_per_paper,
            wss,
            saved_papers,
            saved_hours,
            negative_wss,
        })
    }
}

/// Effort savings of a classification outcome, at the given screening
/// speed (default one minute per paper).
pub fn effort_report(cm: &ConfusionMatrix, minutes_per_paper: f64) -> Result<EffortReport> {
    let wss = wss_at_recall(cm)?;
    EffortReport::from_wss(cm.total(), wss, minutes_per_paper)
}

/// Which papers the token bill covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostBasis {
    /// Bill only the papers the classifier did not save (the effort
    /// table arithmetic).
    PapersNotSaved,
    /// Bill every screened paper.
    FullCorpus,
}

/// Token and money cost of an LLM screening run, in exact decimal
/// arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub basis: CostBasis,
    pub mean_tokens_per_paper: Decimal,
    pub papers_costed: u64,
    /// ceil(mean_tokens × papers_costed): fractional tokens bill whole.
    pub sum_tokens: u64,
    pub usd_per_1k_tokens: Decimal,
    /// Full-precision cost; renderers round to 3 decimals.
    pub usd: Decimal,
    /// Total screening hours rounded to one decimal. This mirrors the
    /// conventional savings table, which books the whole screening time
    /// as saved; the WSS-based figures below are the conservative read.
    pub saved_hours: Decimal,
    /// saved_hours / 8.
    pub fte_days: Decimal,
    pub wss_saved_hours: f64,
    pub wss_saved_fte_days: f64,
}

/// Price an LLM screening run from its effort report and measured mean
/// tokens per paper.
pub fn cost_report(
    effort: &EffortReport,
    mean_tokens: Decimal,
    usd_per_1k_tokens: Decimal,
    basis: CostBasis,
) -> Result<CostReport> {
    if usd_per_1k_tokens < Decimal::ZERO {
        return Err(Error::NegativePrice);
    }
    let papers_costed = match basis {
        CostBasis::PapersNotSaved => effort.total_papers - effort.saved_papers,
        CostBasis::FullCorpus => effort.total_papers,
    };
    let sum_tokens = (mean_tokens * Decimal::from(papers_costed))
        .ceil()
        .to_u64()
        .ok_or_else(|| Error::Plan("token sum overflows".into()))?;
    let usd = Decimal::from(sum_tokens) / Decimal::from(1000) * usd_per_1k_tokens;

    let minutes = Decimal::from_f64(effort.minutes_per_paper)
        .ok_or_else(|| Error::Plan("minutes_per_paper is not finite".into()))?;
    let saved_hours = (Decimal::from(effort.total_papers) * minutes / Decimal::from(60))
        .round_dp_with_strategy(1, RoundingStrategy::MidpointAwayFromZero);
    let fte_days = saved_hours / Decimal::from(8);

    Ok(CostReport {
        basis,
        mean_tokens_per_paper: mean_tokens,
        papers_costed,
        sum_tokens,
        usd_per_1k_tokens,
        usd,
        saved_hours,
        fte_days,
        wss_saved_hours: effort.saved_hours,
        wss_saved_fte_days: effort.saved_hours / 8.0,
    })
}

/// Per-dataset metric rows plus column moments, for judging how well a
/// classifier generalizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizabilityTable {
    pub rows: Vec<(String, MetricsReport)>,
    /// Metric name → moments of its column (defined values only).
    pub moments: BTreeMap<String, DispersionStats>,
}

/// Aggregate per-dataset reports; needs at least two datasets.
pub fn aggregate_generalizability(
    reports: &[(String, MetricsReport)],
) -> Result<GeneralizabilityTable> {
    if reports.len() < 2 {
        return Err(Error::NotEnoughDatasets(reports.len()));
    }
    let mut moments = BTreeMap::new();
    for (name, _) in reports[0].1.named_values() {
        let column: Vec<f64> = reports
            .iter()
            .filter_map(|(_, report)| {
                report
                    .named_values()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .and_then(|(_, v)| *v)
            })
            .collect();
        moments.insert(name.to_string(), dispersion_stats(&column));
    }
    Ok(GeneralizabilityTable {
        rows: reports.to_vec(),
        moments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ScreeningRecord;
    use crate::llm::ScriptedTransport;

    fn tiny_corpus(n: usize) -> Corpus {
        let records = (0..n)
            .map(|i| {
                ScreeningRecord::new(
                    "p",
                    format!("k{i}"),
                    format!("learning systems study {i}"),
                    format!("An abstract about learning systems number {i}."),
                    if i % 3 == 0 { Decision::Include } else { Decision::Exclude },
                )
            })
            .collect();
        Corpus::new(records, "tiny")
    }

    fn llm_plan(dir: &Path) -> ExperimentPlan {
        ExperimentPlan {
            corpus_path: PathBuf::from("unused"),
            classifier: ClassifierSpec::Llm {
                config: LlmConfig::default(),
                template: PromptTemplate::new("learning systems"),
                cache: None,
            },
            runs: 1,
            seeds: vec![],
            minutes_per_paper: 1.0,
            price_per_1k_tokens: Decimal::from_str("0.002").unwrap(),
            output_dir: dir.to_path_buf(),
            stamp: Some("test".into()),
        }
    }

    #[test]
    fn zero_runs_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = llm_plan(dir.path());
        plan.runs = 0;
        assert!(matches!(plan.validate(), Err(Error::Plan(_))));
    }

    #[test]
    fn baseline_plans_need_one_seed_per_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = llm_plan(dir.path());
        plan.classifier = ClassifierSpec::Baseline {
            kind: ClassifierKind::Random,
            params: None,
            grid: None,
            embedding: Word2VecConfig::default(),
            train_fraction: 0.8,
            cv: CvSettings::default(),
        };
        plan.runs = 3;
        plan.seeds = vec![1, 2];
        assert!(matches!(plan.validate(), Err(Error::Plan(_))));
    }

    #[test]
    fn llm_run_produces_a_run_record_and_persists_decisions() {
        let dir = tempfile::tempdir().unwrap();
        let plan = llm_plan(dir.path());
        let corpus = tiny_corpus(9);
        let transport = ScriptedTransport::new().with_fallback("Include");
        let series = run_experiment_on(&plan, &corpus, Some(&transport)).unwrap();
        assert_eq!(series.runs.len(), 1);
        let run = &series.runs[0];
        assert_eq!(run.keys.len(), 9);
        assert_eq!(run.confusion.total(), 9);
        // include-everything: tp = all includes, fp = all excludes
        assert_eq!(run.confusion.true_positives, 3);
        assert_eq!(run.confusion.false_positives, 6);
        assert!(dir.path().join("test/run-00.decisions.jsonl").exists());
    }

    #[test]
    fn baseline_runs_use_distinct_splits_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = llm_plan(dir.path());
        plan.classifier = ClassifierSpec::Baseline {
            kind: ClassifierKind::Random,
            params: None,
            grid: None,
            embedding: Word2VecConfig {
                dimension: 4,
                epochs: 1,
                min_count: 1,
                ..Word2VecConfig::default()
            },
            train_fraction: 0.8,
            cv: CvSettings::default(),
        };
        plan.runs = 3;
        plan.seeds = vec![1, 2, 3];
        let corpus = tiny_corpus(30);
        let series = run_experiment_on(&plan, &corpus, None).unwrap();
        assert_eq!(series.runs.len(), 3);
        let key_sets: Vec<Vec<String>> = series.runs.iter().map(|r| r.keys.clone()).collect();
        assert_ne!(key_sets[0], key_sets[1]);
        assert_ne!(key_sets[1], key_sets[2]);
        assert!(series.runs.iter().all(|r| r.keys.len() == 6));
    }

    #[test]
    fn identical_runs_have_zero_dispersion_and_kappa_one() {
        let run = RunRecord::from_decisions(
            0,
            None,
            vec!["a".into(), "b".into(), "c".into()],
            vec![Decision::Include, Decision::Exclude, Decision::Exclude],
            vec![Decision::Include, Decision::Exclude, Decision::Include],
            0,
        );
        let mut second = run.clone();
        second.run_index = 1;
        let series = RunSeries {
            runs: vec![run, second],
        };
        let report = consistency_report(&series).unwrap();
        assert_eq!(report.agreement.kappa, 1.0);
        assert_eq!(report.census.disagreements, 0);
        for stats in report.metric_dispersion.values() {
            if let Some(sd) = stats.std_dev {
                assert_eq!(sd, 0.0);
            }
        }
    }

    #[test]
    fn disagreement_census_counts_direction_by_ground_truth() {
        let keys: Vec<String> = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let truth = vec![
            Decision::Exclude, // runs disagree -> false-positive direction
            Decision::Include, // runs disagree -> false-negative direction
            Decision::Exclude, // agree
            Decision::Include, // agree
        ];
        let run0 = RunRecord::from_decisions(
            0,
            None,
            keys.clone(),
            truth.clone(),
            vec![
                Decision::Include,
                Decision::Exclude,
                Decision::Exclude,
                Decision::Include,
            ],
            0,
        );
        let run1 = RunRecord::from_decisions(
            1,
            None,
            keys.clone(),
            truth.clone(),
            vec![
                Decision::Exclude,
                Decision::Include,
                Decision::Exclude,
                Decision::Include,
            ],
            0,
        );
        let run2 = RunRecord::from_decisions(
            2,
            None,
            keys,
            truth,
            vec![
                Decision::Exclude,
                Decision::Include,
                Decision::Exclude,
                Decision::Include,
            ],
            0,
        );
        let series = RunSeries {
            runs: vec![run0, run1, run2],
        };
        let report = consistency_report(&series).unwrap();
        assert_eq!(report.census.disagreements, 2);
        assert_eq!(report.census.false_positive_direction, 1);
        assert_eq!(report.census.false_negative_direction, 1);
        assert!((report.census.fraction() - 0.5).abs() < 1e-12);
        assert!(report.agreement.kappa < 1.0);
    }

    #[test]
    fn crafted_three_run_series_matches_pairwise_agreement_oracle() {
        // items x runs vote pattern with known include counts 3, 2, 1
        let keys: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let truth = vec![Decision::Include, Decision::Include, Decision::Exclude];
        let votes = [
            [Decision::Include, Decision::Include, Decision::Include],
            [Decision::Include, Decision::Include, Decision::Exclude],
            [Decision::Include, Decision::Exclude, Decision::Exclude],
        ];
        let runs: Vec<RunRecord> = (0..3)
            .map(|run| {
                RunRecord::from_decisions(
                    run,
                    None,
                    keys.clone(),
                    truth.clone(),
                    (0..3).map(|item| votes[item][run]).collect(),
                    0,
                )
            })
            .collect();
        let series = RunSeries { runs };
        let report = consistency_report(&series).unwrap();
        // oracle: include counts per item are 3, 2, 1 -> kappa = 0
        assert!(report.agreement.kappa.abs() < 1e-12);
        assert!((report.agreement.p_o - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_record_sets_are_rejected() {
        let run0 = RunRecord::from_decisions(
            0,
            None,
            vec!["a".into(), "b".into()],
            vec![Decision::Include, Decision::Exclude],
            vec![Decision::Include, Decision::Exclude],
            0,
        );
        let run1 = RunRecord::from_decisions(
            1,
            None,
            vec!["a".into(), "zzz".into()],
            vec![Decision::Include, Decision::Exclude],
            vec![Decision::Include, Decision::Exclude],
            0,
        );
        let series = RunSeries {
            runs: vec![run0, run1],
        };
        assert!(matches!(
            consistency_report(&series),
            Err(Error::MismatchedRecordSets { run: 1 })
        ));
    }

    #[test]
    fn effort_from_wss_matches_published_arithmetic() {
        let effort = EffortReport::from_wss(1089, 0.644, 1.0).unwrap();
        assert_eq!(effort.saved_papers, 701);
        assert!((effort.saved_hours - 701.0 / 60.0).abs() < 1e-9);
        assert!((effort.total_screening_hours - 18.15).abs() < 1e-9);

        // floor, not round: 0.880 x 292 = 256.96
        let effort = EffortReport::from_wss(292, 0.880, 1.0).unwrap();
        assert_eq!(effort.saved_papers, 256);
        assert!((effort.saved_hours - 256.0 / 60.0).abs() < 1e-9);
    }

    #[test]
    fn negative_wss_saves_nothing_and_is_flagged() {
        let effort = EffortReport::from_wss(875, -0.019, 1.0).unwrap();
        assert!(effort.negative_wss);
        assert_eq!(effort.saved_papers, 0);
        assert_eq!(effort.saved_hours, 0.0);
    }

    #[test]
    fn zero_wss_saves_zero() {
        let effort = EffortReport::from_wss(100, 0.0, 1.0).unwrap();
        assert_eq!(effort.saved_papers, 0);
        assert_eq!(effort.saved_hours, 0.0);
        assert!(!effort.negative_wss);
    }

    #[test]
    fn effort_report_goes_through_wss_at_recall() {
        let cm = ConfusionMatrix::from_counts(3, 10, 1, 2);
        let effort = effort_report(&cm, 1.0).unwrap();
        assert!((effort.wss - 0.35).abs() < 1e-12);
        assert_eq!(effort.saved_papers, 5); // floor(0.35 x 16)
        assert!((effort.total_screening_hours - 16.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn cost_arithmetic_is_exact_decimal() {
        let effort = EffortReport::from_wss(1089, 0.644, 1.0).unwrap();
        let cost = cost_report(
            &effort,
            Decimal::from_str("343.728").unwrap(),
            Decimal::from_str("0.002").unwrap(),
            CostBasis::PapersNotSaved,
        )
        .unwrap();
        assert_eq!(cost.papers_costed, 388);
        assert_eq!(cost.sum_tokens, 133_367);
        assert_eq!(cost.usd, Decimal::from_str("0.266734").unwrap());
        assert_eq!(cost.saved_hours, Decimal::from_str("18.2").unwrap());
        assert_eq!(cost.fte_days, Decimal::from_str("2.275").unwrap());
    }

    #[test]
    fn full_corpus_mode_costs_every_paper() {
        let effort = EffortReport::from_wss(1089, 0.644, 1.0).unwrap();
        let mean = Decimal::from_str("343.728").unwrap();
        let price = Decimal::from_str("0.002").unwrap();
        let cost = cost_report(&effort, mean, price, CostBasis::FullCorpus).unwrap();
        assert_eq!(cost.papers_costed, 1089);
        let expected = Decimal::from(cost.sum_tokens) / Decimal::from(1000) * price;
        assert_eq!(cost.usd, expected);
    }

    #[test]
    fn zero_papers_costed_is_zero_dollars() {
        let effort = EffortReport::from_wss(100, 1.0, 1.0).unwrap();
        assert_eq!(effort.saved_papers, 100);
        let cost = cost_report(
            &effort,
            Decimal::from_str("300.0").unwrap(),
            Decimal::from_str("0.002").unwrap(),
            CostBasis::PapersNotSaved,
        )
        .unwrap();
        assert_eq!(cost.papers_costed, 0);
        assert_eq!(cost.sum_tokens, 0);
        assert_eq!(cost.usd, Decimal::ZERO);
    }

    #[test]
    fn generalizability_moments_match_direct_formulas() {
        let mk = |bacc: f64| MetricsReport {
            balanced_accuracy: Some(bacc),
            ..MetricsReport::default()
        };
        let rows = vec![("d1".to_string(), mk(0.6)), ("d2".to_string(), mk(0.8))];
        let table = aggregate_generalizability(&rows).unwrap();
        let moments = &table.moments["balanced_accuracy"];
        assert!((moments.mean.unwrap() - 0.7).abs() < 1e-12);
        assert!((moments.std_dev.unwrap() - (0.02f64).sqrt()).abs() < 1e-9);

        assert!(matches!(
            aggregate_generalizability(&rows[..1]),
            Err(Error::NotEnoughDatasets(1))
        ));
    }

    #[test]
    fn identical_dataset_rows_have_zero_std() {
        let report = metrics_report(&ConfusionMatrix::from_counts(5, 5, 1, 1));
        let rows = vec![
            ("a".to_string(), report),
            ("b".to_string(), report),
            ("c".to_string(), report),
        ];
        let table = aggregate_generalizability(&rows).unwrap();
        for stats in table.moments.values() {
            assert_eq!(stats.std_dev, Some(0.0));
        }
    }

    #[test]
    fn plan_files_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.toml");
        std::fs::write(
            &path,
            r#"
corpus = "corpus.jsonl"
runs = 10
seeds = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
minutes_per_paper = 1.0
price_per_1k_tokens = "0.002"
output_dir = "results"

[classifier]
type = "baseline"
kind = "cnb"
train_fraction = 0.8
folds = 5
repeats = 2
"#,
        )
        .unwrap();
        let plan = ExperimentPlan::from_file(&path).unwrap();
        assert_eq!(plan.runs, 10);
        assert_eq!(plan.seeds.len(), 10);
        assert_eq!(plan.price_per_1k_tokens, Decimal::from_str("0.002").unwrap());
        match plan.classifier {
            ClassifierSpec::Baseline { kind, train_fraction, cv, .. } => {
                assert_eq!(kind, ClassifierKind::ComplementNaiveBayes);
                assert_eq!(train_fraction, 0.8);
                assert_eq!(cv.folds, 5);
            }
            other => panic!("expected baseline spec, got {other:?}"),
        }
    }
}
