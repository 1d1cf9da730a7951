//! The `litscreen` command-line surface.
//!
//! Subcommands cover the whole workflow: `ingest`, `profile`, `sample`,
//! `split`, `screen`, `train`, `evaluate`, `consistency`, `effort`,
//! `cost`, `compare`, `report`, and `experiment`. Exit codes: 0 on
//! success, 1 on usage errors, 2 on data errors, 3 on endpoint errors.
//!
//! Commands never mutate their input files; everything lands under the
//! `--output` directory. Every command takes `--seed` and is
//! deterministic under it, except live `screen` without `--replay`.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rust_decimal::Decimal;
use serde::Deserialize;

use crate::analysis::{
    self, aggregate_generalizability, consistency_report, cost_report, render_report, Artifact,
    CostBasis, DecisionRow, EffortReport, ExperimentPlan, ReportFormat, RunRecord, RunSeries,
};
use crate::baselines::{
    self, featurize, grid_search_cv, train_word2vec, ClassifierKind, CvSettings, Word2VecConfig,
};
use crate::corpus::{
    self, filter_records, parse_corpus, profile, write_jsonl, Corpus, CorpusFormat, Decision,
    FilterPolicy,
};
use crate::error::{Error, Result};
use crate::llm::{
    screen_batch, CacheMode, ChatRequest, ChatResponse, ChatTransport, HttpTransport, LlmConfig,
    ReplayCache, TransportError,
};
use crate::metrics::{fmt_metric, metrics_report, ConfusionMatrix, METRIC_COLUMNS};
use crate::prompt::PromptTemplate;

#[derive(Parser, Debug)]
#[command(
    name = "litscreen",
    version,
    about = "Automate and evaluate title/abstract screening for systematic reviews"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file supplying defaults for endpoint and pricing flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Directory for all outputs.
    #[arg(short, long, global = true, default_value = "out")]
    output: PathBuf,

    /// Output format for printed results: text, json, markdown, or csv.
    #[arg(long, global = true, default_value = "text")]
    format: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, filter, and profile a corpus; writes the filtered corpus.
    Ingest {
        input: PathBuf,
    },
    /// Print the size/balance profile of a corpus.
    Profile {
        input: PathBuf,
    },
    /// Draw a stratified sample with a fixed inclusion ratio.
    Sample {
        input: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        ratio: f64,
    },
    /// Random train/test split.
    Split {
        input: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
    },
    /// Screen a corpus with the LLM prompt.
    Screen(Box<ScreenArgs>),
    /// Grid-search, fit, and test a baseline classifier.
    Train(TrainArgs),
    /// Score decisions against ground truth.
    Evaluate {
        /// Decisions file (JSONL of {key, truth, decision}).
        decisions: PathBuf,
        /// Corpus supplying ground truth; overrides the embedded truth.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Dispersion, agreement, and disagreement census over repeated runs.
    Consistency {
        /// Two or more per-run decisions files over the same records.
        runs: Vec<PathBuf>,
    },
    /// Work-saved-over-sampling effort estimate.
    Effort(EffortArgs),
    /// Token and money cost of a screening run.
    Cost(CostArgs),
    /// Aggregate per-dataset metric reports.
    Compare {
        /// Metric reports as name=path pairs (or bare paths; the file
        /// stem names the dataset).
        reports: Vec<String>,
    },
    /// Re-render a stored artifact to markdown, csv, or json.
    Report {
        input: PathBuf,
        /// Artifact kind: profile, metrics, series, consistency,
        /// effort, cost, or generalizability.
        #[arg(long)]
        kind: String,
        /// Target format.
        #[arg(long, default_value = "markdown")]
        to: String,
    },
    /// Run a declarative experiment plan (TOML).
    Experiment {
        plan: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ScreenArgs {
    input: PathBuf,
    /// Review topic inserted into the prompt.
    #[arg(long)]
    topic: String,
    /// Article fields handed to the model.
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("title"), String::from("abstract")])]
    inputs: Vec<String>,
    #[arg(long, default_value = "Include")]
    include_word: String,
    #[arg(long, default_value = "Exclude")]
    exclude_word: String,
    /// Prompt body override file.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Replay recorded responses from this cache; no network calls.
    #[arg(long, conflicts_with = "record")]
    replay: Option<PathBuf>,
    /// Record live responses into this cache.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Decision applied when a response never parses.
    #[arg(long, default_value = "include")]
    fallback: String,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training corpus.
    #[arg(long)]
    train: PathBuf,
    /// Held-out test corpus.
    #[arg(long)]
    test: PathBuf,
    /// Classifier kind: random, lr, cnb, svc, or rf.
    #[arg(long)]
    kind: String,
    /// Hyperparameter grids file (TOML/JSON); defaults baked in.
    #[arg(long)]
    grids: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 2)]
    repeats: usize,
    #[arg(long, default_value_t = 10)]
    candidates: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 100)]
    dimension: usize,
    /// Embedding training epochs.
    #[arg(long, default_value_t = 15)]
    epochs: usize,
}

#[derive(Args, Debug)]
struct EffortArgs {
    /// Decisions file to derive the confusion matrix from.
    #[arg(long, required_unless_present = "wss")]
    decisions: Option<PathBuf>,
    /// Known WSS value (skips the decisions file).
    #[arg(long, requires = "papers")]
    wss: Option<f64>,
    /// Total screened papers (with --wss).
    #[arg(long)]
    papers: Option<u64>,
    /// Screening minutes per paper (default 1).
    #[arg(long)]
    minutes: Option<f64>,
}

#[derive(Args, Debug)]
struct CostArgs {
    /// Effort report JSON produced by `effort`.
    #[arg(long, required_unless_present = "wss")]
    effort: Option<PathBuf>,
    #[arg(long, requires = "papers")]
    wss: Option<f64>,
    #[arg(long)]
    papers: Option<u64>,
    /// Screening minutes per paper (default 1).
    #[arg(long)]
    minutes: Option<f64>,
    /// Measured mean tokens per paper, as a decimal string.
    #[arg(long)]
    mean_tokens: String,
    /// Price per 1000 tokens in USD, as a decimal string.
    #[arg(long)]
    price: Option<String>,
    /// Billing basis: wss (papers not saved) or full (whole corpus).
    #[arg(long, default_value = "wss")]
    basis: String,
}

/// Defaults loadable from `--config`.
#[derive(Debug, Default, Deserialize)]
struct CliConfig {
    model: Option<String>,
    endpoint: Option<String>,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
    parallelism: Option<usize>,
    api_key_env: Option<String>,
    price_per_1k_tokens: Option<String>,
    minutes_per_paper: Option<f64>,
}

impl CliConfig {
    fn load(path: Option<&Path>) -> Result<CliConfig> {
        match path {
            None => Ok(CliConfig::default()),
            Some(path) => {
                let raw = std::fs::read_to_string(path)?;
                toml::from_str(&raw).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }
}

/// Parse and execute an argument vector; returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own codes put usage errors at 2; this tool reserves
            // 2 for data errors
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 1 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    let format = CorpusFormat::from_extension(path);
    let mut corpus = parse_corpus(file, format)?;
    corpus.provenance = path.display().to_string();
    Ok(corpus)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn print_format(format: &str) -> Result<Option<ReportFormat>> {
    match format {
        "text" => Ok(None),
        other => ReportFormat::from_str(other).map(Some),
    }
}

/// A transport for replay-only screening; any live call is a bug.
struct NullTransport;

impl ChatTransport for NullTransport {
    fn complete(&self, _: &ChatRequest) -> std::result::Result<ChatResponse, TransportError> {
        Err(TransportError::Request(
            "no live transport configured (running with --replay)".into(),
        ))
    }
}

/// Global flags shared by the command handlers.
struct Ctx {
    seed: u64,
    output: PathBuf,
    format: String,
}

fn execute(full_cli: Cli) -> Result<()> {
    let config = CliConfig::load(full_cli.config.as_deref())?;
    let cli = Ctx {
        seed: full_cli.seed,
        output: full_cli.output,
        format: full_cli.format,
    };
    match full_cli.command {
        Command::Ingest { input } => {
            let raw = load_corpus(&input)?;
            let (kept, log) = filter_records(&raw, &FilterPolicy::default());
            let profile = profile(&kept)?;

            let corpus_path = cli.output.join("corpus.filtered.jsonl");
            if let Some(parent) = corpus_path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            let mut file = std::io::BufWriter::new(std::fs::File::create(&corpus_path)?);
            write_jsonl(&kept, &mut file)?;
            file.flush()?;
            println!("wrote {}", corpus_path.display());
            write_output(
                &cli.output.join("filter_log.json"),
                &serde_json::to_vec_pretty(&log)?,
            )?;
            println!(
                "kept {} of {} records ({} dropped)",
                kept.len(),
                raw.len(),
                log.dropped.len()
            );
            print_profile(&profile, &cli.format)?;
            write_output(
                &cli.output.join("profile.json"),
                &render_report(&Artifact::Profile(&profile), ReportFormat::Json)?,
            )
        }
        Command::Profile { input } => {
            let corpus = load_corpus(&input)?;
            let profile = profile(&corpus)?;
            print_profile(&profile, &cli.format)
        }
        Command::Sample { input, size, ratio } => {
            let corpus = load_corpus(&input)?;
            let sample = corpus::sample_stratified(&corpus, size, ratio, cli.seed)?;
            let mut bytes = Vec::new();
            write_jsonl(&sample, &mut bytes)?;
            write_output(&cli.output.join("sample.jsonl"), &bytes)
        }
        Command::Split {
            input,
            train_fraction,
        } => {
            let corpus = load_corpus(&input)?;
            let (train, test) = corpus::split_train_test(&corpus, train_fraction, cli.seed)?;
            for (name, part) in [("train.jsonl", &train), ("test.jsonl", &test)] {
                let mut bytes = Vec::new();
                write_jsonl(part, &mut bytes)?;
                write_output(&cli.output.join(name), &bytes)?;
            }
            println!("split {} records into {} / {}", corpus.len(), train.len(), test.len());
            Ok(())
        }
        Command::Screen(args) => screen_command(*args, &cli, &config),
        Command::Train(args) => train_command(args, &cli),
        Command::Evaluate { decisions, corpus } => {
            let rows = read_decisions(&decisions)?;
            let cm = confusion_from_rows(&rows, corpus.as_deref())?;
            let report = metrics_report(&cm);
            match print_format(&cli.format)? {
                None => {
                    println!(
                        "TP {} TN {} FP {} FN {}",
                        cm.true_positives, cm.true_negatives, cm.false_positives, cm.false_negatives
                    );
                    print_metrics_text(&report);
                }
                Some(format) => {
                    let bytes = render_report(&Artifact::Metrics(&report), format)?;
                    std::io::stdout().write_all(&bytes)?;
                }
            }
            write_output(
                &cli.output.join("metrics.json"),
                &render_report(&Artifact::Metrics(&report), ReportFormat::Json)?,
            )
        }
        Command::Consistency { runs } => {
            if runs.len() < 2 {
                return Err(Error::NotEnoughRuns(runs.len()));
            }
            let mut series = RunSeries { runs: Vec::new() };
            for (index, path) in runs.iter().enumerate() {
                let rows = read_decisions(path)?;
                let keys: Vec<String> = rows.iter().map(|r| r.key.clone()).collect();
                let truth: Vec<Decision> = rows.iter().map(|r| r.truth).collect();
                let decisions: Vec<Decision> = rows.iter().map(|r| r.decision).collect();
                let failures = rows.iter().filter(|r| r.parse_failure).count();
                series.runs.push(RunRecord::from_decisions(
                    index, None, keys, truth, decisions, failures,
                ));
            }
            let report = consistency_report(&series)?;
            let format = print_format(&cli.format)?.unwrap_or(ReportFormat::Markdown);
            let bytes = render_report(&Artifact::Consistency(&report), format)?;
            std::io::stdout().write_all(&bytes)?;
            write_output(
                &cli.output.join("consistency.json"),
                &render_report(&Artifact::Consistency(&report), ReportFormat::Json)?,
            )?;
            write_output(
                &cli.output.join("series.csv"),
                &render_report(&Artifact::Series(&series), ReportFormat::Csv)?,
            )
        }
        Command::Effort(args) => {
            let minutes = args.minutes.or(config.minutes_per_paper).unwrap_or(1.0);
            let effort = match (args.wss, args.papers) {
                (Some(wss), Some(papers)) => EffortReport::from_wss(papers, wss, minutes)?,
                _ => {
                    let rows = read_decisions(args.decisions.as_ref().expect("required by clap"))?;
                    let cm = confusion_from_rows(&rows, None)?;
                    analysis::effort_report(&cm, minutes)?
                }
            };
            let format = print_format(&cli.format)?.unwrap_or(ReportFormat::Markdown);
            let bytes = render_report(&Artifact::Effort(&effort), format)?;
            std::io::stdout().write_all(&bytes)?;
            write_output(
                &cli.output.join("effort.json"),
                &render_report(&Artifact::Effort(&effort), ReportFormat::Json)?,
            )
        }
        Command::Cost(args) => {
            let minutes = args.minutes.or(config.minutes_per_paper).unwrap_or(1.0);
            let effort = match (args.wss, args.papers) {
                (Some(wss), Some(papers)) => EffortReport::from_wss(papers, wss, minutes)?,
                _ => {
                    let path = args.effort.as_ref().expect("required by clap");
                    let bytes = std::fs::read(path)?;
                    serde_json::from_slice(&bytes)?
                }
            };
            let mean_tokens = Decimal::from_str(&args.mean_tokens)
                .map_err(|e| Error::Config(format!("mean_tokens: {e}")))?;
            let price_text = args
                .price
                .or(config.price_per_1k_tokens)
                .unwrap_or_else(|| "0.002".into());
            let price = Decimal::from_str(&price_text)
                .map_err(|e| Error::Config(format!("price: {e}")))?;
            let basis = match args.basis.as_str() {
                "wss" => CostBasis::PapersNotSaved,
                "full" => CostBasis::FullCorpus,
                other => return Err(Error::Config(format!("unknown cost basis `{other}`"))),
            };
            let cost = cost_report(&effort, mean_tokens, price, basis)?;
            let format = print_format(&cli.format)?.unwrap_or(ReportFormat::Markdown);
            let bytes = render_report(&Artifact::Cost(&cost), format)?;
            std::io::stdout().write_all(&bytes)?;
            write_output(
                &cli.output.join("cost.json"),
                &render_report(&Artifact::Cost(&cost), ReportFormat::Json)?,
            )
        }
        Command::Compare { reports } => {
            if reports.len() < 2 {
                return Err(Error::NotEnoughDatasets(reports.len()));
            }
            let mut rows = Vec::new();
            for spec in &reports {
                let (name, path) = match spec.split_once('=') {
                    Some((name, path)) => (name.to_string(), PathBuf::from(path)),
                    None => {
                        let path = PathBuf::from(spec);
                        let stem = path
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| spec.clone());
                        (stem, path)
                    }
                };
                let bytes = std::fs::read(&path)?;
                let report = serde_json::from_slice(&bytes)?;
                rows.push((name, report));
            }
            let table = aggregate_generalizability(&rows)?;
            let format = print_format(&cli.format)?.unwrap_or(ReportFormat::Markdown);
            let bytes = render_report(&Artifact::Generalizability(&table), format)?;
            std::io::stdout().write_all(&bytes)?;
            write_output(
                &cli.output.join("generalizability.json"),
                &render_report(&Artifact::Generalizability(&table), ReportFormat::Json)?,
            )
        }
        Command::Report { input, kind, to } => {
            let format = ReportFormat::from_str(&to)?;
            let bytes = std::fs::read(&input)?;
            let rendered = match kind.as_str() {
                "profile" => {
                    let v: crate::corpus::DatasetProfile = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Profile(&v), format)?
                }
                "metrics" => {
                    let v: crate::metrics::MetricsReport = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Metrics(&v), format)?
                }
                "series" => {
                    let v: RunSeries = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Series(&v), format)?
                }
                "consistency" => {
                    let v: analysis::ConsistencyReport = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Consistency(&v), format)?
                }
                "effort" => {
                    let v: EffortReport = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Effort(&v), format)?
                }
                "cost" => {
                    let v: analysis::CostReport = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Cost(&v), format)?
                }
                "generalizability" => {
                    let v: analysis::GeneralizabilityTable = serde_json::from_slice(&bytes)?;
                    render_report(&Artifact::Generalizability(&v), format)?
                }
                other => return Err(Error::Config(format!("unknown artifact kind `{other}`"))),
            };
            std::io::stdout().write_all(&rendered)?;
            Ok(())
        }
        Command::Experiment { plan } => {
            let mut plan = ExperimentPlan::from_file(&plan)?;
            plan.output_dir = cli.output.clone();
            let needs_live = matches!(
                &plan.classifier,
                analysis::ClassifierSpec::Llm { cache, .. }
                    if !matches!(cache, Some((_, CacheMode::Replay)))
            );
            let series = if needs_live {
                let spec_config = match &plan.classifier {
                    analysis::ClassifierSpec::Llm { config, .. } => config.clone(),
                    _ => unreachable!(),
                };
                let transport = HttpTransport::from_config(&spec_config)
                    .map_err(|e| Error::Endpoint(e.to_string()))?;
                analysis::run_experiment(&plan, Some(&transport))?
            } else {
                analysis::run_experiment(&plan, Some(&NullTransport))?
            };
            println!("completed {} runs", series.runs.len());
            write_output(
                &cli.output.join("series.json"),
                &render_report(&Artifact::Series(&series), ReportFormat::Json)?,
            )?;
            write_output(
                &cli.output.join("series.csv"),
                &render_report(&Artifact::Series(&series), ReportFormat::Csv)?,
            )
        }
    }
}

fn print_profile(profile: &corpus::DatasetProfile, format: &str) -> Result<()> {
    match print_format(format)? {
        None => {
            println!(
                "size {}  included {} ({:.1}%)  excluded {}  conflicts {} ({:.1}%)",
                profile.size,
                profile.included,
                profile.inclusion_ratio * 100.0,
                profile.excluded,
                profile.conflicts,
                profile.conflict_ratio * 100.0
            );
            Ok(())
        }
        Some(format) => {
            let bytes = render_report(&Artifact::Profile(profile), format)?;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn print_metrics_text(report: &crate::metrics::MetricsReport) {
    let cells: Vec<String> = report
        .column_values()
        .iter()
        .zip(METRIC_COLUMNS)
        .map(|(value, name)| format!("{name} {}", fmt_metric(*value)))
        .collect();
    println!("{}", cells.join("  "));
}

fn read_decisions(path: &Path) -> Result<Vec<DecisionRow>> {
    let raw = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: DecisionRow = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

fn confusion_from_rows(rows: &[DecisionRow], corpus: Option<&Path>) -> Result<ConfusionMatrix> {
    let truth_by_key: Option<BTreeMap<String, Decision>> = match corpus {
        Some(path) => Some(
            load_corpus(path)?
                .records
                .into_iter()
                .map(|r| (r.key, r.decision))
                .collect(),
        ),
        None => None,
    };
    let mut cm = ConfusionMatrix::default();
    for row in rows {
        let truth = match &truth_by_key {
            Some(map) => *map.get(&row.key).ok_or_else(|| Error::Series(format!(
                "decision for unknown record `{}`",
                row.key
            )))?,
            None => row.truth,
        };
        cm.record(truth, row.decision);
    }
    Ok(cm)
}

fn screen_command(args: ScreenArgs, cli: &Ctx, config: &CliConfig) -> Result<()> {
    let raw = load_corpus(&args.input)?;
    let (corpus, _) = filter_records(&raw, &FilterPolicy::default());

    let mut template = PromptTemplate::new(args.topic)
        .with_inputs(args.inputs)
        .with_answer_words(args.include_word.clone(), args.exclude_word.clone());
    if let Some(path) = args.template {
        template = template.with_body_from_file(path)?;
    }
    template.validate()?;

    let mut llm = LlmConfig {
        include_word: args.include_word,
        exclude_word: args.exclude_word,
        parse_fallback: match args.fallback.as_str() {
            "include" => Decision::Include,
            "exclude" => Decision::Exclude,
            other => return Err(Error::Config(format!("unknown fallback `{other}`"))),
        },
        ..LlmConfig::default()
    };
    if let Some(m) = args.model.or_else(|| config.model.clone()) {
        llm.model_name = m;
    }
    if let Some(e) = args.endpoint.or_else(|| config.endpoint.clone()) {
        llm.endpoint = e;
    }
    if let Some(t) = args.temperature.or(config.temperature) {
        llm.temperature = t;
    }
    if let Some(m) = args.max_tokens.or(config.max_tokens) {
        llm.max_tokens = m;
    }
    if let Some(p) = args.parallelism.or(config.parallelism) {
        llm.parallelism = p;
    }
    if let Some(k) = &config.api_key_env {
        llm.api_key_env = k.clone();
    }
    llm.validate()?;

    let prompts: Vec<_> = corpus
        .iter()
        .map(|r| template.render(r))
        .collect::<Result<_>>()?;

    let (cache, transport): (Option<ReplayCache>, Box<dyn ChatTransport>) =
        match (&args.replay, &args.record) {
            (Some(path), _) => (Some(ReplayCache::replay(path)?), Box::new(NullTransport)),
            (None, record) => {
                let transport = HttpTransport::from_config(&llm)
                    .map_err(|e| Error::Endpoint(e.to_string()))?;
                let cache = match record {
                    Some(path) => Some(ReplayCache::record(path)?),
                    None => None,
                };
                (cache, Box::new(transport))
            }
        };

    let outcomes = screen_batch(transport.as_ref(), &llm, &prompts, cache.as_ref())?;

    let mut outcome_bytes = Vec::new();
    let mut decision_bytes = Vec::new();
    for (outcome, record) in outcomes.iter().zip(corpus.iter()) {
        serde_json::to_writer(&mut outcome_bytes, outcome)?;
        outcome_bytes.push(b'\n');
        let row = DecisionRow {
            key: outcome.record_key.clone(),
            truth: record.decision,
            decision: outcome.decision,
            parse_failure: outcome.parse_failure.is_some(),
        };
        serde_json::to_writer(&mut decision_bytes, &row)?;
        decision_bytes.push(b'\n');
    }
    write_output(&cli.output.join("outcomes.jsonl"), &outcome_bytes)?;
    write_output(&cli.output.join("decisions.jsonl"), &decision_bytes)?;

    let failures = outcomes.iter().filter(|o| o.parse_failure.is_some()).count();
    let mean_estimated =
        prompts.iter().map(|p| p.estimated_tokens).sum::<usize>() as f64 / prompts.len().max(1) as f64;
    println!(
        "screened {} records  parse failures {}  mean estimated prompt tokens {:.1}",
        outcomes.len(),
        failures,
        mean_estimated
    );
    Ok(())
}

fn train_command(args: TrainArgs, cli: &Ctx) -> Result<()> {
    let kind: ClassifierKind = args.kind.parse()?;
    let train = load_corpus(&args.train)?;
    let test = load_corpus(&args.test)?;

    // embedding trained on the dataset text (train + test records)
    let mut all_records = train.records.clone();
    all_records.extend(test.records.iter().cloned());
    let dataset = Corpus::new(all_records, "train+test");
    let embedding_config = Word2VecConfig {
        dimension: args.dimension,
        epochs: args.epochs,
        seed: cli.seed,
        ..Word2VecConfig::default()
    };
    let embedding = train_word2vec(&dataset, &embedding_config)?;
    embedding.save(cli.output.join("embedding.bin"))?;
    println!(
        "trained {}-dim embeddings over {} tokens",
        embedding.dimension(),
        embedding.vocab_size()
    );

    let train_x = featurize(&train, &embedding);
    let test_x = featurize(&test, &embedding);
    let train_y = train.decisions();

    let grid = match &args.grids {
        Some(path) => baselines::load_grids(path)?
            .remove(&kind)
            .ok_or_else(|| Error::Config(format!("grids file has no entry for `{kind}`")))?,
        None => baselines::default_grid(kind),
    };
    let settings = CvSettings {
        folds: args.folds,
        repeats: args.repeats,
        candidates: args.candidates,
        seed: cli.seed,
    };
    let cv = grid_search_cv(kind, &grid, &train_x, &train_y, &settings)?;
    println!(
        "best {} hyperparameters (mean CV F2 {:.3}): {:?}",
        kind, cv.mean_score, cv.best_hyperparameters
    );
    write_output(&cli.output.join("cv.json"), &serde_json::to_vec_pretty(&cv)?)?;

    let decisions = baselines::train_and_predict(
        kind,
        &cv.best_hyperparameters,
        &train_x,
        &train_y,
        &test_x,
        cli.seed,
    )?;
    let mut decision_bytes = Vec::new();
    let mut cm = ConfusionMatrix::default();
    for (record, decision) in test.iter().zip(&decisions) {
        cm.record(record.decision, *decision);
        let row = DecisionRow {
            key: record.key.clone(),
            truth: record.decision,
            decision: *decision,
            parse_failure: false,
        };
        serde_json::to_writer(&mut decision_bytes, &row)?;
        decision_bytes.push(b'\n');
    }
    write_output(&cli.output.join("decisions.jsonl"), &decision_bytes)?;

    let report = metrics_report(&cm);
    print_metrics_text(&report);
    write_output(
        &cli.output.join("metrics.json"),
        &render_report(&Artifact::Metrics(&report), ReportFormat::Json)?,
    )
}
