//! Screening corpora: loading, validation, filtering, profiling,
//! sampling, and train/test splitting.
//!
//! The canonical on-disk form is JSONL, one record per line; CSV with the
//! same columns is accepted as a convenience import. Corpus values are
//! immutable after construction and safe to share across threads.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ground-truth screening decision. Include maps to 1, Exclude to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Include,
    Exclude,
}

impl Decision {
    pub fn as_bit(self) -> u8 {
        match self {
            Decision::Include => 1,
            Decision::Exclude => 0,
        }
    }

    pub fn from_bit(bit: u8) -> Decision {
        if bit == 0 {
            Decision::Exclude
        } else {
            Decision::Include
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Include => "include",
            Decision::Exclude => "exclude",
        }
    }
}

impl FromStr for Decision {
    type Err = String;

    /// Case-insensitive match of "include" / "exclude".
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "include" => Ok(Decision::Include),
            "exclude" => Ok(Decision::Exclude),
            other => Err(format!("unknown decision `{other}` (expected include or exclude)")),
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Decision::from_str(&s).map_err(D::Error::custom)
    }
}

/// One screened article with its ground-truth decision.
///
/// Text fields are stored raw; LaTeX escapes and control characters are
/// cleaned up at the point of use (prompt rendering, tokenization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRecord {
    pub project: String,
    /// Unique identifier within a project.
    pub key: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    pub decision: Decision,
    #[serde(default)]
    pub exclusion_criteria: Vec<String>,
    #[serde(default)]
    pub reviewers: u32,
    #[serde(default)]
    pub conflict: bool,
    /// Unknown input fields, preserved for lossless round-trips.
    #[serde(flatten, skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ScreeningRecord {
    pub fn new(
        project: impl Into<String>,
        key: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
        decision: Decision,
    ) -> Self {
        ScreeningRecord {
            project: project.into(),
            key: key.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            doi: None,
            decision,
            exclusion_criteria: Vec::new(),
            reviewers: 0,
            conflict: false,
            extra: serde_json::Map::new(),
        }
    }
}

/// An ordered set of screening records plus a provenance note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<ScreeningRecord>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(records: Vec<ScreeningRecord>, provenance: impl Into<String>) -> Self {
        Corpus {
            records,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ScreeningRecord> {
        self.records.iter()
    }

    /// Ground-truth decisions in record order.
    pub fn decisions(&self) -> Vec<Decision> {
        self.records.iter().map(|r| r.decision).collect()
    }

    pub fn keys(&self) -> Vec<String> {
        self.records.iter().map(|r| r.key.clone()).collect()
    }
}

/// Supported corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from a file extension; JSONL is the canonical default.
    pub fn from_extension(path: &std::path::Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

const CANONICAL_COLUMNS: [&str; 9] = [
    "project",
    "key",
    "title",
    "abstract",
    "doi",
    "decision",
    "exclusion_criteria",
    "reviewers",
    "conflict",
];

const REQUIRED_FIELDS: [&str; 5] = ["project", "key", "title", "abstract", "decision"];

/// Parse a corpus from a byte stream.
///
/// JSONL: one object per line, blank lines skipped. CSV: RFC-4180 with a
/// header row. Errors carry the 1-based line number of the offending row;
/// a missing required field is reported as a schema error naming it.
pub fn parse_corpus(source: impl Read, format: CorpusFormat) -> Result<Corpus> {
    match format {
        CorpusFormat::Jsonl => parse_jsonl(source),
        CorpusFormat::Csv => parse_csv(source),
    }
}

fn parse_jsonl(source: impl Read) -> Result<Corpus> {
    let reader = BufReader::new(source);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let object = value.as_object().ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected a JSON object".into(),
        })?;
        for field in REQUIRED_FIELDS {
            if !object.contains_key(field) {
                return Err(Error::Schema {
                    field: field.into(),
                    line: Some(line_no),
                });
            }
        }
        let record: ScreeningRecord =
            serde_json::from_value(value).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(Corpus::new(records, "jsonl stream"))
}

fn parse_csv(source: impl Read) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new().from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let columns: Vec<String> = headers.iter().map(str::to_string).collect();
    for field in REQUIRED_FIELDS {
        if !columns.iter().any(|c| c == field) {
            return Err(Error::Schema {
                field: field.into(),
                line: Some(1),
            });
        }
    }

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line_no = idx + 2; // header occupies line 1
        let row = row.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut record = ScreeningRecord::new("", "", "", "", Decision::Exclude);
        for (column, cell) in columns.iter().zip(row.iter()) {
            match column.as_str() {
                "project" => record.project = cell.to_string(),
                "key" => record.key = cell.to_string(),
                "title" => record.title = cell.to_string(),
                "abstract" => record.abstract_text = cell.to_string(),
                "doi" => {
                    record.doi = if cell.is_empty() {
                        None
                    } else {
                        Some(cell.to_string())
                    }
                }
                "decision" => {
                    record.decision = Decision::from_str(cell).map_err(|message| Error::Parse {
                        line: line_no,
                        message,
                    })?
                }
                "exclusion_criteria" => {
                    record.exclusion_criteria = if cell.is_empty() {
                        Vec::new()
                    } else {
                        cell.split(';').map(|s| s.trim().to_string()).collect()
                    }
                }
                "reviewers" => {
                    record.reviewers = cell.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("reviewers: `{cell}` is not a count"),
                    })?
                }
                "conflict" => {
                    record.conflict = match cell.to_ascii_lowercase().as_str() {
                        "true" | "1" => true,
                        "false" | "0" | "" => false,
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("conflict: `{other}` is not a boolean"),
                            })
                        }
                    }
                }
                other => {
                    record
                        .extra
                        .insert(other.to_string(), serde_json::Value::String(cell.to_string()));
                }
            }
        }
        records.push(record);
    }
    Ok(Corpus::new(records, "csv stream"))
}

/// Serialize a corpus back to JSONL, one record per line.
pub fn write_jsonl(corpus: &Corpus, mut sink: impl Write) -> Result<()> {
    for record in &corpus.records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Serialize a corpus to CSV using the canonical column order; extra
/// fields become additional columns, sorted by name.
pub fn write_csv(corpus: &Corpus, sink: impl Write) -> Result<()> {
    let mut extra_columns: Vec<String> = corpus
        .records
        .iter()
        .flat_map(|r| r.extra.keys().cloned())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    extra_columns.sort();

    let mut writer = csv::Writer::from_writer(sink);
    let header: Vec<&str> = CANONICAL_COLUMNS
        .iter()
        .copied()
        .chain(extra_columns.iter().map(String::as_str))
        .collect();
    writer.write_record(&header).map_err(io_from_csv)?;

    for record in &corpus.records {
        let mut row: Vec<String> = vec![
            record.project.clone(),
            record.key.clone(),
            record.title.clone(),
            record.abstract_text.clone(),
            record.doi.clone().unwrap_or_default(),
            record.decision.as_str().to_string(),
            record.exclusion_criteria.join(";"),
            record.reviewers.to_string(),
            record.conflict.to_string(),
        ];
        for column in &extra_columns {
            let cell = match record.extra.get(column) {
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(other) => other.to_string(),
                None => String::new(),
            };
            row.push(cell);
        }
        writer.write_record(&row).map_err(io_from_csv)?;
    }
    writer.flush()?;
    Ok(())
}

fn io_from_csv(e: csv::Error) -> Error {
    Error::Parse {
        line: 0,
        message: e.to_string(),
    }
}

/// Retention rules applied by [`filter_records`].
#[derive(Debug, Clone)]
pub struct FilterPolicy {
    pub require_title: bool,
    pub require_abstract: bool,
    /// Drop later records sharing (project, key); first occurrence wins.
    pub dedup: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            require_title: true,
            require_abstract: true,
            dedup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingAbstract,
    MissingTitle,
    Duplicate,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::MissingAbstract => "missing abstract",
            DropReason::MissingTitle => "missing title",
            DropReason::Duplicate => "duplicate (project, key)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRecord {
    pub project: String,
    pub key: String,
    pub reason: DropReason,
}

/// Per-record account of everything the retention filter removed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterLog {
    pub dropped: Vec<DroppedRecord>,
}

impl FilterLog {
    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty()
    }
}

/// Apply the retention filter: records keep their order, whitespace-only
/// titles/abstracts count as missing, and duplicates within a project are
/// removed keeping the first occurrence.
pub fn filter_records(corpus: &Corpus, policy: &FilterPolicy) -> (Corpus, FilterLog) {
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept = Vec::with_capacity(corpus.len());
    let mut log = FilterLog::default();

    for record in &corpus.records {
        let reason = if policy.require_abstract && record.abstract_text.trim().is_empty() {
            Some(DropReason::MissingAbstract)
        } else if policy.require_title && record.title.trim().is_empty() {
            Some(DropReason::MissingTitle)
        } else if policy.dedup && !seen.insert((record.project.clone(), record.key.clone())) {
            Some(DropReason::Duplicate)
        } else {
            None
        };
        match reason {
            Some(reason) => log.dropped.push(DroppedRecord {
                project: record.project.clone(),
                key: record.key.clone(),
                reason,
            }),
            None => kept.push(record.clone()),
        }
    }

    let provenance = corpus.provenance.clone();
    (Corpus::new(kept, provenance), log)
}

/// Size and balance summary of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub size: usize,
    pub included: usize,
    pub excluded: usize,
    pub inclusion_ratio: f64,
    pub conflicts: usize,
    pub conflict_ratio: f64,
}

/// Profile a non-empty corpus; ratios are counts over size.
pub fn profile(corpus: &Corpus) -> Result<DatasetProfile> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let size = corpus.len();
    let included = corpus
        .iter()
        .filter(|r| r.decision == Decision::Include)
        .count();
    let conflicts = corpus.iter().filter(|r| r.conflict).count();
    Ok(DatasetProfile {
        size,
        included,
        excluded: size - included,
        inclusion_ratio: included as f64 / size as f64,
        conflicts,
        conflict_ratio: conflicts as f64 / size as f64,
    })
}

/// Draw a stratified sample with exactly `round(size * inclusion_ratio)`
/// included records (round half up), the rest excluded, each stratum
/// drawn uniformly at random. Output keeps the original corpus order and
/// is deterministic for a fixed seed.
pub fn sample_stratified(
    corpus: &Corpus,
    size: usize,
    inclusion_ratio: f64,
    seed: u64,
) -> Result<Corpus> {
    if !(0.0..=1.0).contains(&inclusion_ratio) {
        return Err(Error::BadRatio {
            what: "inclusion ratio",
            value: inclusion_ratio,
        });
    }
    let want_included = ((size as f64 * inclusion_ratio).round() as usize).min(size);
    let want_excluded = size - want_included;

    let included: Vec<usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, r)| r.decision == Decision::Include)
        .map(|(i, _)| i)
        .collect();
    let excluded: Vec<usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, r)| r.decision == Decision::Exclude)
        .map(|(i, _)| i)
        .collect();

    for (name, want, have) in [
        ("included", want_included, included.len()),
        ("excluded", want_excluded, excluded.len()),
    ] {
        if want > have {
            return Err(Error::Stratum {
                stratum: name.into(),
                requested: want,
                available: have,
                shortfall: want - have,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = index_sample(&mut rng, included.len(), want_included)
        .into_iter()
        .map(|i| included[i])
        .collect();
    chosen.extend(
        index_sample(&mut rng, excluded.len(), want_excluded)
            .into_iter()
            .map(|i| excluded[i]),
    );
    chosen.sort_unstable();

    let records = chosen.iter().map(|&i| corpus.records[i].clone()).collect();
    let provenance = format!(
        "{} (stratified sample size={size} ratio={inclusion_ratio} seed={seed})",
        corpus.provenance
    );
    Ok(Corpus::new(records, provenance))
}

/// Random disjoint partition with `round(train_fraction * size)` records
/// in the training side, clamped so both sides stay non-empty.
/// Deterministic for a fixed seed; each side keeps the original order.
pub fn split_train_test(
    corpus: &Corpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(Corpus, Corpus)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::BadTrainFraction(train_fraction));
    }
    let size = corpus.len();
    if size < 2 {
        return Err(Error::SplitTooSmall { size });
    }
    let train_n = ((size as f64 * train_fraction).round() as usize).clamp(1, size - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx: Vec<usize> = index_sample(&mut rng, size, train_n).into_vec();
    train_idx.sort_unstable();

    let train_set: HashSet<usize> = train_idx.iter().copied().collect();
    let mut train = Vec::with_capacity(train_n);
    let mut test = Vec::with_capacity(size - train_n);
    for (i, record) in corpus.records.iter().enumerate() {
        if train_set.contains(&i) {
            train.push(record.clone());
        } else {
            test.push(record.clone());
        }
    }
    let base = corpus.provenance.clone();
    Ok((
        Corpus::new(train, format!("{base} (train fraction={train_fraction} seed={seed})")),
        Corpus::new(test, format!("{base} (test fraction={} seed={seed})", 1.0 - train_fraction)),
    ))
}
