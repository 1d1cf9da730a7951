//! The screening prompt: template representation, validation, rendering,
//! and token-cost estimation.
//!
//! Rendering is pure and deterministic; the same template and record
//! always produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ScreeningRecord;
use crate::error::{Error, Result};
use crate::text::clean_text;

/// Default prompt body. Placeholders are written `{NAME}`; the article
/// field lines at the bottom are kept or dropped depending on which
/// inputs the template requests.
pub const DEFAULT_BODY: &str = "\
I am screening papers for a systematic literature review.
The topic of the systematic review is {TOPIC}.
The study should focus exclusively on this topic.

Decide if the article should be included or excluded from the systematic review.
I give the {INPUTS} of the article as input.
Only answer {INCLUDE_WORD} or {EXCLUDE_WORD}.
Be lenient. I prefer including papers by mistake rather than excluding them by mistake.

Title: {TITLE}
Abstract: {ABSTRACT}";

pub const DEFAULT_INCLUDE_WORD: &str = "Include";
pub const DEFAULT_EXCLUDE_WORD: &str = "Exclude";

/// The screening prompt with its six parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    /// Brief description of the review scope. Required, exactly one.
    pub topic: String,
    /// Names of the article fields handed to the model, e.g.
    /// `["title", "abstract"]`. At least one.
    pub inputs: Vec<String>,
    /// Literal the model must answer to suggest inclusion.
    pub include_word: String,
    /// Literal the model must answer to suggest exclusion.
    pub exclude_word: String,
    /// Body text with placeholders.
    pub body: String,
}

impl PromptTemplate {
    /// Template with the default body, title+abstract inputs, and the
    /// Include/Exclude answer words.
    pub fn new(topic: impl Into<String>) -> Self {
        PromptTemplate {
            topic: topic.into(),
            inputs: vec!["title".into(), "abstract".into()],
            include_word: DEFAULT_INCLUDE_WORD.into(),
            exclude_word: DEFAULT_EXCLUDE_WORD.into(),
            body: DEFAULT_BODY.into(),
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<String>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_answer_words(
        mut self,
        include_word: impl Into<String>,
        exclude_word: impl Into<String>,
    ) -> Self {
        self.include_word = include_word.into();
        self.exclude_word = exclude_word.into();
        self
    }

    pub fn with_body(mut self, body: impl Into<String>) -> Self {
        self.body = body.into();
        self
    }

    /// Load a body override from a plain-text file.
    pub fn with_body_from_file(self, path: impl AsRef<Path>) -> Result<Self> {
        let body = std::fs::read_to_string(path)?;
        Ok(self.with_body(body.trim_end_matches('\n').to_string()))
    }

    /// Check the structural invariants: non-empty topic and inputs,
    /// distinct answer words, and each placeholder present exactly once.
    pub fn validate(&self) -> Result<()> {
        if self.topic.trim().is_empty() {
            return Err(Error::Template("topic must not be empty".into()));
        }
        if self.inputs.is_empty() {
            return Err(Error::Template("at least one input field is required".into()));
        }
        if self.include_word == self.exclude_word {
            return Err(Error::Template(
                "include and exclude words must differ".into(),
            ));
        }
        for placeholder in ["{TOPIC}", "{INPUTS}", "{INCLUDE_WORD}", "{EXCLUDE_WORD}"] {
            expect_once(&self.body, placeholder)?;
        }
        for input in &self.inputs {
            expect_once(&self.body, &field_placeholder(input))?;
        }
        Ok(())
    }

    /// Substitute placeholders for one record.
    ///
    /// Article field lines whose field is not requested in `inputs` are
    /// dropped, so a title-only template omits the Abstract line. Field
    /// values are cleaned up (LaTeX escapes, control characters) at this
    /// point; stored corpora stay raw.
    pub fn render(&self, record: &ScreeningRecord) -> Result<RenderedPrompt> {
        self.validate()?;

        let mut text = self
            .body
            .replace("{TOPIC}", &self.topic)
            .replace("{INPUTS}", &enumerate_naturally(&self.inputs))
            .replace("{INCLUDE_WORD}", &self.include_word)
            .replace("{EXCLUDE_WORD}", &self.exclude_word);

        let wanted: Vec<String> = self.inputs.iter().map(|f| field_placeholder(f)).collect();
        text = text
            .lines()
            .filter(|line| match find_placeholder(line) {
                Some(p) => wanted.contains(&p),
                None => true,
            })
            .collect::<Vec<_>>()
            .join("\n");

        for input in &self.inputs {
            let value = lookup_field(record, input)?;
            text = text.replace(&field_placeholder(input), &clean_text(&value));
        }

        let estimated_tokens = estimate_tokens(&text);
        Ok(RenderedPrompt {
            text,
            record_key: record.key.clone(),
            estimated_tokens,
        })
    }
}

/// A prompt instantiated for one article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub record_key: String,
    pub estimated_tokens: usize,
}

fn field_placeholder(field: &str) -> String {
    format!("{{{}}}", field.to_ascii_uppercase())
}

fn expect_once(body: &str, placeholder: &str) -> Result<()> {
    match body.matches(placeholder).count() {
        1 => Ok(()),
        n => Err(Error::Template(format!(
            "placeholder {placeholder} must appear exactly once, found {n}"
        ))),
    }
}

/// First `{UPPERCASE}` placeholder on a line, if any.
fn find_placeholder(line: &str) -> Option<String> {
    let start = line.find('{')?;
    let rest = &line[start + 1..];
    let end = rest.find('}')?;
    let name = &rest[..end];
    if !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
    {
        Some(format!("{{{name}}}"))
    } else {
        None
    }
}

fn lookup_field(record: &ScreeningRecord, field: &str) -> Result<String> {
    let missing = || Error::PromptField {
        key: record.key.clone(),
        field: field.to_string(),
    };
    match field.to_ascii_lowercase().as_str() {
        "title" => Ok(record.title.clone()),
        "abstract" => Ok(record.abstract_text.clone()),
        "doi" => record.doi.clone().ok_or_else(missing),
        other => match record.extra.get(other) {
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            _ => Err(missing()),
        },
    }
}

/// Join field names as prose: "title", "title and abstract",
/// "title, abstract and keywords".
fn enumerate_naturally(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

/// Estimate the token count of a text as ceil(characters / 4).
///
/// One token roughly equals four English characters; this is a
/// heuristic, not a tokenizer. Plug in a [`TokenEstimator`] where exact
/// counts matter.
pub fn estimate_tokens(text: &str) -> usize {
    CharsPerTokenHeuristic::default().estimate(text)
}

/// Plug-point for swapping the character heuristic for a real tokenizer.
pub trait TokenEstimator {
    fn estimate(&self, text: &str) -> usize;
}

/// Ceiling division of the character count by a fixed chars-per-token.
#[derive(Debug, Clone, Copy)]
pub struct CharsPerTokenHeuristic {
    pub chars_per_token: usize,
}

impl Default for CharsPerTokenHeuristic {
    fn default() -> Self {
        CharsPerTokenHeuristic { chars_per_token: 4 }
    }
}

impl TokenEstimator for CharsPerTokenHeuristic {
    fn estimate(&self, text: &str) -> usize {
        let chars = text.chars().count();
        chars.div_ceil(self.chars_per_token)
    }
}
