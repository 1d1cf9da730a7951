//! LLM screening: configuration, decision parsing, and batched
//! request execution with record/replay support.

mod cache;
pub mod transport;

pub use cache::{CacheEntry, CacheMode, ReplayCache};
pub use transport::{ChatRequest, ChatResponse, ChatTransport, HttpTransport, ScriptedTransport, TokenUsage, TransportError};

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::Decision;
use crate::error::{Error, Result};
use crate::prompt::RenderedPrompt;

/// Endpoint contract for screening runs.
///
/// Temperature 0 requests maximally consistent responses; three response
/// tokens fit either one-word answer plus punctuation without truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmConfig {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub endpoint: String,
    pub request_timeout: Duration,
    /// Total attempts per request (transport failures and truncated
    /// answers are retried with exponential backoff).
    pub max_retries: u32,
    /// First backoff delay; doubles per attempt.
    pub retry_backoff: Duration,
    /// Maximum in-flight requests.
    pub parallelism: usize,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Decision applied when a response never parses.
    pub parse_fallback: Decision,
    /// Answer word whose exact match means inclusion.
    pub include_word: String,
    /// Answer word whose exact match means exclusion.
    pub exclude_word: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            model_name: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            max_tokens: 3,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            request_timeout: Duration::from_secs(30),
            max_retries: 3,
            retry_backoff: Duration::from_secs(1),
            parallelism: 4,
            api_key_env: "OPENAI_API_KEY".into(),
            parse_fallback: Decision::Include,
            include_word: "Include".into(),
            exclude_word: "Exclude".into(),
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(Error::LlmConfig(format!(
                "temperature must lie in [0, 1], got {}",
                self.temperature
            )));
        }
        if self.max_tokens < 1 {
            return Err(Error::LlmConfig("max_tokens must be at least 1".into()));
        }
        if self.parallelism < 1 {
            return Err(Error::LlmConfig("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

/// A response that did not normalize to either answer word. This is a
/// value, not an exception; callers apply policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub raw: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unparseable decision: `{}`", self.raw)
    }
}

/// Map a raw response to a decision: trim whitespace and terminal
/// punctuation, fold case, then require an exact match of one answer
/// word. Anything else is a [`ParseFailure`] carrying the raw text.
pub fn parse_decision(
    raw: &str,
    include_word: &str,
    exclude_word: &str,
) -> std::result::Result<Decision, ParseFailure> {
    let normalized = raw
        .trim()
        .trim_end_matches(['.', '!', '?', ',', ';', ':'])
        .trim()
        .to_lowercase();
    if normalized == include_word.to_lowercase() {
        Ok(Decision::Include)
    } else if normalized == exclude_word.to_lowercase() {
        Ok(Decision::Exclude)
    } else {
        Err(ParseFailure { raw: raw.into() })
    }
}

/// The screening result for one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub record_key: String,
    /// Final decision after the fallback policy.
    pub decision: Decision,
    /// Raw response text when the fallback policy had to decide.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_failure: Option<String>,
    pub raw_response: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Zero in replay mode so replayed outcomes are byte-identical.
    pub latency_ms: u64,
    pub attempt_count: u32,
}

/// Batch failure preserving partial progress: which prompts completed
/// and which keys failed with what error.
#[derive(Debug)]
pub struct BatchError {
    pub completed: Vec<ScreenOutcome>,
    pub failed: Vec<(String, String)>,
}

impl fmt::Display for BatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed_keys: Vec<&str> = self.failed.iter().map(|(k, _)| k.as_str()).collect();
        write!(
            f,
            "screening batch failed for {} of {} prompts (completed {}; failed keys: {}); first error: {}",
            self.failed.len(),
            self.failed.len() + self.completed.len(),
            self.completed.len(),
            failed_keys.join(", "),
            self.failed.first().map(|(_, e)| e.as_str()).unwrap_or("-"),
        )
    }
}

impl std::error::Error for BatchError {}

/// Screen a batch of prompts, one outcome per prompt in input order.
///
/// Replay mode answers from the cache with zero network calls and is
/// fully deterministic. Record mode appends every request/response pair
/// to the cache. Transport failures retry up to the configured attempt
/// budget with exponential backoff; responses that persistently fail to
/// parse resolve to the fallback decision with the failure flagged.
pub fn screen_batch(
    transport: &dyn ChatTransport,
    config: &LlmConfig,
    prompts: &[RenderedPrompt],
    cache: Option<&ReplayCache>,
) -> Result<Vec<ScreenOutcome>> {
    config.validate()?;

    let results: Vec<Option<std::result::Result<ScreenOutcome, String>>> =
        if config.parallelism <= 1 || prompts.len() <= 1 {
            prompts
                .iter()
                .map(|p| Some(screen_one(transport, config, p, cache)))
                .collect()
        } else {
            let slots: Mutex<Vec<Option<std::result::Result<ScreenOutcome, String>>>> =
                Mutex::new(vec![None; prompts.len()]);
            let next = AtomicUsize::new(0);
            let workers = config.parallelism.min(prompts.len());
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let index = next.fetch_add(1, Ordering::SeqCst);
                        if index >= prompts.len() {
                            break;
                        }
                        let outcome = screen_one(transport, config, &prompts[index], cache);
                        slots.lock().expect("result slots poisoned")[index] = Some(outcome);
                    });
                }
            });
            slots.into_inner().expect("result slots poisoned")
        };

    let mut completed = Vec::with_capacity(prompts.len());
    let mut failed = Vec::new();
    for (slot, prompt) in results.into_iter().zip(prompts) {
        match slot.expect("every prompt is processed") {
            Ok(outcome) => completed.push(outcome),
            Err(message) => failed.push((prompt.record_key.clone(), message)),
        }
    }
    if failed.is_empty() {
        Ok(completed)
    } else {
        Err(Error::Batch(BatchError { completed, failed }))
    }
}

fn screen_one(
    transport: &dyn ChatTransport,
    config: &LlmConfig,
    prompt: &RenderedPrompt,
    cache: Option<&ReplayCache>,
) -> std::result::Result<ScreenOutcome, String> {
    let replaying = matches!(cache.map(ReplayCache::mode), Some(CacheMode::Replay));
    let max_attempts = config.max_retries.max(1);
    let request = ChatRequest::single_user(config, &prompt.text);
    let key_hash = ReplayCache::key_hash(config, &prompt.text);

    let mut attempt = 0u32;
    loop {
        attempt += 1;
        let started = Instant::now();
        let response = if replaying {
            let cache = cache.expect("replay mode implies a cache");
            match cache.fetch(&key_hash) {
                Some(entry) => Ok(entry.to_response()),
                None => {
                    return Err(format!(
                        "no cached fixture for record `{}` (hash {})",
                        prompt.record_key, key_hash
                    ))
                }
            }
        } else {
            transport.complete(&request).map_err(|e| e.to_string())
        };

        let response = match response {
            Ok(r) => r,
            Err(message) => {
                if attempt < max_attempts {
                    std::thread::sleep(backoff_delay(config.retry_backoff, attempt));
                    continue;
                }
                return Err(message);
            }
        };
        let latency_ms = if replaying {
            0
        } else {
            started.elapsed().as_millis() as u64
        };

        if let (Some(cache), false) = (cache, replaying) {
            cache
                .store(&CacheEntry {
                    key_hash: key_hash.clone(),
                    request: request.clone(),
                    response: response.content.clone(),
                    usage: response.usage,
                })
                .map_err(|e| e.to_string())?;
        }

        match parse_decision(&response.content, &config.include_word, &config.exclude_word) {
            Ok(decision) => {
                return Ok(ScreenOutcome {
                    record_key: prompt.record_key.clone(),
                    decision,
                    parse_failure: None,
                    raw_response: response.content,
                    prompt_tokens: response.usage.prompt_tokens,
                    completion_tokens: response.usage.completion_tokens,
                    latency_ms,
                    attempt_count: attempt,
                })
            }
            Err(failure) => {
                // a truncated or off-script answer may recover on retry,
                // but a replayed fixture never changes
                if !replaying && attempt < max_attempts {
                    std::thread::sleep(backoff_delay(config.retry_backoff, attempt));
                    continue;
                }
                return Ok(ScreenOutcome {
                    record_key: prompt.record_key.clone(),
                    decision: config.parse_fallback,
                    parse_failure: Some(failure.raw),
                    raw_response: response.content,
                    prompt_tokens: response.usage.prompt_tokens,
                    completion_tokens: response.usage.completion_tokens,
                    latency_ms,
                    attempt_count: attempt,
                });
            }
        }
    }
}

fn backoff_delay(base: Duration, attempt: u32) -> Duration {
    base * 2u32.saturating_pow(attempt.saturating_sub(1))
}
