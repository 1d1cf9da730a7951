//! Record/replay cache for deterministic offline screening.
//!
//! The cache file is append-only JSONL: one `{key_hash, request,
//! response, usage}` object per line. Entries are keyed by a SHA-256 of
//! (model, temperature, max_tokens, prompt text), so fixtures are
//! insensitive to file ordering; when a hash repeats, the last entry
//! wins, matching the final response of a retried recording.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::llm::transport::{ChatRequest, ChatResponse, TokenUsage};
use crate::llm::LlmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// Every live request/response pair is appended to the cache file.
    Record,
    /// Responses come from the cache only; no network calls happen.
    Replay,
}

/// One recorded request/response pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key_hash: String,
    pub request: ChatRequest,
    pub response: String,
    pub usage: TokenUsage,
}

impl CacheEntry {
    pub fn to_response(&self) -> ChatResponse {
        ChatResponse {
            content: self.response.clone(),
            usage: self.usage,
        }
    }
}

/// Loaded cache plus, in record mode, the append-only writer. Reads are
/// lock-free after load; writes serialize behind one mutex.
pub struct ReplayCache {
    mode: CacheMode,
    path: PathBuf,
    entries: HashMap<String, CacheEntry>,
    writer: Option<Mutex<BufWriter<File>>>,
}

impl ReplayCache {
    /// Open a cache for recording; the file is created if absent and
    /// new entries are appended.
    pub fn record(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(ReplayCache {
            mode: CacheMode::Record,
            path,
            entries: HashMap::new(),
            writer: Some(Mutex::new(BufWriter::new(file))),
        })
    }

    /// Load a fixture file for replay.
    pub fn replay(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path)?;
        let reader = BufReader::new(file);
        let mut entries = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| {
                Error::Cache(format!("{}:{}: {e}", path.display(), idx + 1))
            })?;
            entries.insert(entry.key_hash.clone(), entry);
        }
        Ok(ReplayCache {
            mode: CacheMode::Replay,
            path,
            entries,
            writer: None,
        })
    }

    pub fn mode(&self) -> CacheMode {
        self.mode
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Hash identifying one request under one model contract.
    pub fn key_hash(config: &LlmConfig, prompt: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(config.model_name.as_bytes());
        hasher.update([0x1f]);
        hasher.update(config.temperature.to_le_bytes());
        hasher.update([0x1f]);
        hasher.update(config.max_tokens.to_le_bytes());
        hasher.update([0x1f]);
        hasher.update(prompt.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn fetch(&self, key_hash: &str) -> Option<&CacheEntry> {
        self.entries.get(key_hash)
    }

    /// Append an entry to the cache file (record mode only).
    pub fn store(&self, entry: &CacheEntry) -> Result<()> {
        let writer = self.writer.as_ref().ok_or_else(|| {
            Error::Cache("cache opened for replay cannot record new entries".into())
        })?;
        let line = serde_json::to_string(entry)?;
        let mut guard = writer.lock().expect("cache writer poisoned");
        guard.write_all(line.as_bytes())?;
        guard.write_all(b"\n")?;
        guard.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::transport::ChatMessage;

    fn entry(config: &LlmConfig, prompt: &str, answer: &str) -> CacheEntry {
        CacheEntry {
            key_hash: ReplayCache::key_hash(config, prompt),
            request: ChatRequest {
                model: config.model_name.clone(),
                messages: vec![ChatMessage {
                    role: "user".into(),
                    content: prompt.into(),
                }],
                temperature: config.temperature,
                max_tokens: config.max_tokens,
            },
            response: answer.into(),
            usage: TokenUsage {
                prompt_tokens: 10,
                completion_tokens: 1,
            },
        }
    }

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let config = LlmConfig::default();

        let cache = ReplayCache::record(&path).unwrap();
        cache.store(&entry(&config, "p1", "Include")).unwrap();
        cache.store(&entry(&config, "p2", "Exclude")).unwrap();
        drop(cache);

        let cache = ReplayCache::replay(&path).unwrap();
        assert_eq!(cache.len(), 2);
        let hit = cache
            .fetch(&ReplayCache::key_hash(&config, "p1"))
            .expect("p1 cached");
        assert_eq!(hit.response, "Include");
    }

    #[test]
    fn later_entries_override_earlier_ones() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let config = LlmConfig::default();

        let cache = ReplayCache::record(&path).unwrap();
        cache.store(&entry(&config, "p1", "garbled")).unwrap();
        cache.store(&entry(&config, "p1", "Include")).unwrap();
        drop(cache);

        let cache = ReplayCache::replay(&path).unwrap();
        assert_eq!(cache.len(), 1);
        let hit = cache.fetch(&ReplayCache::key_hash(&config, "p1")).unwrap();
        assert_eq!(hit.response, "Include");
    }

    #[test]
    fn key_hash_depends_on_model_contract() {
        let config = LlmConfig::default();
        let other = LlmConfig {
            max_tokens: 2,
            ..LlmConfig::default()
        };
        assert_ne!(
            ReplayCache::key_hash(&config, "p"),
            ReplayCache::key_hash(&other, "p")
        );
        assert_eq!(
            ReplayCache::key_hash(&config, "p"),
            ReplayCache::key_hash(&config, "p")
        );
    }

    #[test]
    fn replay_cache_refuses_to_store() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        std::fs::write(&path, "").unwrap();
        let cache = ReplayCache::replay(&path).unwrap();
        assert!(cache.store(&entry(&LlmConfig::default(), "p", "x")).is_err());
    }
}
