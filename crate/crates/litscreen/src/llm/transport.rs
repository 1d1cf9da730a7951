//! Chat-completion wire types and transports.
//!
//! The wire protocol is the common chat-completions shape: POST a JSON
//! body `{model, messages, temperature, max_tokens}` and read the answer
//! from `choices[0].message.content` plus the `usage` token fields.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::LlmConfig;
use crate::prompt::estimate_tokens;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Request body sent to the endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn single_user(config: &LlmConfig, prompt: &str) -> Self {
        ChatRequest {
            model: config.model_name.clone(),
            messages: vec![ChatMessage {
                role: "user".into(),
                content: prompt.into(),
            }],
            temperature: config.temperature,
            max_tokens: config.max_tokens,
        }
    }

    /// Content of the last user message, if any.
    pub fn user_content(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == "user")
            .map(|m| m.content.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Parsed endpoint answer.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("API key environment variable `{0}` is not set")]
    MissingApiKey(String),

    #[error("request failed: {0}")]
    Request(String),

    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },

    #[error("malformed response: {0}")]
    MalformedResponse(String),

    #[error("no scripted response for prompt starting `{0}`")]
    NoScript(String),
}

/// A synchronous chat-completion backend. Implementations must be
/// shareable across the request worker threads.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

/// HTTP transport for any chat-completions-compatible endpoint. The API
/// key is read from the environment variable named in the config.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
}

impl HttpTransport {
    pub fn from_config(config: &LlmConfig) -> Result<Self, TransportError> {
        let api_key = std::env::var(&config.api_key_env)
            .map_err(|_| TransportError::MissingApiKey(config.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.request_timeout)
            .build()
            .map_err(|e| TransportError::Request(e.to_string()))?;
        Ok(HttpTransport {
            client,
            endpoint: config.endpoint.clone(),
            api_key,
        })
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(request)
            .send()
            .map_err(|e| TransportError::Request(e.to_string()))?;

        let status = response.status();
        let body = response
            .text()
            .map_err(|e| TransportError::Request(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Status {
                status: status.as_u16(),
                body,
            });
        }
        parse_chat_body(&body)
    }
}

pub(crate) fn parse_chat_body(body: &str) -> Result<ChatResponse, TransportError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| TransportError::MalformedResponse(e.to_string()))?;
    let content = value["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| {
            TransportError::MalformedResponse("missing choices[0].message.content".into())
        })?
        .to_string();
    let usage = TokenUsage {
        prompt_tokens: value["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
        completion_tokens: value["usage"]["completion_tokens"].as_u64().unwrap_or(0),
    };
    Ok(ChatResponse { content, usage })
}

/// Offline transport answering from a fixed prompt → response map.
/// Useful for demos and deterministic tests; usage counts come from the
/// four-characters-per-token heuristic.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    responses: HashMap<String, String>,
    fallback: Option<String>,
    /// Artificial per-request delay, for exercising concurrency.
    pub delay: Option<Duration>,
}

impl ScriptedTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn respond(mut self, prompt: impl Into<String>, answer: impl Into<String>) -> Self {
        self.responses.insert(prompt.into(), answer.into());
        self
    }

    /// Answer used when no exact prompt match exists.
    pub fn with_fallback(mut self, answer: impl Into<String>) -> Self {
        self.fallback = Some(answer.into());
        self
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }
        let prompt = request.user_content().unwrap_or("");
        let content = self
            .responses
            .get(prompt)
            .or(self.fallback.as_ref())
            .ok_or_else(|| {
                TransportError::NoScript(prompt.chars().take(40).collect::<String>())
            })?
            .clone();
        Ok(ChatResponse {
            usage: TokenUsage {
                prompt_tokens: estimate_tokens(prompt) as u64,
                completion_tokens: estimate_tokens(&content) as u64,
            },
            content,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_standard_response_body() {
        let body = r#"{
            "choices": [{"message": {"role": "assistant", "content": "Include"}}],
            "usage": {"prompt_tokens": 342, "completion_tokens": 1}
        }"#;
        let response = parse_chat_body(body).unwrap();
        assert_eq!(response.content, "Include");
        assert_eq!(response.usage.prompt_tokens, 342);
        assert_eq!(response.usage.completion_tokens, 1);
    }

    #[test]
    fn missing_content_is_malformed() {
        let body = r#"{"choices": []}"#;
        assert!(matches!(
            parse_chat_body(body),
            Err(TransportError::MalformedResponse(_))
        ));
    }

    #[test]
    fn scripted_transport_matches_on_prompt() {
        let transport = ScriptedTransport::new()
            .respond("p1", "Include")
            .with_fallback("Exclude");
        let config = LlmConfig::default();
        let r1 = transport
            .complete(&ChatRequest::single_user(&config, "p1"))
            .unwrap();
        assert_eq!(r1.content, "Include");
        let r2 = transport
            .complete(&ChatRequest::single_user(&config, "unknown"))
            .unwrap();
        assert_eq!(r2.content, "Exclude");
    }
}
