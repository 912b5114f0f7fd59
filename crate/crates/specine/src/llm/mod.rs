//! Chat-model access: a backend trait with HTTP, scripted, and record/replay
//! implementations, plus per-run usage accounting.

mod backend;
mod cache;
mod client;
mod ledger;

pub use backend::{http_env, CallRecord, ChatBackend, HttpBackend, ScriptedBackend, ScriptedScenario};
pub use cache::{CachingBackend, ReplayCache};
pub use client::LlmClient;
pub use ledger::{LedgerEntry, LedgerTotals, UsageLedger};

use std::ops::Add;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variables configuring the HTTP backend.
pub const ENV_API_BASE: &str = "SPECINE_API_BASE";
pub const ENV_API_KEY: &str = "SPECINE_API_KEY";
pub const ENV_MODEL: &str = "SPECINE_MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

/// Decoding parameters attached to every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub model_name: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub request_timeout: Duration,
    /// Transport retries after the first attempt; 2 means up to 3 attempts.
    pub max_retries: u32,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            model_name: "default".into(),
            max_tokens: 1024,
            temperature: 0.8,
            request_timeout: Duration::from_secs(60),
            max_retries: 3,
        }
    }
}

/// Identifies one model call within a run: which agent asked, during which
/// pipeline iteration, on which parse attempt (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepKey {
    pub agent: String,
    pub iteration: u32,
    pub attempt: u32,
}

impl StepKey {
    pub fn new(agent: impl Into<String>, iteration: u32, attempt: u32) -> Self {
        StepKey { agent: agent.into(), iteration, attempt }
    }

    /// Stable `agent:iteration:attempt` form used in ledgers and traces.
    pub fn label(&self) -> String {
        format!("{}:{}:{}", self.agent, self.iteration, self.attempt)
    }

    /// The scenario lookup key, which ignores the attempt by default.
    pub fn scenario_key(&self) -> String {
        format!("{}:{}", self.agent, self.iteration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: Option<String>,
    pub messages: Vec<ChatMessage>,
    pub config: GenerationConfig,
    pub step: StepKey,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("no messages".into()));
        }
        if self.messages.last().map(|m| m.role) != Some(Role::User) {
            return Err(LlmError::InvalidRequest("last message must be from the user".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageStats {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl UsageStats {
    pub fn new(prompt_tokens: u64, completion_tokens: u64) -> Self {
        UsageStats { prompt_tokens, completion_tokens }
    }

    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

impl Add for UsageStats {
    type Output = UsageStats;

    fn add(self, other: UsageStats) -> UsageStats {
        UsageStats {
            prompt_tokens: self.prompt_tokens + other.prompt_tokens,
            completion_tokens: self.completion_tokens + other.completion_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: UsageStats,
    pub latency: Duration,
    /// Name of the backend that produced the content.
    pub backend: String,
    /// True when the content came from the replay cache rather than a
    /// transport call.
    pub cached: bool,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// One failed transport attempt; retried internally and only surfaced
    /// wrapped in [`LlmError::BackendUnavailable`].
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
    #[error("api rejected the request with status {status}: {detail}")]
    Api { status: u16, detail: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no scripted response for step {0}")]
    ScriptMiss(String),
    #[error("no cached response for request {0}")]
    CacheMiss(String),
    #[error("replay cache corrupt at byte {offset}: {detail}")]
    CacheCorrupt { offset: u64, detail: String },
    #[error("unknown run '{0}'")]
    UnknownRun(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
