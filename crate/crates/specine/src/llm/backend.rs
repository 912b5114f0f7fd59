use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::llm::{
    ChatMessage, ChatRequest, ChatResponse, LlmError, Role, UsageStats, ENV_API_BASE, ENV_API_KEY,
};

/// A completion provider. Implementations must be safe to share across
/// worker threads.
pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

/// A canned conversation: responses keyed by `agent:iteration`, one entry
/// per parse attempt. Attempts past the end of the list repeat the last
/// entry, so a single response serves any number of retries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedScenario {
    pub scripts: BTreeMap<String, Vec<String>>,
}

impl ScriptedScenario {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the responses for one `agent:iteration` step.
    pub fn script<I, S>(mut self, agent: &str, iteration: u32, responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scripts.insert(
            format!("{agent}:{iteration}"),
            responses.into_iter().map(Into::into).collect(),
        );
        self
    }

    pub fn respond(&self, scenario_key: &str, attempt: u32) -> Option<&str> {
        let responses = self.scripts.get(scenario_key)?;
        if responses.is_empty() {
            return None;
        }
        let index = (attempt.max(1) as usize - 1).min(responses.len() - 1);
        Some(&responses[index])
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(format!("scenario file: {e}")))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), LlmError> {
        let text = serde_json::to_string_pretty(self).expect("scenario serializes");
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// One call as seen by a scripted backend, kept for assertions about what
/// each agent was actually shown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub step: String,
    pub system: Option<String>,
    pub messages: Vec<ChatMessage>,
    pub response: String,
}

impl CallRecord {
    /// Full prompt text, system part included, for containment checks.
    pub fn prompt_text(&self) -> String {
        let mut out = self.system.clone().unwrap_or_default();
        for message in &self.messages {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&message.content);
        }
        out
    }
}

/// Deterministic backend that answers from a [`ScriptedScenario`] and logs
/// every call. Token usage is a stable word count of the texts involved, so
/// repeated runs report identical numbers.
pub struct ScriptedBackend {
    scenario: ScriptedScenario,
    transcript: Mutex<Vec<CallRecord>>,
}

impl ScriptedBackend {
    pub fn new(scenario: ScriptedScenario) -> Self {
        ScriptedBackend { scenario, transcript: Mutex::new(Vec::new()) }
    }

    pub fn transcript(&self) -> Vec<CallRecord> {
        self.transcript.lock().expect("transcript lock").clone()
    }
}

fn word_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

impl ChatBackend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let key = request.step.scenario_key();
        let content = self
            .scenario
            .respond(&key, request.step.attempt)
            .ok_or_else(|| LlmError::ScriptMiss(request.step.label()))?
            .to_string();
        let prompt_tokens = request.system.as_deref().map(word_count).unwrap_or(0)
            + request.messages.iter().map(|m| word_count(&m.content)).sum::<u64>();
        let record = CallRecord {
            step: request.step.label(),
            system: request.system.clone(),
            messages: request.messages.clone(),
            response: content.clone(),
        };
        self.transcript.lock().expect("transcript lock").push(record);
        Ok(ChatResponse {
            usage: UsageStats::new(prompt_tokens, word_count(&content)),
            content,
            latency: Duration::ZERO,
            backend: "scripted".into(),
            cached: false,
        })
    }
}

/// Reads the HTTP backend settings from the environment.
///
/// Returns `(base_url, api_key)`; the key may be empty for local servers.
pub fn http_env() -> Result<(String, String), LlmError> {
    let base = std::env::var(ENV_API_BASE)
        .map_err(|_| LlmError::InvalidRequest(format!("{ENV_API_BASE} is not set")))?;
    let key = std::env::var(ENV_API_KEY).unwrap_or_default();
    Ok((base, key))
}

/// Backend speaking the common chat-completions wire format over HTTP.
pub struct HttpBackend {
    base_url: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        HttpBackend {
            base_url: base_url.into(),
            api_key: api_key.into(),
            http: reqwest::blocking::Client::new(),
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let (base, key) = http_env()?;
        Ok(Self::new(base, key))
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl ChatBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let mut messages = Vec::with_capacity(request.messages.len() + 1);
        if let Some(system) = request.system.as_deref() {
            messages.push(WireMessage { role: "system", content: system });
        }
        for message in &request.messages {
            messages.push(WireMessage {
                role: match message.role {
                    Role::User => "user",
                    Role::Assistant => "assistant",
                },
                content: &message.content,
            });
        }
        let body = WireRequest {
            model: &request.config.model_name,
            messages,
            max_tokens: request.config.max_tokens,
            temperature: request.config.temperature,
        };

        let started = Instant::now();
        let mut http_request = self
            .http
            .post(self.endpoint())
            .timeout(request.config.request_timeout)
            .json(&body);
        if !self.api_key.is_empty() {
            http_request = http_request.bearer_auth(&self.api_key);
        }
        let response = http_request.send().map_err(|e| LlmError::Transport(e.to_string()))?;

        let status = response.status();
        let text = response.text().map_err(|e| LlmError::Transport(e.to_string()))?;
        if !status.is_success() {
            let retryable = status.as_u16() == 408 || status.as_u16() == 429 || status.is_server_error();
            let detail = format!("status {status}: {}", text.chars().take(200).collect::<String>());
            return if retryable {
                Err(LlmError::Transport(detail))
            } else {
                Err(LlmError::Api { status: status.as_u16(), detail })
            };
        }

        let wire: WireResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        let content = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::MalformedResponse("response carries no message content".into()))?;
        let usage = wire.usage.unwrap_or_default();
        Ok(ChatResponse {
            content,
            usage: UsageStats::new(usage.prompt_tokens, usage.completion_tokens),
            latency: started.elapsed(),
            backend: "http".into(),
            cached: false,
        })
    }
}
