use std::sync::Arc;
use std::time::Duration;

use crate::llm::{ChatBackend, ChatRequest, ChatResponse, LedgerEntry, LlmError, UsageLedger, UsageStats};

/// Front door for model calls: validates requests, retries transport
/// failures with exponential backoff, and books every completed call into
/// the run ledger.
pub struct LlmClient {
    backend: Arc<dyn ChatBackend>,
    ledger: Arc<UsageLedger>,
    run_id: String,
    retry_base_delay: Duration,
    count_cached_tokens: bool,
}

impl LlmClient {
    pub fn new(backend: Arc<dyn ChatBackend>, ledger: Arc<UsageLedger>, run_id: impl Into<String>) -> Self {
        let run_id = run_id.into();
        ledger.open_run(&run_id);
        LlmClient {
            backend,
            ledger,
            run_id,
            retry_base_delay: Duration::from_millis(500),
            count_cached_tokens: false,
        }
    }

    /// Shrinks or stretches the backoff ladder; mostly for tests.
    pub fn with_retry_base_delay(mut self, delay: Duration) -> Self {
        self.retry_base_delay = delay;
        self
    }

    /// Makes cache hits count their recorded tokens instead of zero.
    pub fn with_cached_tokens_counted(mut self, yes: bool) -> Self {
        self.count_cached_tokens = yes;
        self
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn ledger(&self) -> &Arc<UsageLedger> {
        &self.ledger
    }

    /// Sends one request. Transport failures are retried up to
    /// `config.max_retries` extra times, so `max_retries = 2` means at most
    /// three attempts before `BackendUnavailable`. Non-transport errors are
    /// returned as they are.
    pub fn complete(&self, agent: &str, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let max_retries = request.config.max_retries;
        let mut attempt = 0;
        loop {
            match self.backend.complete(request) {
                Ok(response) => {
                    self.book(agent, request, &response);
                    return Ok(response);
                }
                Err(LlmError::Transport(detail)) => {
                    if attempt >= max_retries {
                        return Err(LlmError::BackendUnavailable { attempts: attempt + 1, last: detail });
                    }
                    std::thread::sleep(self.retry_base_delay * 2u32.saturating_pow(attempt));
                    attempt += 1;
                }
                Err(other) => return Err(other),
            }
        }
    }

    fn book(&self, agent: &str, request: &ChatRequest, response: &ChatResponse) {
        let usage = if response.cached && !self.count_cached_tokens {
            UsageStats::default()
        } else {
            response.usage
        };
        self.ledger.record(
            &self.run_id,
            LedgerEntry {
                agent: agent.to_string(),
                step: request.step.label(),
                usage,
                latency: response.latency,
                cache_hit: response.cached,
            },
        );
    }
}
