use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::llm::{LlmError, UsageStats};

/// One accounted model call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub agent: String,
    /// `agent:iteration:attempt` label of the call.
    pub step: String,
    /// Tokens newly spent on this call; zero for cache hits unless the
    /// client is configured to count them.
    pub usage: UsageStats,
    pub latency: Duration,
    pub cache_hit: bool,
}

/// Aggregate over a run or an agent within a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub usage: UsageStats,
    pub wall: Duration,
    pub calls: u64,
    pub cache_hits: u64,
}

impl LedgerTotals {
    fn absorb(&mut self, entry: &LedgerEntry) {
        self.usage = self.usage + entry.usage;
        self.wall += entry.latency;
        self.calls += 1;
        if entry.cache_hit {
            self.cache_hits += 1;
        }
    }
}

/// Thread-safe token and latency accounting, grouped by run identifier.
///
/// A run exists once it is opened or once its first entry lands; totals for
/// a run nobody ever mentioned are an error rather than a silent zero, so a
/// typo in a run id cannot masquerade as a free run.
#[derive(Default)]
pub struct UsageLedger {
    runs: Mutex<BTreeMap<String, Vec<LedgerEntry>>>,
}

impl UsageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a run, so that a run with zero calls still reports totals.
    pub fn open_run(&self, run: &str) {
        self.runs.lock().expect("ledger lock").entry(run.to_string()).or_default();
    }

    pub fn record(&self, run: &str, entry: LedgerEntry) {
        self.runs
            .lock()
            .expect("ledger lock")
            .entry(run.to_string())
            .or_default()
            .push(entry);
    }

    pub fn totals(&self, run: &str) -> Result<LedgerTotals, LlmError> {
        let runs = self.runs.lock().expect("ledger lock");
        let entries = runs.get(run).ok_or_else(|| LlmError::UnknownRun(run.to_string()))?;
        let mut totals = LedgerTotals::default();
        for entry in entries {
            totals.absorb(entry);
        }
        Ok(totals)
    }

    pub fn totals_by_agent(&self, run: &str) -> Result<BTreeMap<String, LedgerTotals>, LlmError> {
        let runs = self.runs.lock().expect("ledger lock");
        let entries = runs.get(run).ok_or_else(|| LlmError::UnknownRun(run.to_string()))?;
        let mut by_agent: BTreeMap<String, LedgerTotals> = BTreeMap::new();
        for entry in entries {
            by_agent.entry(entry.agent.clone()).or_default().absorb(entry);
        }
        Ok(by_agent)
    }

    pub fn entries(&self, run: &str) -> Result<Vec<LedgerEntry>, LlmError> {
        let runs = self.runs.lock().expect("ledger lock");
        runs.get(run)
            .cloned()
            .ok_or_else(|| LlmError::UnknownRun(run.to_string()))
    }

    pub fn run_ids(&self) -> Vec<String> {
        self.runs.lock().expect("ledger lock").keys().cloned().collect()
    }
}
