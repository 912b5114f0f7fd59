use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Candidate, HierarchicalScore, TestCase};
use crate::pipeline::{FeedbackMode, IterationRecord, PipelineConfig, PipelineResult};

/// A full run record for one problem, written next to the run's reports.
///
/// Deliberately carries no timing or token counts: two runs that made the
/// same decisions produce byte-identical trace files, which is what makes
/// replayed runs checkable with a plain file comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub problem_id: String,
    pub config: PipelineConfig,
    /// Digest of the prompt templates the run used.
    pub templates_digest: String,
    pub gate_passed: bool,
    pub initial_candidate: Option<Candidate>,
    pub initial_score: Option<HierarchicalScore>,
    pub generated_tests: Vec<TestCase>,
    pub iterations: Vec<IterationRecord>,
    pub best_candidate: Option<Candidate>,
    pub best_score: Option<HierarchicalScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl TraceFile {
    pub fn from_result(result: &PipelineResult, config: &PipelineConfig, templates_digest: &str) -> Self {
        TraceFile {
            problem_id: result.problem_id.clone(),
            config: config.clone(),
            templates_digest: templates_digest.to_string(),
            gate_passed: result.gate_passed,
            initial_candidate: result.initial_candidate.clone(),
            initial_score: result.initial_score,
            generated_tests: result.generated_tests.clone(),
            iterations: result.trace.clone(),
            best_candidate: result.best_candidate.clone(),
            best_score: result.best_score,
            error: result.error.clone(),
            warnings: result.warnings.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot access trace file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trace at line {line}, column {column}: {detail}")]
    Malformed {
        line: usize,
        column: usize,
        detail: String,
    },
}

/// File name a problem's trace is stored under, safe for any problem id.
pub fn trace_file_name(problem_id: &str) -> String {
    let safe: String = problem_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let stem = if safe.is_empty() { "problem".to_string() } else { safe };
    format!("{stem}.trace.json")
}

/// Writes a trace as pretty-printed JSON with a trailing newline. Equal
/// traces always produce equal bytes.
pub fn write_trace(path: &Path, trace: &TraceFile) -> Result<(), TraceError> {
    let body = serde_json::to_string_pretty(trace).expect("trace serialization cannot fail");
    let mut file = std::fs::File::create(path)?;
    file.write_all(body.as_bytes())?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<TraceFile, TraceError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| TraceError::Malformed {
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })
}

/// Renders a trace as a human-readable timeline, one line per event.
pub fn render_trace(trace: &TraceFile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "problem {} [variant {}, seed {}]\n",
        trace.problem_id,
        trace.config.variant.tag(),
        trace.config.seed
    ));
    out.push_str(&format!("templates {}\n", trace.templates_digest));
    if let Some(error) = &trace.error {
        out.push_str(&format!("error: {error}\n"));
    }
    match (&trace.initial_candidate, &trace.initial_score) {
        (Some(_), Some(score)) => {
            out.push_str(&format!(
                "identification: {} generated tests, initial score {score}\n",
                trace.generated_tests.len()
            ));
        }
        _ => out.push_str("identification: no scored candidate\n"),
    }
    if trace.initial_score.is_some() {
        if trace.gate_passed {
            out.push_str("gate passed: initial program accepted as is\n");
        } else {
            out.push_str("gate failed: entering alignment\n");
        }
    }
    for record in &trace.iterations {
        let mode = match record.feedback_mode {
            FeedbackMode::Lift => "lift",
            FeedbackMode::TestFeedback => "test feedback",
            FeedbackMode::Fixed => "fixed",
        };
        if let Some(failure) = &record.failure {
            out.push_str(&format!("iter {} [{mode}] failed: {failure}\n", record.iteration));
            continue;
        }
        let rules: Vec<&str> = record.proposed.iter().map(|i| i.rule.display_name()).collect();
        let score = record
            .score
            .map(|s| s.to_string())
            .unwrap_or_else(|| "unscored".to_string());
        let outcome = if record.retained { "retained" } else { "discarded" };
        out.push_str(&format!(
            "iter {} [{mode}] proposed {} -> score {score}, {outcome}\n",
            record.iteration,
            rules.join(" + ")
        ));
    }
    match (&trace.best_candidate, &trace.best_score) {
        (Some(candidate), Some(score)) => {
            out.push_str(&format!(
                "best: score {score} from iteration {}\n",
                candidate.iteration
            ));
        }
        _ => out.push_str("best: none\n"),
    }
    for warning in &trace.warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    out
}
