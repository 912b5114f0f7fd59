//! The alignment pipeline: decide whether a problem statement was misread,
//! and if so, amend it greedily until the generated code stops failing.
//!
//! A run has two phases. Identification generates an initial program and a
//! set of model-written tests, then checks the program against the public
//! and generated tests together; if everything passes, the statement was
//! understood and the run ends there. Otherwise the alignment loop repeats
//! up to `max_iterations` times: recover the specification the current best
//! program implements (or, in one variant, its test failures), ask the
//! aligner for amendments, regenerate code from the amended statement, and
//! keep the amendments only when the new program scores strictly higher.

mod run;
mod trace;

pub(crate) use run::stable_seed;
pub use run::{Judge, Pipeline, SandboxJudge, ScoreReports};
pub use trace::{read_trace, render_trace, trace_file_name, write_trace, TraceError, TraceFile};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::core::{AlignedIngredient, Candidate, HierarchicalScore, TestCase};
use crate::dsl::RequirementDsl;
use crate::llm::{GenerationConfig, UsageStats};
use crate::sandbox::{ExecutionLimits, LangConfig};

/// Which parts of the pipeline are active. Every variant keeps the greedy
/// retention loop; they differ in what feeds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Everything on: public tests, tester, lifter, rule-based aligner.
    #[serde(rename = "full")]
    Full,
    /// Public test cases held back; only generated tests steer the search.
    #[serde(rename = "woPTC")]
    WoPublicTests,
    /// No tester; only public tests steer the search.
    #[serde(rename = "woT")]
    WoTester,
    /// Test failures are shown to the aligner instead of a lifted spec.
    #[serde(rename = "wTF")]
    TestFeedback,
    /// No aligner; rules are drawn at random with fixed amendment texts.
    #[serde(rename = "woA")]
    WoAligner,
    /// Aligner without the rule catalog; it amends the statement directly.
    #[serde(rename = "woAR")]
    WoRules,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Full,
        Variant::WoPublicTests,
        Variant::WoTester,
        Variant::TestFeedback,
        Variant::WoAligner,
        Variant::WoRules,
    ];

    /// Short tag used in paths, reports, and the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::WoPublicTests => "woPTC",
            Variant::WoTester => "woT",
            Variant::TestFeedback => "wTF",
            Variant::WoAligner => "woA",
            Variant::WoRules => "woAR",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.tag().to_ascii_lowercase() == folded)
            .ok_or_else(|| {
                format!(
                    "unknown variant '{s}', expected one of {}",
                    Variant::ALL.map(|v| v.tag()).join(", ")
                )
            })
    }
}

/// Everything that shapes a run. Serialized into manifests and traces so a
/// result can always be tied back to its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Maximum alignment iterations after a failed gate; at least 1.
    pub max_iterations: u32,
    pub variant: Variant,
    /// Tests requested from the tester during identification.
    pub tester_k: u32,
    /// Parse attempts per agent call.
    pub max_parse_attempts: u32,
    /// Base seed; each problem derives its own stream from it, so results
    /// do not depend on problem order.
    pub seed: u64,
    pub generation: GenerationConfig,
    pub limits: ExecutionLimits,
    pub lang: LangConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_iterations: 10,
            variant: Variant::Full,
            tester_k: 5,
            max_parse_attempts: 3,
            seed: 0,
            generation: GenerationConfig::default(),
            limits: ExecutionLimits::default(),
            lang: LangConfig::python3(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        if self.max_parse_attempts == 0 {
            return Err("max_parse_attempts must be at least 1".into());
        }
        Ok(())
    }
}

/// What the aligner was shown in an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackMode {
    /// The specification lifted from the best program so far.
    Lift,
    /// The best program's test failures.
    TestFeedback,
    /// No model feedback; a fixed amendment was drawn at random.
    Fixed,
}

/// One iteration of the alignment loop, retained or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based loop position.
    pub iteration: u32,
    pub feedback_mode: FeedbackMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifted: Option<RequirementDsl>,
    pub proposed: Vec<AlignedIngredient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<HierarchicalScore>,
    pub retained: bool,
    /// Set when the iteration died before producing a scored candidate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// `agent:iteration:attempt` labels of the model calls made.
    pub prompt_refs: Vec<String>,
    pub warnings: Vec<String>,
}

impl IterationRecord {
    fn empty(iteration: u32, feedback_mode: FeedbackMode) -> Self {
        IterationRecord {
            iteration,
            feedback_mode,
            lifted: None,
            proposed: Vec::new(),
            candidate: None,
            score: None,
            retained: false,
            failure: None,
            prompt_refs: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// Outcome of one problem. `error` is set when the run could not produce
/// any candidate (coder failure during identification, broken interpreter,
/// invalid problem); the trace then holds whatever happened before that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub problem_id: String,
    /// True when the initial program already passed every available test;
    /// implies an empty trace.
    pub gate_passed: bool,
    pub initial_candidate: Option<Candidate>,
    pub initial_score: Option<HierarchicalScore>,
    pub best_candidate: Option<Candidate>,
    pub best_score: Option<HierarchicalScore>,
    /// Tests the tester wrote during identification; kept so their quality
    /// can be audited against reference solutions afterwards.
    pub generated_tests: Vec<TestCase>,
    pub trace: Vec<IterationRecord>,
    pub usage: UsageStats,
    pub wall_time: std::time::Duration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
}
