use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{Agents, PromptTemplates};
use crate::core::{
    AlignedIngredient, AlignedSpec, AlignmentRule, Candidate, HierarchicalScore, Problem, TestCase,
};
use crate::llm::{ChatBackend, LlmClient, UsageLedger, UsageStats};
use crate::pipeline::{FeedbackMode, IterationRecord, PipelineConfig, PipelineResult, Variant};
use crate::sandbox::{pass_report, ExecutionLimits, LangConfig, PassReport, SandboxError, Verdict};

/// Scores a candidate over a test set. The pipeline talks to the sandbox
/// through this trait so search behaviour can be tested against planned
/// outcomes without spawning interpreters.
pub trait Judge: Send + Sync {
    fn pass_report(
        &self,
        code: &str,
        lang: &LangConfig,
        tests: &[TestCase],
        limits: &ExecutionLimits,
    ) -> Result<PassReport, SandboxError>;
}

/// The real judge: runs code in the sandbox.
pub struct SandboxJudge;

impl Judge for SandboxJudge {
    fn pass_report(
        &self,
        code: &str,
        lang: &LangConfig,
        tests: &[TestCase],
        limits: &ExecutionLimits,
    ) -> Result<PassReport, SandboxError> {
        pass_report(code, lang, tests, limits)
    }
}

/// Both halves of a candidate's score, with the per-test reports behind
/// them. The public half is primary; the generated half covers tester
/// tests plus any retained edge tests.
#[derive(Debug, Clone)]
pub struct ScoreReports {
    pub public: PassReport,
    pub generated: PassReport,
    pub score: HierarchicalScore,
}

/// Runs problems end to end: identification, then greedy alignment.
pub struct Pipeline {
    backend: Arc<dyn ChatBackend>,
    ledger: Arc<UsageLedger>,
    templates: Arc<PromptTemplates>,
    judge: Arc<dyn Judge>,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(backend: Arc<dyn ChatBackend>, config: PipelineConfig) -> Self {
        Pipeline {
            backend,
            ledger: Arc::new(UsageLedger::new()),
            templates: Arc::new(PromptTemplates::builtin()),
            judge: Arc::new(SandboxJudge),
            config,
        }
    }

    pub fn with_templates(mut self, templates: Arc<PromptTemplates>) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_judge(mut self, judge: Arc<dyn Judge>) -> Self {
        self.judge = judge;
        self
    }

    pub fn with_ledger(mut self, ledger: Arc<UsageLedger>) -> Self {
        self.ledger = ledger;
        self
    }

    pub fn ledger(&self) -> &Arc<UsageLedger> {
        &self.ledger
    }

    pub fn templates(&self) -> &Arc<PromptTemplates> {
        &self.templates
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Runs one problem. Never panics on agent or sandbox trouble: a run
    /// that cannot produce any candidate comes back with `error` set, and
    /// an iteration that dies is recorded and skipped.
    pub fn run_problem(&self, problem: &Problem) -> PipelineResult {
        let start = Instant::now();
        let mut result = PipelineResult {
            problem_id: problem.id.clone(),
            gate_passed: false,
            initial_candidate: None,
            initial_score: None,
            best_candidate: None,
            best_score: None,
            generated_tests: Vec::new(),
            trace: Vec::new(),
            usage: UsageStats::default(),
            wall_time: std::time::Duration::ZERO,
            error: None,
            warnings: Vec::new(),
        };

        if let Err(e) = self.config.validate() {
            result.error = Some(format!("invalid configuration: {e}"));
            result.wall_time = start.elapsed();
            return result;
        }
        if let Err(e) = problem.validate() {
            result.error = Some(format!("invalid problem: {e}"));
            result.wall_time = start.elapsed();
            return result;
        }

        let client = LlmClient::new(self.backend.clone(), self.ledger.clone(), problem.id.clone())
            .with_cached_tokens_counted(true);
        let agents = Agents::new(
            client,
            self.templates.clone(),
            self.config.generation.clone(),
            self.config.lang.clone(),
        )
        .with_max_parse_attempts(self.config.max_parse_attempts);

        self.drive(problem, &agents, &mut result);

        if let Ok(totals) = self.ledger.totals(&problem.id) {
            result.usage = totals.usage;
        }
        result.wall_time = start.elapsed();
        result
    }

    fn drive(&self, problem: &Problem, agents: &Agents, result: &mut PipelineResult) {
        let variant = self.config.variant;
        let spec_state = AlignedSpec::new(problem.spec_text.clone());

        let initial_outcome = agents.coder_generate(&spec_state.render(), 0);
        result.warnings.extend(initial_outcome.warnings.iter().cloned());
        let initial = match initial_outcome.result {
            Ok(candidate) => candidate,
            Err(failure) => {
                result.error = Some(format!("identification failed: {failure}"));
                return;
            }
        };
        result.initial_candidate = Some(initial.clone());

        if variant != Variant::WoTester {
            let tester_outcome = agents.tester_generate(&problem.spec_text, self.config.tester_k);
            result.warnings.extend(tester_outcome.warnings.iter().cloned());
            match tester_outcome.result {
                Ok(tests) => result.generated_tests = tests,
                Err(failure) => {
                    result
                        .warnings
                        .push(format!("continuing without generated tests: {failure}"));
                }
            }
        }

        let public_used: &[TestCase] = if variant == Variant::WoPublicTests {
            &[]
        } else {
            &problem.public_tests
        };

        let initial_reports = match self.score(&initial, public_used, &result.generated_tests) {
            Ok(reports) => reports,
            Err(e) => {
                result.error = Some(format!("sandbox unavailable: {e}"));
                return;
            }
        };
        result.initial_score = Some(initial_reports.score);
        result.best_candidate = Some(initial.clone());
        result.best_score = Some(initial_reports.score);

        let combined_empty = public_used.is_empty() && result.generated_tests.is_empty();
        if combined_empty || initial_reports.score.is_perfect() {
            result.gate_passed = true;
            return;
        }

        self.align_loop(problem, agents, public_used, spec_state, initial, initial_reports, result);
    }

    #[allow(clippy::too_many_arguments)]
    fn align_loop(
        &self,
        problem: &Problem,
        agents: &Agents,
        public_used: &[TestCase],
        mut spec_state: AlignedSpec,
        initial: Candidate,
        initial_reports: ScoreReports,
        result: &mut PipelineResult,
    ) {
        let variant = self.config.variant;
        let mut best = initial;
        let mut best_reports = initial_reports;
        let mut edge_pool: Vec<TestCase> = Vec::new();
        let mut history: Vec<AlignmentRule> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(stable_seed(self.config.seed, &problem.id));

        for iteration in 1..=self.config.max_iterations {
            let mode = match variant {
                Variant::WoAligner => FeedbackMode::Fixed,
                Variant::TestFeedback => FeedbackMode::TestFeedback,
                _ => FeedbackMode::Lift,
            };
            let mut record = IterationRecord::empty(iteration, mode);

            let proposed = match self.propose(
                agents,
                problem,
                &spec_state,
                &best,
                &best_reports,
                public_used,
                &result.generated_tests,
                &history,
                iteration,
                &mut rng,
                &mut record,
            ) {
                Ok(ingredients) => ingredients,
                Err(failure) => {
                    record.failure = Some(failure);
                    result.trace.push(record);
                    continue;
                }
            };
            record.proposed = proposed.clone();

            let mut candidate_spec = spec_state.clone();
            for ingredient in &proposed {
                candidate_spec.upsert(ingredient.clone());
            }

            let coder_outcome = agents.coder_generate(&candidate_spec.render(), iteration);
            push_refs(&mut record.prompt_refs, "coder", iteration, coder_outcome.attempts);
            record.warnings.extend(coder_outcome.warnings.iter().cloned());
            let candidate = match coder_outcome.result {
                Ok(candidate) => candidate,
                Err(failure) => {
                    record.failure = Some(format!("coder failed: {failure}"));
                    result.trace.push(record);
                    continue;
                }
            };
            record.candidate = Some(candidate.clone());

            let steering = combine(&result.generated_tests, &edge_pool);
            let reports = match self.score(&candidate, public_used, &steering) {
                Ok(reports) => reports,
                Err(e) => {
                    record.failure = Some(format!("sandbox unavailable: {e}"));
                    result.trace.push(record);
                    continue;
                }
            };
            record.score = Some(reports.score);

            let retained = reports.score > best_reports.score;
            record.retained = retained;
            if retained {
                best = candidate;
                best_reports = reports;
                spec_state = candidate_spec;
                for ingredient in &proposed {
                    history.retain(|rule| *rule != ingredient.rule);
                    history.push(ingredient.rule);
                    edge_pool.extend(ingredient.edge_tests());
                }
                result.best_candidate = Some(best.clone());
                result.best_score = Some(best_reports.score);
                let perfect = best_reports.score.is_perfect();
                result.trace.push(record);
                if perfect {
                    break;
                }
            } else {
                result.trace.push(record);
            }
        }
    }

    /// Produces this iteration's amendment proposals, dispatching on the
    /// variant. Records prompt references and any lifted specification into
    /// the iteration record as it goes.
    #[allow(clippy::too_many_arguments)]
    fn propose(
        &self,
        agents: &Agents,
        problem: &Problem,
        spec_state: &AlignedSpec,
        best: &Candidate,
        best_reports: &ScoreReports,
        public_used: &[TestCase],
        generated_tests: &[TestCase],
        history: &[AlignmentRule],
        iteration: u32,
        rng: &mut ChaCha8Rng,
        record: &mut IterationRecord,
    ) -> Result<Vec<AlignedIngredient>, String> {
        let spec_text = spec_state.render();
        match self.config.variant {
            Variant::WoAligner => {
                let rules = self.templates.woa_rules();
                if rules.is_empty() {
                    return Err("no fixed amendments available".into());
                }
                let rule = rules[rng.random_range(0..rules.len())];
                let content = self
                    .templates
                    .woa_ingredient(rule, &problem.spec_text)
                    .expect("woa_rules listed a rule without a body");
                Ok(vec![AlignedIngredient::new(rule, content, iteration)])
            }
            Variant::TestFeedback => {
                let feedback = render_feedback(best_reports, public_used, generated_tests);
                let outcome = agents.aligner_align_on_feedback(&spec_text, &feedback, history, iteration);
                push_refs(&mut record.prompt_refs, "aligner", iteration, outcome.attempts);
                record.warnings.extend(outcome.warnings.iter().cloned());
                outcome.result.map_err(|f| format!("aligner failed: {f}"))
            }
            Variant::WoRules => {
                let lifted = self.lift(agents, best, iteration, record)?;
                let outcome = agents.aligner_align_freeform(&spec_text, &lifted, history, iteration);
                push_refs(&mut record.prompt_refs, "aligner", iteration, outcome.attempts);
                record.warnings.extend(outcome.warnings.iter().cloned());
                outcome.result.map_err(|f| format!("aligner failed: {f}"))
            }
            _ => {
                let lifted = self.lift(agents, best, iteration, record)?;
                let outcome = agents.aligner_align(&spec_text, &lifted, history, iteration);
                push_refs(&mut record.prompt_refs, "aligner", iteration, outcome.attempts);
                record.warnings.extend(outcome.warnings.iter().cloned());
                outcome.result.map_err(|f| format!("aligner failed: {f}"))
            }
        }
    }

    fn lift(
        &self,
        agents: &Agents,
        best: &Candidate,
        iteration: u32,
        record: &mut IterationRecord,
    ) -> Result<crate::dsl::RequirementDsl, String> {
        let outcome = agents.lifter_lift(&best.code, iteration);
        push_refs(&mut record.prompt_refs, "lifter", iteration, outcome.attempts);
        record.warnings.extend(outcome.warnings.iter().cloned());
        match outcome.result {
            Ok(lifted) => {
                record.lifted = Some(lifted.clone());
                Ok(lifted)
            }
            Err(failure) => Err(format!("lifter failed: {failure}")),
        }
    }

    fn score(
        &self,
        candidate: &Candidate,
        public: &[TestCase],
        steering: &[TestCase],
    ) -> Result<ScoreReports, SandboxError> {
        let public_report = if public.is_empty() {
            PassReport::empty()
        } else {
            self.judge
                .pass_report(&candidate.code, &self.config.lang, public, &self.config.limits)?
        };
        let generated_report = if steering.is_empty() {
            PassReport::empty()
        } else {
            self.judge
                .pass_report(&candidate.code, &self.config.lang, steering, &self.config.limits)?
        };
        let score = HierarchicalScore {
            primary: public_report.ratio,
            secondary: generated_report.ratio,
        };
        Ok(ScoreReports {
            public: public_report,
            generated: generated_report,
            score,
        })
    }

    /// Runs a batch, at most `parallelism` problems at a time. Results come
    /// back in input order regardless of completion order, and per-problem
    /// seeding keeps each result independent of batch composition.
    pub fn run_problems(&self, problems: &[Problem], parallelism: usize) -> Vec<PipelineResult> {
        let workers = parallelism.max(1).min(problems.len().max(1));
        if workers <= 1 {
            return problems.iter().map(|p| self.run_problem(p)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<PipelineResult>>> =
            problems.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::SeqCst);
                    if index >= problems.len() {
                        break;
                    }
                    let result = self.run_problem(&problems[index]);
                    *slots[index].lock().unwrap() = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker left a slot empty"))
            .collect()
    }
}

/// Per-problem seed stream: mixes the base seed with a digest of the
/// problem id, so the draws a problem sees do not depend on where it sits
/// in the batch or on what else is being run.
pub(crate) fn stable_seed(seed: u64, problem_id: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(problem_id.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(bytes)
}

fn push_refs(refs: &mut Vec<String>, agent: &str, iteration: u32, attempts: u32) {
    for attempt in 1..=attempts {
        refs.push(format!("{agent}:{iteration}:{attempt}"));
    }
}

fn combine(generated: &[TestCase], edge_pool: &[TestCase]) -> Vec<TestCase> {
    let mut combined = Vec::with_capacity(generated.len() + edge_pool.len());
    combined.extend_from_slice(generated);
    combined.extend_from_slice(edge_pool);
    combined
}

const FEEDBACK_SNIPPET_LIMIT: usize = 400;

/// Renders the best candidate's test outcomes for the aligner: every
/// failure in detail (input, expected, actual), passes as a single line.
/// Long texts are cut off so one pathological test cannot flood the prompt.
fn render_feedback(reports: &ScoreReports, public: &[TestCase], generated: &[TestCase]) -> String {
    let mut out = String::new();
    render_feedback_group(&mut out, "Public test", &reports.public, public);
    render_feedback_group(&mut out, "Generated test", &reports.generated, generated);
    if out.is_empty() {
        out.push_str("(no test results available)\n");
    }
    out
}

fn render_feedback_group(
    out: &mut String,
    label: &str,
    report: &PassReport,
    tests: &[TestCase],
) {
    for (index, result) in report.results.iter().enumerate() {
        let position = format!("{label} {} of {}", index + 1, report.results.len());
        if result.verdict == Verdict::Pass {
            out.push_str(&format!("{position}: passed\n"));
            continue;
        }
        let verdict = match result.verdict {
            Verdict::WrongOutput => "wrong output",
            Verdict::RuntimeError => "runtime error",
            Verdict::Timeout => "timed out",
            Verdict::OutputOverflow => "output limit exceeded",
            Verdict::Pass | Verdict::SetupError => "failed",
        };
        out.push_str(&format!("{position}: FAILED ({verdict})\n"));
        if let Some(test) = tests.get(index) {
            out.push_str(&format!("  input: {}\n", snippet(&test.input)));
            out.push_str(&format!("  expected: {}\n", snippet(&test.expected)));
        }
        out.push_str(&format!("  actual: {}\n", snippet(&result.stdout)));
        if result.verdict == Verdict::RuntimeError && !result.stderr.trim().is_empty() {
            out.push_str(&format!("  stderr: {}\n", snippet(&result.stderr)));
        }
    }
}

fn snippet(text: &str) -> String {
    let trimmed = text.trim_end();
    if trimmed.len() <= FEEDBACK_SNIPPET_LIMIT {
        return trimmed.to_string();
    }
    let mut cut = FEEDBACK_SNIPPET_LIMIT;
    while !trimmed.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}... [{} bytes total]", &trimmed[..cut], trimmed.len())
}
