//! The four model roles of the alignment loop.
//!
//! Information flow between roles is deliberately restricted: the tester
//! sees only the problem statement, never candidate code; the lifter sees
//! only candidate code, never the statement; only the aligner sees both
//! sides. Each role parses its reply and retries a bounded number of times
//! before giving up with a structured failure.

mod parse;
mod prompts;

pub use parse::{parse_ingredients, parse_test_cases};
pub use prompts::{PromptTemplates, TemplateError};

use std::sync::Arc;

use thiserror::Error;

use crate::core::{AlignedIngredient, AlignmentRule, Candidate, TestOrigin};
use crate::dsl::{parse_dsl, RequirementDsl};
use crate::llm::{ChatMessage, ChatRequest, GenerationConfig, LlmClient, LlmError, StepKey};
use crate::sandbox::{sanitize, LangConfig};

/// Default number of parse attempts per agent call.
pub const DEFAULT_PARSE_ATTEMPTS: u32 = 3;

/// Why an agent call produced no value.
#[derive(Debug, Error)]
pub enum AgentFailure {
    #[error("coder produced no usable code in {attempts} attempts")]
    NoCode { attempts: u32 },
    #[error("tester produced no test cases in {attempts} attempts")]
    NoTests { attempts: u32 },
    #[error("lifter produced no parseable specification in {attempts} attempts: {last_error}")]
    UnparseableLift { attempts: u32, last_error: String },
    #[error("aligner proposed no valid ingredient in {attempts} attempts")]
    NoIngredients { attempts: u32 },
    #[error(transparent)]
    Backend(#[from] LlmError),
}

/// Result of one agent call, successful or not, plus everything needed to
/// understand it afterwards: how many attempts were spent, the raw text of
/// the last reply, and anything tolerated along the way.
#[derive(Debug)]
pub struct AgentOutcome<T> {
    pub result: Result<T, AgentFailure>,
    pub attempts: u32,
    pub raw_last: String,
    pub warnings: Vec<String>,
}

impl<T> AgentOutcome<T> {
    pub fn value(&self) -> Option<&T> {
        self.result.as_ref().ok()
    }

    pub fn is_ok(&self) -> bool {
        self.result.is_ok()
    }
}

/// The coder, tester, lifter, and aligner, sharing one model client.
pub struct Agents {
    client: LlmClient,
    templates: Arc<PromptTemplates>,
    generation: GenerationConfig,
    lang: LangConfig,
    max_parse_attempts: u32,
}

impl Agents {
    pub fn new(client: LlmClient, templates: Arc<PromptTemplates>, generation: GenerationConfig, lang: LangConfig) -> Self {
        Agents {
            client,
            templates,
            generation,
            lang,
            max_parse_attempts: DEFAULT_PARSE_ATTEMPTS,
        }
    }

    pub fn with_max_parse_attempts(mut self, attempts: u32) -> Self {
        self.max_parse_attempts = attempts.max(1);
        self
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }

    fn request(&self, agent: &str, iteration: u32, attempt: u32, prompt: String) -> ChatRequest {
        ChatRequest {
            system: None,
            messages: vec![ChatMessage::user(prompt)],
            config: self.generation.clone(),
            step: StepKey::new(agent, iteration, attempt),
        }
    }

    /// Retry loop shared by all roles: build the prompt, call the model,
    /// try to parse. Backend errors end the loop at once; parse failures
    /// burn an attempt and try again.
    fn attempt_loop<T>(
        &self,
        agent: &str,
        iteration: u32,
        prompt: &str,
        mut parse: impl FnMut(&str, &mut Vec<String>) -> Option<T>,
        exhausted: impl FnOnce(u32) -> AgentFailure,
    ) -> AgentOutcome<T> {
        let mut warnings = Vec::new();
        let mut raw_last = String::new();
        for attempt in 1..=self.max_parse_attempts {
            let request = self.request(agent, iteration, attempt, prompt.to_string());
            match self.client.complete(agent, &request) {
                Ok(response) => {
                    raw_last = response.content.clone();
                    if let Some(value) = parse(&response.content, &mut warnings) {
                        return AgentOutcome { result: Ok(value), attempts: attempt, raw_last, warnings };
                    }
                }
                Err(error) => {
                    return AgentOutcome {
                        result: Err(AgentFailure::Backend(error)),
                        attempts: attempt,
                        raw_last,
                        warnings,
                    };
                }
            }
        }
        AgentOutcome {
            result: Err(exhausted(self.max_parse_attempts)),
            attempts: self.max_parse_attempts,
            raw_last,
            warnings,
        }
    }

    /// Writes a program for the given specification text.
    pub fn coder_generate(&self, spec_text: &str, iteration: u32) -> AgentOutcome<Candidate> {
        let prompt = self.templates.coder_prompt(spec_text, &self.lang.tag);
        let lang_tag = self.lang.tag.clone();
        self.attempt_loop(
            "coder",
            iteration,
            &prompt,
            |content, warnings| match sanitize(content) {
                Ok(code) => Some(Candidate::new(code, lang_tag.clone(), iteration, spec_text)),
                Err(e) => {
                    warnings.push(format!("coder reply rejected: {e}"));
                    None
                }
            },
            |attempts| AgentFailure::NoCode { attempts },
        )
    }

    /// Writes `k` test cases from the problem statement alone.
    pub fn tester_generate(&self, spec_text: &str, k: u32) -> AgentOutcome<Vec<crate::core::TestCase>> {
        let prompt = self.templates.tester_prompt(spec_text, k);
        self.attempt_loop(
            "tester",
            0,
            &prompt,
            |content, warnings| {
                let mut tests = parse_test_cases(content, TestOrigin::Generated);
                if tests.is_empty() {
                    warnings.push("tester reply contained no test blocks".into());
                    return None;
                }
                if tests.len() != k as usize {
                    warnings.push(format!("asked for {k} tests, parsed {}", tests.len()));
                }
                tests.truncate(k as usize);
                Some(tests)
            },
            |attempts| AgentFailure::NoTests { attempts },
        )
    }

    /// Recovers the specification a program implements, from the code alone.
    /// The signature has no way to pass the problem statement, which is what
    /// keeps the lifter honest.
    pub fn lifter_lift(&self, code: &str, iteration: u32) -> AgentOutcome<RequirementDsl> {
        let prompt = self.templates.lifter_prompt(code);
        self.attempt_loop(
            "lifter",
            iteration,
            &prompt,
            |content, warnings| {
                let report = parse_dsl(content);
                warnings.extend(report.warnings.iter().cloned());
                match report.value {
                    Some(value) => Some(value),
                    None => {
                        warnings.push(format!(
                            "lift rejected: {}",
                            report.error.as_deref().unwrap_or("unparseable")
                        ));
                        None
                    }
                }
            },
            |attempts| AgentFailure::UnparseableLift {
                attempts,
                last_error: "no parseable section text".into(),
            },
        )
    }

    /// Proposes amendments from the rule catalog, comparing the statement
    /// with the lifted perception of the latest program.
    pub fn aligner_align(
        &self,
        spec_text: &str,
        lifted: &RequirementDsl,
        history: &[AlignmentRule],
        iteration: u32,
    ) -> AgentOutcome<Vec<AlignedIngredient>> {
        let prompt = self
            .templates
            .aligner_prompt(spec_text, &lifted.render(), &render_history(history));
        self.aligner_loop(&prompt, iteration, false)
    }

    /// Rule-based alignment fed with test failures instead of a lift.
    pub fn aligner_align_on_feedback(
        &self,
        spec_text: &str,
        feedback: &str,
        history: &[AlignmentRule],
        iteration: u32,
    ) -> AgentOutcome<Vec<AlignedIngredient>> {
        let prompt = self
            .templates
            .aligner_prompt(spec_text, feedback, &render_history(history));
        self.aligner_loop(&prompt, iteration, false)
    }

    /// Alignment without the rule catalog: the reply amends the statement
    /// directly and lands on the catch-all rule slot.
    pub fn aligner_align_freeform(
        &self,
        spec_text: &str,
        lifted: &RequirementDsl,
        history: &[AlignmentRule],
        iteration: u32,
    ) -> AgentOutcome<Vec<AlignedIngredient>> {
        let prompt = self
            .templates
            .aligner_freeform_prompt(spec_text, &lifted.render(), &render_history(history));
        self.aligner_loop(&prompt, iteration, true)
    }

    fn aligner_loop(&self, prompt: &str, iteration: u32, freeform: bool) -> AgentOutcome<Vec<AlignedIngredient>> {
        self.attempt_loop(
            "aligner",
            iteration,
            prompt,
            |content, warnings| {
                let (ingredients, parse_warnings) = parse_ingredients(content, iteration, freeform);
                warnings.extend(parse_warnings);
                let valid: Vec<AlignedIngredient> = ingredients
                    .into_iter()
                    .filter(|ingredient| match ingredient.validate() {
                        Ok(()) => true,
                        Err(e) => {
                            warnings.push(format!("ingredient rejected: {e}"));
                            false
                        }
                    })
                    .collect();
                if valid.is_empty() {
                    None
                } else {
                    Some(valid)
                }
            },
            |attempts| AgentFailure::NoIngredients { attempts },
        )
    }
}

fn render_history(history: &[AlignmentRule]) -> String {
    if history.is_empty() {
        "(none)".to_string()
    } else {
        history
            .iter()
            .map(|rule| rule.display_name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::TestCase;
    use crate::llm::{ScriptedBackend, ScriptedScenario, UsageLedger};

    fn agents_with(scenario: ScriptedScenario) -> (Agents, Arc<ScriptedBackend>) {
        let backend = Arc::new(ScriptedBackend::new(scenario));
        let client = LlmClient::new(backend.clone(), Arc::new(UsageLedger::new()), "test-run");
        let agents = Agents::new(
            client,
            Arc::new(PromptTemplates::builtin()),
            GenerationConfig::default(),
            LangConfig::python3(),
        );
        (agents, backend)
    }

    #[test]
    fn coder_accepts_fenced_reply_first_try() {
        let scenario = ScriptedScenario::new().script("coder", 0, ["```python\nprint(1)\n```"]);
        let (agents, _) = agents_with(scenario);
        let outcome = agents.coder_generate("print one", 0);
        let candidate = outcome.value().unwrap();
        assert_eq!(candidate.code, "print(1)");
        assert_eq!(candidate.lang, "python3");
        assert_eq!(candidate.iteration, 0);
        assert_eq!(outcome.attempts, 1);
    }

    #[test]
    fn coder_retries_until_code_appears() {
        let scenario = ScriptedScenario::new().script(
            "coder",
            0,
            ["I would rather discuss it.", "Still thinking about it.", "```python\nprint(2)\n```"],
        );
        let (agents, _) = agents_with(scenario);
        let outcome = agents.coder_generate("print two", 0);
        assert_eq!(outcome.attempts, 3);
        assert_eq!(outcome.value().unwrap().code, "print(2)");
        assert_eq!(outcome.warnings.len(), 2);
    }

    #[test]
    fn coder_gives_up_after_max_attempts() {
        let scenario = ScriptedScenario::new().script("coder", 0, ["No code from me."]);
        let (agents, _) = agents_with(scenario);
        let outcome = agents.coder_generate("anything", 0);
        assert!(matches!(outcome.result, Err(AgentFailure::NoCode { attempts: 3 })));
        assert_eq!(outcome.raw_last, "No code from me.");
    }

    #[test]
    fn tester_parses_requested_count() {
        let reply = "TEST:\nINPUT:\n1\nOUTPUT:\n1\nTEST:\nINPUT:\n2\nOUTPUT:\n4\nTEST:\nINPUT:\n3\nOUTPUT:\n9\n";
        let scenario = ScriptedScenario::new().script("tester", 0, [reply]);
        let (agents, _) = agents_with(scenario);
        let outcome = agents.tester_generate("square it", 3);
        assert_eq!(outcome.value().unwrap().len(), 3);
        assert!(outcome.warnings.is_empty());
    }

    #[test]
    fn tester_partial_parse_is_accepted_with_warning() {
        let reply = "TEST:\nINPUT:\n1\nOUTPUT:\n1\nTEST:\nINPUT:\n2\nOUTPUT:\n4\nand three more I ran out of patience for";
        let scenario = ScriptedScenario::new().script("tester", 0, [reply]);
        let (agents, _) = agents_with(scenario);
        let outcome = agents.tester_generate("square it", 5);
        assert_eq!(outcome.value().unwrap().len(), 2);
        assert!(outcome.warnings.iter().any(|w| w.contains("asked for 5")));
    }

    #[test]
    fn tester_never_sees_candidate_code() {
        let scenario = ScriptedScenario::new().script("tester", 0, ["INPUT:\n1\nOUTPUT:\n1\n"]);
        let (agents, backend) = agents_with(scenario);
        agents.tester_generate("THE-SPEC-TEXT", 1);
        let transcript = backend.transcript();
        assert_eq!(transcript.len(), 1);
        let prompt = transcript[0].prompt_text();
        assert!(prompt.contains("THE-SPEC-TEXT"));
        assert!(prompt.contains("problem statement alone"));
    }

    #[test]
    fn lifter_sees_code_but_not_spec() {
        let scenario = ScriptedScenario::new().script("lifter", 2, ["PURPOSE:\ndoubles the input\n"]);
        let (agents, backend) = agents_with(scenario);
        let outcome = agents.lifter_lift("print(x * 2)", 2);
        assert_eq!(outcome.value().unwrap().purpose.as_deref(), Some("doubles the input"));
        let prompt = backend.transcript()[0].prompt_text();
        assert!(prompt.contains("print(x * 2)"));
        assert!(prompt.contains("Format definition"));
    }

    #[test]
    fn lifter_retries_on_unparseable_reply() {
        let scenario = ScriptedScenario::new().script(
            "lifter",
            0,
            ["it reads a number and doubles it", "PURPOSE:\ndoubles the input\n"],
        );
        let (agents, _) = agents_with(scenario);
        let outcome = agents.lifter_lift("code", 0);
        assert_eq!(outcome.attempts, 2);
        assert!(outcome.is_ok());
        assert!(outcome.warnings.iter().any(|w| w.contains("lift rejected")));
    }

    #[test]
    fn aligner_parses_ingredients_and_reports_unknown_rules() {
        let reply = "INGREDIENT: Performance\nbe fast\nINGREDIENT: Specification Purpose\nthe goal is the sum\n";
        let scenario = ScriptedScenario::new().script("aligner", 1, [reply]);
        let (agents, backend) = agents_with(scenario);
        let lifted = RequirementDsl { purpose: Some("sums".into()), ..RequirementDsl::default() };
        let outcome = agents.aligner_align("SPEC", &lifted, &[AlignmentRule::Apis], 1);
        let ingredients = outcome.value().unwrap();
        assert_eq!(ingredients.len(), 1);
        assert_eq!(ingredients[0].rule, AlignmentRule::SpecificationPurpose);
        assert!(outcome.warnings.iter().any(|w| w.contains("Performance")));
        let prompt = backend.transcript()[0].prompt_text();
        assert!(prompt.contains("SPEC"));
        assert!(prompt.contains("PURPOSE:"));
        assert!(prompt.contains("APIs"));
    }

    #[test]
    fn aligner_rejects_edge_ingredient_with_wrong_cardinality() {
        let two_tests = "INGREDIENT: Edge/Corner Cases\nINPUT:\n0\nOUTPUT:\n0\nINPUT:\n1\nOUTPUT:\n1\n";
        let scenario = ScriptedScenario::new().script("aligner", 1, [two_tests]);
        let (agents, _) = agents_with(scenario);
        let lifted = RequirementDsl { purpose: Some("p".into()), ..RequirementDsl::default() };
        let outcome = agents.aligner_align("SPEC", &lifted, &[], 1);
        assert!(matches!(outcome.result, Err(AgentFailure::NoIngredients { .. })));
        assert!(outcome.warnings.iter().any(|w| w.contains("exactly 3")));
    }

    #[test]
    fn aligner_accepts_edge_ingredient_with_three_tests() {
        let reply = "INGREDIENT: Edge/Corner Cases\nINPUT:\n0\nOUTPUT:\n0\nINPUT:\n1\nOUTPUT:\n1\nINPUT:\n2\nOUTPUT:\n2\n";
        let scenario = ScriptedScenario::new().script("aligner", 3, [reply]);
        let (agents, _) = agents_with(scenario);
        let lifted = RequirementDsl { purpose: Some("p".into()), ..RequirementDsl::default() };
        let outcome = agents.aligner_align("SPEC", &lifted, &[], 3);
        let ingredients = outcome.value().unwrap();
        assert_eq!(ingredients[0].rule, AlignmentRule::EdgeCornerCases);
        assert_eq!(ingredients[0].edge_tests().len(), 3);
        assert_eq!(ingredients[0].iteration_added, 3);
    }

    #[test]
    fn freeform_aligner_keeps_rule_names_out_of_the_prompt() {
        let scenario = ScriptedScenario::new().script("aligner", 1, ["INGREDIENT: note\nalways print integers\n"]);
        let (agents, backend) = agents_with(scenario);
        let lifted = RequirementDsl { purpose: Some("p".into()), ..RequirementDsl::default() };
        let outcome = agents.aligner_align_freeform("SPEC", &lifted, &[], 1);
        assert_eq!(outcome.value().unwrap()[0].rule, AlignmentRule::HintsOrTips);
        let prompt = backend.transcript()[0].prompt_text();
        assert!(!prompt.contains("Improvement rules"));
        assert!(!prompt.contains("Error Handling Requirements"));
    }

    #[test]
    fn backend_failure_ends_the_attempt_loop() {
        let (agents, _) = agents_with(ScriptedScenario::new());
        let outcome = agents.coder_generate("spec", 0);
        assert!(matches!(outcome.result, Err(AgentFailure::Backend(_))));
        assert_eq!(outcome.attempts, 1);
    }

    #[test]
    fn edge_tests_flow_into_test_cases() {
        let tests = parse_test_cases("INPUT:\n9\nOUTPUT:\n81\n", TestOrigin::Edge);
        assert_eq!(tests, vec![TestCase::edge("9", "81")]);
    }
}
