use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The closed set of ways a specification may be amended.
///
/// Every amendment the aligner proposes must name one of these ten rules;
/// anything else is dropped at parse time. The edge-case rule is special in
/// that its content is not prose but exactly three new test cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlignmentRule {
    SpecificationBackground,
    SpecificationPurpose,
    KeyConcepts,
    InputRequirements,
    OutputRequirements,
    ExamplesWithExplanations,
    EdgeCornerCases,
    Apis,
    ErrorHandlingRequirements,
    HintsOrTips,
}

impl AlignmentRule {
    pub const ALL: [AlignmentRule; 10] = [
        AlignmentRule::SpecificationBackground,
        AlignmentRule::SpecificationPurpose,
        AlignmentRule::KeyConcepts,
        AlignmentRule::InputRequirements,
        AlignmentRule::OutputRequirements,
        AlignmentRule::ExamplesWithExplanations,
        AlignmentRule::EdgeCornerCases,
        AlignmentRule::Apis,
        AlignmentRule::ErrorHandlingRequirements,
        AlignmentRule::HintsOrTips,
    ];

    /// Human-readable name used in prompts, rendered specs, and reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            AlignmentRule::SpecificationBackground => "Specification Background",
            AlignmentRule::SpecificationPurpose => "Specification Purpose",
            AlignmentRule::KeyConcepts => "Key Concepts",
            AlignmentRule::InputRequirements => "Input Requirements",
            AlignmentRule::OutputRequirements => "Output Requirements",
            AlignmentRule::ExamplesWithExplanations => "Examples with Explanations",
            AlignmentRule::EdgeCornerCases => "Edge/Corner Cases",
            AlignmentRule::Apis => "APIs",
            AlignmentRule::ErrorHandlingRequirements => "Error Handling Requirements",
            AlignmentRule::HintsOrTips => "Hints or Tips",
        }
    }

    /// Matches a model-written rule name, ignoring case, punctuation, and
    /// spacing, so `edge / corner cases` and `EdgeCornerCases` both resolve.
    pub fn parse_name(name: &str) -> Option<AlignmentRule> {
        let folded = fold_name(name);
        if folded.is_empty() {
            return None;
        }
        AlignmentRule::ALL
            .into_iter()
            .find(|rule| fold_name(rule.display_name()) == folded)
    }
}

fn fold_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// One amendment to a specification, retained or proposed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedIngredient {
    pub rule: AlignmentRule,
    pub content: String,
    /// Iteration of the alignment loop that proposed this content.
    pub iteration_added: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngredientError {
    #[error("ingredient for {0} has empty content")]
    EmptyContent(&'static str),
    #[error("edge-case ingredient must contain exactly 3 tests, found {0}")]
    WrongEdgeTestCount(usize),
}

impl AlignedIngredient {
    pub fn new(rule: AlignmentRule, content: impl Into<String>, iteration_added: u32) -> Self {
        AlignedIngredient {
            rule,
            content: content.into(),
            iteration_added,
        }
    }

    /// Checks that the content is usable: non-blank, and for the edge-case
    /// rule parseable into exactly three input/output test blocks.
    pub fn validate(&self) -> Result<(), IngredientError> {
        if self.content.trim().is_empty() {
            return Err(IngredientError::EmptyContent(self.rule.display_name()));
        }
        if self.rule == AlignmentRule::EdgeCornerCases {
            let tests = self.edge_tests();
            if tests.len() != 3 {
                return Err(IngredientError::WrongEdgeTestCount(tests.len()));
            }
        }
        Ok(())
    }

    /// The test cases encoded in an edge-case ingredient; empty for other
    /// rules or unparseable content.
    pub fn edge_tests(&self) -> Vec<crate::core::TestCase> {
        if self.rule != AlignmentRule::EdgeCornerCases {
            return Vec::new();
        }
        crate::dsl::parse_test_blocks(&self.content)
            .into_iter()
            .map(|(input, output)| crate::core::TestCase::edge(input, output))
            .collect()
    }
}

/// A specification together with the amendments the search has kept.
///
/// At most one amendment per rule is held: retaining a rule again replaces
/// the previous content and moves the rule to the end of the retention order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedSpec {
    base: String,
    retained: Vec<AlignedIngredient>,
}

impl AlignedSpec {
    pub fn new(base: impl Into<String>) -> Self {
        AlignedSpec {
            base: base.into(),
            retained: Vec::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    /// Retained amendments in retention order.
    pub fn retained(&self) -> &[AlignedIngredient] {
        &self.retained
    }

    pub fn is_amended(&self) -> bool {
        !self.retained.is_empty()
    }

    /// Adds an amendment, replacing any earlier one for the same rule.
    pub fn upsert(&mut self, ingredient: AlignedIngredient) {
        self.retained.retain(|i| i.rule != ingredient.rule);
        self.retained.push(ingredient);
    }

    /// Renders the full amended specification shown to the coder: the base
    /// statement followed by one labeled section per retained amendment, in
    /// retention order. Byte-deterministic for equal inputs.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.base.len() + 64);
        out.push_str(self.base.trim_end());
        for ingredient in &self.retained {
            out.push_str("\n\n## ");
            out.push_str(ingredient.rule.display_name());
            out.push('\n');
            out.push_str(ingredient.content.trim_end());
        }
        out.push('\n');
        out
    }
}
