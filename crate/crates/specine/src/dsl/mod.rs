//! The sectioned requirement format the lifter writes.
//!
//! A lifted specification is plain text split into up to ten labeled
//! sections (`PURPOSE:`, `INPUT REQUIREMENTS:`, ...). The format is an
//! external interface: other tooling may produce or consume it, so the
//! header names, the canonical section order emitted by [`RequirementDsl::render`],
//! and the `- term: definition` / `INPUT:`/`OUTPUT:` sub-formats are stable.

mod parse;
mod render;

pub use parse::{parse_dsl, parse_test_blocks, DslParseReport};

use serde::{Deserialize, Serialize};

use crate::core::TestCase;

/// A term the statement relies on, with the reading the code implements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyConcept {
    pub term: String,
    pub definition: String,
}

/// A worked input/output pair, optionally with the reasoning between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkedExample {
    pub input: String,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

/// A library routine the code leans on and what it is used for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiHint {
    pub name: String,
    pub functionality: String,
}

/// What a program appears to require, one field per section of the format.
///
/// Every field is optional; a value is usable once at least one field is
/// populated. Field order here matches the canonical section order of the
/// rendered text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementDsl {
    pub background: Option<String>,
    pub purpose: Option<String>,
    pub key_concepts: Vec<KeyConcept>,
    pub input_requirements: Option<String>,
    pub output_requirements: Option<String>,
    pub examples: Vec<WorkedExample>,
    pub edge_cases: Vec<TestCase>,
    pub apis: Vec<ApiHint>,
    pub error_handling: Option<String>,
    pub hints: Option<String>,
}

impl RequirementDsl {
    /// True once any section carries content.
    pub fn is_populated(&self) -> bool {
        !self.populated_fields().is_empty()
    }

    /// Names of the populated sections, in canonical order.
    pub fn populated_fields(&self) -> Vec<&'static str> {
        fn push_text(fields: &mut Vec<&'static str>, name: &'static str, value: &Option<String>) {
            if value.as_deref().is_some_and(|v| !v.trim().is_empty()) {
                fields.push(name);
            }
        }
        let mut fields = Vec::new();
        push_text(&mut fields, "background", &self.background);
        push_text(&mut fields, "purpose", &self.purpose);
        if !self.key_concepts.is_empty() {
            fields.push("key_concepts");
        }
        push_text(&mut fields, "input_requirements", &self.input_requirements);
        push_text(&mut fields, "output_requirements", &self.output_requirements);
        if !self.examples.is_empty() {
            fields.push("examples");
        }
        if !self.edge_cases.is_empty() {
            fields.push("edge_cases");
        }
        if !self.apis.is_empty() {
            fields.push("apis");
        }
        push_text(&mut fields, "error_handling", &self.error_handling);
        push_text(&mut fields, "hints", &self.hints);
        fields
    }
}

/// How one field differs between two requirement values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffKind {
    LeftOnly,
    RightOnly,
    Changed,
}

/// One differing field, named as in [`RequirementDsl::populated_fields`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDiff {
    pub field: &'static str,
    pub kind: DiffKind,
}

/// Field-by-field comparison; an empty result means the values are equal.
///
/// A field counts as present when it carries content, so `None` and
/// `Some("")` compare equal, as do two structurally different but equally
/// empty lists.
pub fn dsl_diff(left: &RequirementDsl, right: &RequirementDsl) -> Vec<FieldDiff> {
    fn text_part(v: &Option<String>) -> Option<&str> {
        v.as_deref().filter(|s| !s.trim().is_empty())
    }
    fn diff_parts<T: PartialEq>(field: &'static str, l: Option<T>, r: Option<T>, out: &mut Vec<FieldDiff>) {
        let kind = match (l, r) {
            (Some(_), None) => Some(DiffKind::LeftOnly),
            (None, Some(_)) => Some(DiffKind::RightOnly),
            (Some(a), Some(b)) if a != b => Some(DiffKind::Changed),
            _ => None,
        };
        if let Some(kind) = kind {
            out.push(FieldDiff { field, kind });
        }
    }
    fn list_part<T>(v: &[T]) -> Option<&[T]> {
        if v.is_empty() {
            None
        } else {
            Some(v)
        }
    }

    let mut out = Vec::new();
    diff_parts("background", text_part(&left.background), text_part(&right.background), &mut out);
    diff_parts("purpose", text_part(&left.purpose), text_part(&right.purpose), &mut out);
    diff_parts(
        "key_concepts",
        list_part(&left.key_concepts),
        list_part(&right.key_concepts),
        &mut out,
    );
    diff_parts(
        "input_requirements",
        text_part(&left.input_requirements),
        text_part(&right.input_requirements),
        &mut out,
    );
    diff_parts(
        "output_requirements",
        text_part(&left.output_requirements),
        text_part(&right.output_requirements),
        &mut out,
    );
    diff_parts("examples", list_part(&left.examples), list_part(&right.examples), &mut out);
    diff_parts("edge_cases", list_part(&left.edge_cases), list_part(&right.edge_cases), &mut out);
    diff_parts("apis", list_part(&left.apis), list_part(&right.apis), &mut out);
    diff_parts(
        "error_handling",
        text_part(&left.error_handling),
        text_part(&right.error_handling),
        &mut out,
    );
    diff_parts("hints", text_part(&left.hints), text_part(&right.hints), &mut out);
    out
}

/// Format definition injected into lifter prompts so the model emits text
/// that [`parse_dsl`] accepts.
pub fn schema_text() -> &'static str {
    "\
Write the specification as plain text sections. Every section is optional,
but at least one must be present. Section headers must sit alone on a line,
spelled exactly as below. Omit sections you have nothing to say for.

BACKGROUND:
  Free text: the domain assumptions the program makes.
PURPOSE:
  Free text: the task the program actually performs.
KEY CONCEPTS:
  One line per concept, formatted '- term: definition'.
INPUT REQUIREMENTS:
  Free text: the input format, types, and ranges the program reads.
OUTPUT REQUIREMENTS:
  Free text: the output format the program emits.
EXAMPLES:
  Repeated blocks of the form:
  INPUT:
  <input lines>
  OUTPUT:
  <output lines>
  EXPLANATION:
  <optional reasoning>
EDGE CASES:
  Repeated blocks of the form:
  INPUT:
  <input lines>
  OUTPUT:
  <expected output lines>
APIS:
  One line per routine, formatted '- name: what it is used for'.
ERROR HANDLING:
  Free text: behavior on invalid or exceptional input.
HINTS:
  Free text: anything else the program's approach reveals."
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RequirementDsl {
        RequirementDsl {
            purpose: Some("Double the input.".into()),
            input_requirements: Some("One integer on stdin.".into()),
            ..RequirementDsl::default()
        }
    }

    #[test]
    fn diff_of_equal_values_is_empty() {
        assert!(dsl_diff(&sample(), &sample()).is_empty());
    }

    #[test]
    fn diff_reports_side_and_change() {
        let mut right = sample();
        right.input_requirements = None;
        right.hints = Some("Use multiplication.".into());
        right.purpose = Some("Triple the input.".into());
        let diffs = dsl_diff(&sample(), &right);
        assert_eq!(
            diffs,
            vec![
                FieldDiff { field: "purpose", kind: DiffKind::Changed },
                FieldDiff { field: "input_requirements", kind: DiffKind::LeftOnly },
                FieldDiff { field: "hints", kind: DiffKind::RightOnly },
            ]
        );
    }

    #[test]
    fn blank_text_counts_as_missing() {
        let mut left = sample();
        let mut right = sample();
        left.hints = Some("   ".into());
        right.hints = None;
        assert!(dsl_diff(&left, &right).is_empty());
    }

    #[test]
    fn populated_fields_in_canonical_order() {
        let mut d = sample();
        d.apis.push(ApiHint { name: "sqrt".into(), functionality: "roots".into() });
        assert_eq!(d.populated_fields(), vec!["purpose", "input_requirements", "apis"]);
        assert!(d.is_populated());
        assert!(!RequirementDsl::default().is_populated());
    }
}
