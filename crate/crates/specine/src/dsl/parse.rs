use serde::{Deserialize, Serialize};

use crate::core::TestCase;
use crate::dsl::{ApiHint, KeyConcept, RequirementDsl, WorkedExample};

/// Outcome of [`parse_dsl`]: exactly one of `value` and `error` is set, and
/// `warnings` records everything that was tolerated along the way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DslParseReport {
    pub value: Option<RequirementDsl>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl DslParseReport {
    fn ok(value: RequirementDsl, warnings: Vec<String>) -> Self {
        DslParseReport { value: Some(value), error: None, warnings }
    }

    fn err(error: impl Into<String>, warnings: Vec<String>) -> Self {
        DslParseReport { value: None, error: Some(error.into()), warnings }
    }

    pub fn is_ok(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Background,
    Purpose,
    KeyConcepts,
    InputRequirements,
    OutputRequirements,
    Examples,
    EdgeCases,
    Apis,
    ErrorHandling,
    Hints,
}

const SECTION_HEADERS: [(Section, &str); 10] = [
    (Section::Background, "BACKGROUND"),
    (Section::Purpose, "PURPOSE"),
    (Section::KeyConcepts, "KEY CONCEPTS"),
    (Section::InputRequirements, "INPUT REQUIREMENTS"),
    (Section::OutputRequirements, "OUTPUT REQUIREMENTS"),
    (Section::Examples, "EXAMPLES"),
    (Section::EdgeCases, "EDGE CASES"),
    (Section::Apis, "APIS"),
    (Section::ErrorHandling, "ERROR HANDLING"),
    (Section::Hints, "HINTS"),
];

/// Sub-headers that structure section bodies; a line starting with one of
/// these never opens a new top-level section.
const RESERVED_SUBHEADERS: [&str; 4] = ["INPUT", "OUTPUT", "EXPLANATION", "TEST"];

enum LineKind<'a> {
    Header(Section, &'a str),
    Unknown(String),
    Body,
}

fn classify(line: &str) -> LineKind<'_> {
    let trimmed = line.trim();
    let Some(before_colon) = trimmed.find(':').map(|i| &trimmed[..i]) else {
        return LineKind::Body;
    };
    let name = before_colon.trim();
    let folded = name.to_ascii_uppercase();
    if let Some((section, _)) = SECTION_HEADERS.iter().find(|(_, h)| *h == folded) {
        let rest = trimmed[trimmed.find(':').unwrap() + 1..].trim();
        return LineKind::Header(*section, rest);
    }
    if is_reserved_subheader(&folded) {
        return LineKind::Body;
    }
    // Only a short, fully uppercase label reads as an attempted header;
    // ordinary prose that happens to contain a colon stays body text.
    let header_shaped = trimmed.ends_with(':')
        && !name.is_empty()
        && name.len() <= 40
        && name.chars().any(|c| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == ' ' || c == '/' || c == '-' || c == '_');
    if header_shaped {
        LineKind::Unknown(name.to_string())
    } else {
        LineKind::Body
    }
}

fn is_reserved_subheader(folded_name: &str) -> bool {
    RESERVED_SUBHEADERS
        .iter()
        .any(|r| folded_name == *r || folded_name.starts_with(&format!("{r} ")))
}

/// Right-trims each line, drops leading and trailing blank lines, and joins
/// with `\n`. This is the canonical form every section body is stored in.
pub(crate) fn normalize_body(text: &str) -> String {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end()).collect();
    let start = lines.iter().position(|l| !l.is_empty());
    let end = lines.iter().rposition(|l| !l.is_empty());
    match (start, end) {
        (Some(s), Some(e)) => lines[s..=e].join("\n"),
        _ => String::new(),
    }
}

/// Parses a lifted specification.
///
/// Headers are matched case-insensitively against the canonical names; a
/// duplicated section keeps the last occurrence with a warning, an
/// unrecognized uppercase header is skipped with a warning, and text with no
/// recognizable section at all is an error. Never panics, whatever the input.
pub fn parse_dsl(text: &str) -> DslParseReport {
    let mut warnings = Vec::new();
    let mut sections: Vec<(Section, String)> = Vec::new();
    let mut current: Option<(Section, Vec<String>)> = None;
    let mut skipping_unknown = false;
    let mut leading_junk = false;

    let close = |current: &mut Option<(Section, Vec<String>)>,
                 sections: &mut Vec<(Section, String)>,
                 warnings: &mut Vec<String>| {
        if let Some((section, lines)) = current.take() {
            let body = normalize_body(&lines.join("\n"));
            if let Some(pos) = sections.iter().position(|(s, _)| *s == section) {
                warnings.push(format!(
                    "duplicate section {} keeps the later occurrence",
                    header_name(section)
                ));
                sections.remove(pos);
            }
            sections.push((section, body));
        }
    };

    for raw_line in text.lines() {
        let line = raw_line.trim_end_matches('\r');
        match classify(line) {
            LineKind::Header(section, inline) => {
                close(&mut current, &mut sections, &mut warnings);
                skipping_unknown = false;
                let mut lines = Vec::new();
                if !inline.is_empty() {
                    lines.push(inline.to_string());
                }
                current = Some((section, lines));
            }
            LineKind::Unknown(name) => {
                close(&mut current, &mut sections, &mut warnings);
                skipping_unknown = true;
                warnings.push(format!("unrecognized section '{name}' ignored"));
            }
            LineKind::Body => {
                if let Some((_, lines)) = current.as_mut() {
                    lines.push(line.to_string());
                } else if !skipping_unknown && !line.trim().is_empty() {
                    leading_junk = true;
                }
            }
        }
    }
    close(&mut current, &mut sections, &mut warnings);

    if leading_junk {
        warnings.push("text before the first section ignored".to_string());
    }
    if sections.is_empty() {
        return DslParseReport::err("no recognized sections", warnings);
    }

    let mut value = RequirementDsl::default();
    for (section, body) in sections {
        match section {
            Section::Background => value.background = some_if_nonempty(body),
            Section::Purpose => value.purpose = some_if_nonempty(body),
            Section::KeyConcepts => value.key_concepts = parse_pairs(&body, "concept", &mut warnings)
                .into_iter()
                .map(|(term, definition)| KeyConcept { term, definition })
                .collect(),
            Section::InputRequirements => value.input_requirements = some_if_nonempty(body),
            Section::OutputRequirements => value.output_requirements = some_if_nonempty(body),
            Section::Examples => value.examples = parse_examples(&body, &mut warnings),
            Section::EdgeCases => {
                value.edge_cases = parse_test_blocks(&body)
                    .into_iter()
                    .map(|(input, output)| TestCase::edge(input, output))
                    .collect()
            }
            Section::Apis => value.apis = parse_pairs(&body, "api", &mut warnings)
                .into_iter()
                .map(|(name, functionality)| ApiHint { name, functionality })
                .collect(),
            Section::ErrorHandling => value.error_handling = some_if_nonempty(body),
            Section::Hints => value.hints = some_if_nonempty(body),
        }
    }

    if !value.is_populated() {
        return DslParseReport::err("every recognized section is empty", warnings);
    }
    DslParseReport::ok(value, warnings)
}

fn header_name(section: Section) -> &'static str {
    SECTION_HEADERS
        .iter()
        .find(|(s, _)| *s == section)
        .map(|(_, h)| *h)
        .unwrap_or("?")
}

fn some_if_nonempty(body: String) -> Option<String> {
    if body.is_empty() {
        None
    } else {
        Some(body)
    }
}

/// Parses `- term: definition` lines. Lines without a leading dash continue
/// the previous definition; duplicate terms keep the last occurrence.
fn parse_pairs(body: &str, what: &str, warnings: &mut Vec<String>) -> Vec<(String, String)> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for line in body.lines() {
        let trimmed = line.trim();
        if let Some(entry) = trimmed.strip_prefix("- ").or_else(|| trimmed.strip_prefix("-")) {
            match entry.split_once(':') {
                Some((term, definition)) if !term.trim().is_empty() => {
                    pairs.push((term.trim().to_string(), definition.trim().to_string()));
                }
                _ => warnings.push(format!("malformed {what} line '{trimmed}' ignored")),
            }
        } else if let Some((_, definition)) = pairs.last_mut() {
            if !definition.is_empty() {
                definition.push('\n');
            }
            definition.push_str(trimmed);
        } else if !trimmed.is_empty() {
            warnings.push(format!("malformed {what} line '{trimmed}' ignored"));
        }
    }
    let mut deduped: Vec<(String, String)> = Vec::new();
    for (term, definition) in pairs {
        if let Some(pos) = deduped.iter().position(|(t, _)| *t == term) {
            warnings.push(format!("duplicate {what} '{term}' keeps the later entry"));
            deduped.remove(pos);
        }
        deduped.push((term, definition));
    }
    deduped
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockStage {
    Input,
    Output,
    Explanation,
}

struct IoBlock {
    input: String,
    output: Option<String>,
    explanation: Option<String>,
}

/// Shared scanner for `INPUT:` / `OUTPUT:` / `EXPLANATION:` blocks. `TEST`
/// separator lines close the current block and are otherwise ignored.
fn parse_io_blocks(body: &str) -> Vec<IoBlock> {
    let mut blocks: Vec<IoBlock> = Vec::new();
    let mut stage: Option<BlockStage> = None;
    let mut input: Vec<String> = Vec::new();
    let mut output: Vec<String> = Vec::new();
    let mut explanation: Vec<String> = Vec::new();
    let mut output_seen = false;
    let mut explanation_seen = false;

    let flush = |stage: &mut Option<BlockStage>,
                 input: &mut Vec<String>,
                 output: &mut Vec<String>,
                 explanation: &mut Vec<String>,
                 output_seen: &mut bool,
                 explanation_seen: &mut bool,
                 blocks: &mut Vec<IoBlock>| {
        if stage.is_some() {
            blocks.push(IoBlock {
                input: normalize_body(&input.join("\n")),
                output: if *output_seen {
                    Some(normalize_body(&output.join("\n")))
                } else {
                    None
                },
                explanation: if *explanation_seen {
                    Some(normalize_body(&explanation.join("\n")))
                } else {
                    None
                },
            });
        }
        *stage = None;
        input.clear();
        output.clear();
        explanation.clear();
        *output_seen = false;
        *explanation_seen = false;
    };

    for line in body.lines() {
        let trimmed = line.trim();
        let folded = trimmed
            .strip_suffix(':')
            .map(|n| n.trim().to_ascii_uppercase())
            .map(|n| (n, ""))
            .or_else(|| {
                trimmed
                    .split_once(':')
                    .map(|(n, rest)| (n.trim().to_ascii_uppercase(), rest.trim()))
            });
        match folded {
            Some((name, rest)) if name == "INPUT" => {
                // A second INPUT opens the next block.
                if stage.is_some() && (output_seen || !input.is_empty()) {
                    flush(
                        &mut stage,
                        &mut input,
                        &mut output,
                        &mut explanation,
                        &mut output_seen,
                        &mut explanation_seen,
                        &mut blocks,
                    );
                }
                stage = Some(BlockStage::Input);
                if !rest.is_empty() {
                    input.push(rest.to_string());
                }
            }
            Some((name, rest)) if name == "OUTPUT" => {
                stage = Some(BlockStage::Output);
                output_seen = true;
                if !rest.is_empty() {
                    output.push(rest.to_string());
                }
            }
            Some((name, rest)) if name == "EXPLANATION" => {
                if stage.is_some() {
                    stage = Some(BlockStage::Explanation);
                    explanation_seen = true;
                    if !rest.is_empty() {
                        explanation.push(rest.to_string());
                    }
                }
            }
            Some((name, _)) if name == "TEST" || name.starts_with("TEST ") => {
                flush(
                    &mut stage,
                    &mut input,
                    &mut output,
                    &mut explanation,
                    &mut output_seen,
                    &mut explanation_seen,
                    &mut blocks,
                );
            }
            _ => match stage {
                Some(BlockStage::Input) => input.push(line.trim_end().to_string()),
                Some(BlockStage::Output) => output.push(line.trim_end().to_string()),
                Some(BlockStage::Explanation) => explanation.push(line.trim_end().to_string()),
                None => {}
            },
        }
    }
    flush(
        &mut stage,
        &mut input,
        &mut output,
        &mut explanation,
        &mut output_seen,
        &mut explanation_seen,
        &mut blocks,
    );
    blocks
}

fn parse_examples(body: &str, warnings: &mut Vec<String>) -> Vec<WorkedExample> {
    parse_io_blocks(body)
        .into_iter()
        .filter_map(|block| match block.output {
            Some(output) => Some(WorkedExample {
                input: block.input,
                output,
                explanation: block.explanation.filter(|e| !e.is_empty()),
            }),
            None => {
                warnings.push("example without an OUTPUT part ignored".to_string());
                None
            }
        })
        .collect()
}

/// Extracts `(input, expected)` pairs from `INPUT:`/`OUTPUT:` blocks, as
/// written by the tester agent and the edge-case rule. Blocks missing their
/// `OUTPUT:` part are dropped.
pub fn parse_test_blocks(text: &str) -> Vec<(String, String)> {
    parse_io_blocks(text)
        .into_iter()
        .filter_map(|block| block.output.map(|output| (block.input, output)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_sections() {
        let report = parse_dsl("PURPOSE:\ncompute the sum\n\nINPUT REQUIREMENTS:\none line of integers\n");
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        let value = report.value.unwrap();
        assert_eq!(value.purpose.as_deref(), Some("compute the sum"));
        assert_eq!(value.input_requirements.as_deref(), Some("one line of integers"));
        assert!(value.examples.is_empty());
    }

    #[test]
    fn headers_are_case_insensitive() {
        let report = parse_dsl("purpose:\nsum\n");
        assert_eq!(report.value.unwrap().purpose.as_deref(), Some("sum"));
    }

    #[test]
    fn inline_header_content_is_kept() {
        let report = parse_dsl("PURPOSE: compute the sum\n");
        assert_eq!(report.value.unwrap().purpose.as_deref(), Some("compute the sum"));
    }

    #[test]
    fn unknown_section_warns_and_is_skipped() {
        let report = parse_dsl("PURPOSE:\nsum\nPERFORMANCE:\nmust be O(n)\n");
        assert!(report.is_ok());
        assert!(report.warnings.iter().any(|w| w.contains("PERFORMANCE")));
        let value = report.value.unwrap();
        assert_eq!(value.purpose.as_deref(), Some("sum"));
        assert!(value.hints.is_none());
    }

    #[test]
    fn prose_colons_stay_in_the_body() {
        let report = parse_dsl("PURPOSE:\nNote: the list may be empty.\n");
        assert_eq!(
            report.value.unwrap().purpose.as_deref(),
            Some("Note: the list may be empty.")
        );
    }

    #[test]
    fn duplicate_section_keeps_last_and_warns() {
        let report = parse_dsl("PURPOSE:\nfirst\nPURPOSE:\nsecond\n");
        assert_eq!(report.value.unwrap().purpose.as_deref(), Some("second"));
        assert!(report.warnings.iter().any(|w| w.contains("duplicate section PURPOSE")));
    }

    #[test]
    fn no_sections_is_an_error() {
        let report = parse_dsl("just some prose\nwith no headers\n");
        assert!(!report.is_ok());
        assert!(report.error.unwrap().contains("no recognized sections"));
    }

    #[test]
    fn empty_sections_are_an_error() {
        let report = parse_dsl("PURPOSE:\n\nHINTS:\n");
        assert!(!report.is_ok());
        assert!(report.error.unwrap().contains("empty"));
    }

    #[test]
    fn key_concepts_parse_and_dedupe() {
        let body = "KEY CONCEPTS:\n- window: a span of k items\n- window: a contiguous span of k items\n- pivot: the chosen element\n";
        let report = parse_dsl(body);
        let value = report.value.unwrap();
        assert_eq!(value.key_concepts.len(), 2);
        assert_eq!(value.key_concepts[0].term, "window");
        assert_eq!(value.key_concepts[0].definition, "a contiguous span of k items");
        assert!(report.warnings.iter().any(|w| w.contains("duplicate concept 'window'")));
    }

    #[test]
    fn examples_with_and_without_explanation() {
        let text = "EXAMPLES:\nINPUT:\n1 2\nOUTPUT:\n3\nEXPLANATION:\n1 plus 2\nINPUT:\n0 0\nOUTPUT:\n0\n";
        let value = parse_dsl(text).value.unwrap();
        assert_eq!(value.examples.len(), 2);
        assert_eq!(value.examples[0].explanation.as_deref(), Some("1 plus 2"));
        assert_eq!(value.examples[1].input, "0 0");
        assert_eq!(value.examples[1].explanation, None);
    }

    #[test]
    fn edge_cases_become_tests() {
        let text = "EDGE CASES:\nINPUT:\n0\nOUTPUT:\n0\nINPUT:\n-5\nOUTPUT:\n5\n";
        let value = parse_dsl(text).value.unwrap();
        assert_eq!(value.edge_cases.len(), 2);
        assert_eq!(value.edge_cases[1].input, "-5");
        assert_eq!(value.edge_cases[1].origin, crate::core::TestOrigin::Edge);
    }

    #[test]
    fn input_header_inside_body_is_not_a_section() {
        let text = "PURPOSE:\nread numbers\nINPUT:\nignored within purpose\nHINTS:\nuse a loop\n";
        let report = parse_dsl(text);
        let value = report.value.unwrap();
        assert!(value.purpose.as_deref().unwrap().contains("INPUT:"));
        assert_eq!(value.hints.as_deref(), Some("use a loop"));
    }

    #[test]
    fn test_blocks_with_separators() {
        let text = "TEST:\nINPUT:\n1 2\nOUTPUT:\n3\nTEST:\nINPUT:\n4 5\nOUTPUT:\n9\n";
        assert_eq!(
            parse_test_blocks(text),
            vec![("1 2".to_string(), "3".to_string()), ("4 5".to_string(), "9".to_string())]
        );
    }

    #[test]
    fn test_blocks_allow_empty_input() {
        let text = "INPUT:\nOUTPUT:\nhello\n";
        assert_eq!(parse_test_blocks(text), vec![(String::new(), "hello".to_string())]);
    }

    #[test]
    fn test_block_without_output_is_dropped() {
        let text = "INPUT:\n1\nOUTPUT:\n2\nINPUT:\n7\n";
        assert_eq!(parse_test_blocks(text), vec![("1".to_string(), "2".to_string())]);
    }

    #[test]
    fn multiline_bodies_survive() {
        let text = "INPUT:\n3\n1 2 3\nOUTPUT:\n6\n";
        assert_eq!(parse_test_blocks(text), vec![("3\n1 2 3".to_string(), "6".to_string())]);
    }

    #[test]
    fn parser_never_panics_on_noise() {
        for text in [
            "",
            ":",
            ":::",
            "PURPOSE:",
            "- : x",
            "INPUT:\nOUTPUT:",
            "\u{0}\u{1}PURPOSE:\n\u{2}",
            "EXAMPLES:\nEXPLANATION:\nfloating\n",
        ] {
            let _ = parse_dsl(text);
            let _ = parse_test_blocks(text);
        }
    }
}
