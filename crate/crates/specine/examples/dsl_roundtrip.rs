//! The sectioned requirement format the lifter writes.
//!
//! A `RequirementDsl` value renders to labeled sections and parses back to
//! the same value; `dsl_diff` then pinpoints where two perceptions of a
//! problem disagree.
//!
//! Run with: cargo run --example dsl_roundtrip

use specine::dsl::{dsl_diff, parse_dsl, KeyConcept, RequirementDsl, WorkedExample};

fn perceived() -> RequirementDsl {
    RequirementDsl {
        background: None,
        purpose: Some("Sum the integers on one input line.".into()),
        key_concepts: vec![KeyConcept {
            term: "token".into(),
            definition: "a whitespace-separated integer".into(),
        }],
        input_requirements: Some("One line holding at least one integer.".into()),
        output_requirements: Some("Print the sum followed by a newline.".into()),
        examples: vec![WorkedExample {
            input: "1 2 3".into(),
            output: "6".into(),
            explanation: Some("1 + 2 + 3 = 6".into()),
        }],
        edge_cases: Vec::new(),
        apis: Vec::new(),
        error_handling: None,
        hints: None,
    }
}

fn main() {
    let value = perceived();
    let rendered = value.render();
    println!("rendered sections\n-----------------\n{rendered}");

    let report = parse_dsl(&rendered);
    let parsed = report.value.expect("rendered text parses back");
    println!("round trip equal: {}", parsed == value);
    println!("populated fields: {}", value.populated_fields().join(", "));

    let mut drifted = value.clone();
    drifted.output_requirements = Some("Print the product followed by a newline.".into());
    drifted.input_requirements = None;
    println!("\ndifferences against a drifted perception:");
    for diff in dsl_diff(&value, &drifted) {
        println!("  {}: {:?}", diff.field, diff.kind);
    }
}
