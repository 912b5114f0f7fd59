use crate::dsl::RequirementDsl;

impl RequirementDsl {
    /// Renders the value back into section text, emitting only populated
    /// sections in the canonical order. The output is stable: equal values
    /// render byte-identically, and [`crate::dsl::parse_dsl`] reads it back
    /// to an equal value as long as the bodies are in normalized form
    /// (right-trimmed lines, no leading or trailing blank lines).
    pub fn render(&self) -> String {
        fn push_text(sections: &mut Vec<(&str, String)>, name: &'static str, value: &Option<String>) {
            if let Some(body) = value.as_deref() {
                if !body.trim().is_empty() {
                    sections.push((name, body.to_string()));
                }
            }
        }
        let mut sections: Vec<(&str, String)> = Vec::new();
        push_text(&mut sections, "BACKGROUND", &self.background);
        push_text(&mut sections, "PURPOSE", &self.purpose);
        if !self.key_concepts.is_empty() {
            let body = self
                .key_concepts
                .iter()
                .map(|c| format!("- {}: {}", c.term, c.definition))
                .collect::<Vec<_>>()
                .join("\n");
            sections.push(("KEY CONCEPTS", body));
        }
        push_text(&mut sections, "INPUT REQUIREMENTS", &self.input_requirements);
        push_text(&mut sections, "OUTPUT REQUIREMENTS", &self.output_requirements);
        if !self.examples.is_empty() {
            let body = self
                .examples
                .iter()
                .map(|e| {
                    let mut block = format!("INPUT:\n{}\nOUTPUT:\n{}", e.input, e.output);
                    if let Some(explanation) = &e.explanation {
                        block.push_str("\nEXPLANATION:\n");
                        block.push_str(explanation);
                    }
                    block
                })
                .collect::<Vec<_>>()
                .join("\n");
            sections.push(("EXAMPLES", body));
        }
        if !self.edge_cases.is_empty() {
            let body = self
                .edge_cases
                .iter()
                .map(|t| format!("INPUT:\n{}\nOUTPUT:\n{}", t.input, t.expected))
                .collect::<Vec<_>>()
                .join("\n");
            sections.push(("EDGE CASES", body));
        }
        if !self.apis.is_empty() {
            let body = self
                .apis
                .iter()
                .map(|a| format!("- {}: {}", a.name, a.functionality))
                .collect::<Vec<_>>()
                .join("\n");
            sections.push(("APIS", body));
        }
        push_text(&mut sections, "ERROR HANDLING", &self.error_handling);
        push_text(&mut sections, "HINTS", &self.hints);

        let mut out = String::new();
        for (i, (header, body)) in sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(header);
            out.push_str(":\n");
            out.push_str(body);
            out.push('\n');
        }
        out
    }
}
