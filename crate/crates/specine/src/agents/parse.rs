use crate::core::{AlignedIngredient, AlignmentRule, TestCase, TestOrigin};
use crate::dsl::parse_test_blocks;

/// Reads the tester's reply into test cases with the given origin.
pub fn parse_test_cases(text: &str, origin: TestOrigin) -> Vec<TestCase> {
    parse_test_blocks(text)
        .into_iter()
        .map(|(input, expected)| TestCase::new(input, expected, origin))
        .collect()
}

/// Reads the aligner's reply: `INGREDIENT: <rule name>` headers, each
/// followed by the amendment text for that rule.
///
/// Unknown rule names are dropped with a warning, except in freeform mode,
/// where labels are free text and anything unrecognized lands on the
/// catch-all hints rule. Repeated rules keep the last occurrence.
pub fn parse_ingredients(text: &str, iteration: u32, freeform: bool) -> (Vec<AlignedIngredient>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut raw: Vec<(AlignmentRule, Vec<String>)> = Vec::new();
    let mut skipping = false;
    for line in text.lines() {
        let trimmed = line.trim();
        let header = trimmed
            .strip_prefix("INGREDIENT:")
            .or_else(|| trimmed.strip_prefix("ingredient:"))
            .or_else(|| trimmed.strip_prefix("Ingredient:"));
        if let Some(name) = header {
            match AlignmentRule::parse_name(name) {
                Some(rule) => {
                    raw.push((rule, Vec::new()));
                    skipping = false;
                }
                None if freeform => {
                    raw.push((AlignmentRule::HintsOrTips, Vec::new()));
                    skipping = false;
                }
                None => {
                    warnings.push(format!("unknown rule '{}' dropped", name.trim()));
                    skipping = true;
                }
            }
        } else if let Some((_, body)) = raw.last_mut() {
            if !skipping {
                body.push(line.to_string());
            }
        }
    }

    let mut ingredients: Vec<AlignedIngredient> = Vec::new();
    for (rule, body) in raw {
        let content = body.join("\n").trim().to_string();
        let ingredient = AlignedIngredient::new(rule, content, iteration);
        if let Some(pos) = ingredients.iter().position(|i| i.rule == rule) {
            warnings.push(format!(
                "rule {} proposed twice, keeping the later text",
                rule.display_name()
            ));
            ingredients.remove(pos);
        }
        ingredients.push(ingredient);
    }
    (ingredients, warnings)
}
