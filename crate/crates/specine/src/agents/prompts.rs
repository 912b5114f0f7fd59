use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::core::AlignmentRule;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {name}: {detail}")]
    Invalid { name: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The prompt texts for all four agents plus the rule catalog and the fixed
/// amendment bodies used when rules are drawn at random.
///
/// Templates are configuration: the shipped versions are compiled in, and
/// [`PromptTemplates::from_dir`] overrides any of them from same-named files
/// so prompts can be tuned without rebuilding. A leading block of `#` lines
/// in a template file is treated as its version header and stripped.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    coder: String,
    tester: String,
    lifter: String,
    aligner: String,
    aligner_freeform: String,
    rules: String,
    woa: BTreeMap<AlignmentRule, String>,
}

const TEMPLATE_FILES: [&str; 7] = [
    "coder.txt",
    "tester.txt",
    "lifter.txt",
    "aligner.txt",
    "aligner_freeform.txt",
    "rules.txt",
    "woa_ingredients.txt",
];

fn strip_header(raw: &str) -> String {
    let body: Vec<&str> = raw
        .lines()
        .skip_while(|line| line.starts_with('#'))
        .collect();
    body.join("\n").trim().to_string()
}

fn parse_woa(raw: &str) -> Result<BTreeMap<AlignmentRule, String>, TemplateError> {
    let mut map = BTreeMap::new();
    let mut current: Option<(AlignmentRule, Vec<String>)> = None;
    for line in raw.lines() {
        if let Some(name) = line.strip_prefix("RULE:") {
            if let Some((rule, body)) = current.take() {
                map.insert(rule, body.join("\n").trim().to_string());
            }
            let rule = AlignmentRule::parse_name(name).ok_or_else(|| TemplateError::Invalid {
                name: "woa_ingredients.txt".into(),
                detail: format!("unknown rule '{}'", name.trim()),
            })?;
            current = Some((rule, Vec::new()));
        } else if let Some((_, body)) = current.as_mut() {
            body.push(line.to_string());
        }
    }
    if let Some((rule, body)) = current {
        map.insert(rule, body.join("\n").trim().to_string());
    }
    if map.is_empty() {
        return Err(TemplateError::Invalid {
            name: "woa_ingredients.txt".into(),
            detail: "no RULE entries".into(),
        });
    }
    Ok(map)
}

impl PromptTemplates {
    /// The compiled-in templates.
    pub fn builtin() -> Self {
        let woa = parse_woa(&strip_header(include_str!("../../templates/woa_ingredients.txt")))
            .expect("shipped amendment templates parse");
        PromptTemplates {
            coder: strip_header(include_str!("../../templates/coder.txt")),
            tester: strip_header(include_str!("../../templates/tester.txt")),
            lifter: strip_header(include_str!("../../templates/lifter.txt")),
            aligner: strip_header(include_str!("../../templates/aligner.txt")),
            aligner_freeform: strip_header(include_str!("../../templates/aligner_freeform.txt")),
            rules: strip_header(include_str!("../../templates/rules.txt")),
            woa,
        }
    }

    /// Starts from the built-in templates and overrides each one for which
    /// `dir` holds a same-named file.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let dir = dir.as_ref();
        let mut templates = Self::builtin();
        for file in TEMPLATE_FILES {
            let path = dir.join(file);
            if !path.exists() {
                continue;
            }
            let body = strip_header(&std::fs::read_to_string(&path)?);
            match file {
                "coder.txt" => templates.coder = body,
                "tester.txt" => templates.tester = body,
                "lifter.txt" => templates.lifter = body,
                "aligner.txt" => templates.aligner = body,
                "aligner_freeform.txt" => templates.aligner_freeform = body,
                "rules.txt" => templates.rules = body,
                "woa_ingredients.txt" => templates.woa = parse_woa(&body)?,
                _ => unreachable!(),
            }
        }
        Ok(templates)
    }

    pub fn coder_prompt(&self, spec: &str, lang: &str) -> String {
        fill(&self.coder, &[("spec", spec), ("lang", lang)])
    }

    pub fn tester_prompt(&self, spec: &str, k: u32) -> String {
        fill(&self.tester, &[("spec", spec), ("k", &k.to_string())])
    }

    pub fn lifter_prompt(&self, code: &str) -> String {
        fill(&self.lifter, &[("code", code), ("dsl_schema", crate::dsl::schema_text())])
    }

    pub fn aligner_prompt(&self, spec: &str, perception: &str, history: &str) -> String {
        fill(
            &self.aligner,
            &[
                ("spec", spec),
                ("perception", perception),
                ("rules", &self.rules),
                ("history", history),
            ],
        )
    }

    pub fn aligner_freeform_prompt(&self, spec: &str, perception: &str, history: &str) -> String {
        fill(
            &self.aligner_freeform,
            &[("spec", spec), ("perception", perception), ("history", history)],
        )
    }

    pub fn rules_text(&self) -> &str {
        &self.rules
    }

    /// The fixed amendment body for one rule, with the problem statement
    /// substituted for any `{spec}` placeholder. Rules without an entry
    /// (the edge-case rule, by design) return `None`.
    pub fn woa_ingredient(&self, rule: AlignmentRule, spec: &str) -> Option<String> {
        self.woa.get(&rule).map(|body| fill(body, &[("spec", spec)]))
    }

    /// Rules that have a fixed amendment body.
    pub fn woa_rules(&self) -> Vec<AlignmentRule> {
        self.woa.keys().copied().collect()
    }

    /// Digest over all template texts, recorded in run manifests so a trace
    /// pins down exactly which prompts produced it.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for part in [
            &self.coder,
            &self.tester,
            &self.lifter,
            &self.aligner,
            &self.aligner_freeform,
            &self.rules,
        ] {
            hasher.update(part.as_bytes());
            hasher.update([0]);
        }
        for (rule, body) in &self.woa {
            hasher.update(rule.display_name().as_bytes());
            hasher.update(body.as_bytes());
            hasher.update([0]);
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}
