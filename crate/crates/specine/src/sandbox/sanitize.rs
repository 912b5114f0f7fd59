use crate::sandbox::SandboxError;

/// Reduces a raw model reply to the program inside it.
///
/// If the reply contains a fenced code block, the first block wins and
/// everything else is discarded. Otherwise leading and trailing lines that
/// read as prose are stripped and the interior is kept verbatim. Applying
/// the function to its own output changes nothing.
pub fn sanitize(raw: &str) -> Result<String, SandboxError> {
    let body = match extract_first_fence(raw) {
        Some(block) => block,
        None => strip_prose_edges(raw),
    };
    let body = strip_prose_edges(&body);
    if body.trim().is_empty() {
        return Err(SandboxError::EmptyAfterSanitize);
    }
    Ok(body)
}

fn extract_first_fence(raw: &str) -> Option<String> {
    let lines: Vec<&str> = raw.lines().collect();
    let open = lines.iter().position(|l| l.trim_start().starts_with("```"))?;
    let body: Vec<&str> = lines[open + 1..]
        .iter()
        .take_while(|l| !l.trim_start().starts_with("```"))
        .copied()
        .collect();
    Some(body.join("\n"))
}

fn strip_prose_edges(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.iter().position(|l| looks_like_code(l));
    let last = lines.iter().rposition(|l| looks_like_code(l));
    match (first, last) {
        (Some(a), Some(b)) => lines[a..=b].join("\n"),
        _ => String::new(),
    }
}

const CODE_STARTERS: [&str; 32] = [
    "def ", "class ", "import ", "from ", "return", "if ", "elif ", "else", "for ", "while ",
    "try", "except", "finally", "with ", "print", "pass", "break", "continue", "lambda", "global ",
    "assert ", "yield", "raise", "match ", "case ", "let ", "fn ", "const ", "#include", "read ",
    "echo ", "exit",
];

const CODE_WORDS: [&str; 4] = ["fi", "done", "esac", "end"];

fn looks_like_code(line: &str) -> bool {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return false;
    }
    if line.starts_with("    ") || line.starts_with('\t') {
        return true;
    }
    if trimmed.starts_with('#') || trimmed.starts_with("//") {
        return true;
    }
    if CODE_STARTERS.iter().any(|s| trimmed.starts_with(s)) {
        return true;
    }
    if CODE_WORDS.contains(&trimmed) {
        return true;
    }
    if trimmed.contains('=') && !trimmed.ends_with(':') && !trimmed.ends_with('.') {
        return true;
    }
    if (trimmed.contains('(') && trimmed.contains(')') || trimmed.contains(';') || trimmed.contains('{'))
        && !trimmed.ends_with('.')
        && !trimmed.ends_with(':')
    {
        return true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn takes_first_fenced_block() {
        let raw = "Sure thing!\n```python\nprint(42)\n```\nHope that helps.";
        assert_eq!(sanitize(raw).unwrap(), "print(42)");
    }

    #[test]
    fn later_fences_are_discarded() {
        let raw = "```python\nx = 1\nprint(x)\n```\nor alternatively\n```python\nprint(1)\n```";
        assert_eq!(sanitize(raw).unwrap(), "x = 1\nprint(x)");
    }

    #[test]
    fn strips_prose_without_fences() {
        let raw = "Here is the solution you asked for.\nx = int(input())\nprint(x * 2)\nLet me know if you need more.";
        assert_eq!(sanitize(raw).unwrap(), "x = int(input())\nprint(x * 2)");
    }

    #[test]
    fn is_idempotent() {
        let raw = "Sure!\n```\nn = int(input())\nprint(n)\n```\nEnjoy.";
        let once = sanitize(raw).unwrap();
        assert_eq!(sanitize(&once).unwrap(), once);
    }

    #[test]
    fn pure_prose_is_an_error() {
        assert!(matches!(
            sanitize("I cannot write that program, sorry."),
            Err(SandboxError::EmptyAfterSanitize)
        ));
    }

    #[test]
    fn empty_fence_is_an_error() {
        assert!(matches!(sanitize("```\n```"), Err(SandboxError::EmptyAfterSanitize)));
    }

    #[test]
    fn unclosed_fence_runs_to_the_end() {
        let raw = "```python\nprint(7)";
        assert_eq!(sanitize(raw).unwrap(), "print(7)");
    }

    #[test]
    fn interior_blank_lines_survive() {
        let raw = "```\ndef f():\n    return 1\n\nprint(f())\n```";
        assert_eq!(sanitize(raw).unwrap(), "def f():\n    return 1\n\nprint(f())");
    }
}
