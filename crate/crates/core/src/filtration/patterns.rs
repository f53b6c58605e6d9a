use std::path::Path;

use regex::Regex;

use super::FiltrationError;

pub const DEFAULT_PRIMITIVE_LEXICON: &str = include_str!("../../data/primitive_lexicon.txt");
pub const DEFAULT_NARRATIVE_PATTERNS: &str = include_str!("../../data/narrative_patterns.txt");

/// Non-comment, non-blank lines of a pattern file.
pub fn parse_pattern_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn read_pattern_file(path: &Path) -> Result<Vec<String>, FiltrationError> {
    let text = std::fs::read_to_string(path).map_err(|source| FiltrationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_pattern_lines(&text))
}

/// Compiles one pattern line to a regex over normalized (lower-case,
/// single-spaced) question text.
pub fn compile_pattern(pattern: &str) -> Result<Regex, FiltrationError> {
    let bad = |e: regex::Error| FiltrationError::BadPattern {
        pattern: pattern.to_string(),
        message: e.to_string(),
    };
    if let Some(raw) = pattern.strip_prefix("re:") {
        return Regex::new(raw.trim()).map_err(bad);
    }
    let (anchored, body) = match pattern.strip_prefix('^') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, pattern),
    };
    let tokens: Vec<&str> = body.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(FiltrationError::BadPattern {
            pattern: pattern.to_string(),
            message: "empty pattern".into(),
        });
    }
    let parts: Vec<String> = tokens
        .iter()
        .map(|t| match *t {
            "<X>" | "<x>" => r"\S+(?: \S+){0,3}".to_string(),
            "..." => ".+?".to_string(),
            lit => regex::escape(&lit.to_lowercase()),
        })
        .collect();
    let word = |s: &str, first: bool| {
        let c = if first { s.chars().next() } else { s.chars().last() };
        c.is_some_and(|c| c.is_alphanumeric() || c == '_')
    };
    let mut re = String::new();
    if anchored {
        re.push('^');
    } else if word(tokens[0], true) {
        re.push_str(r"\b");
    }
    re.push_str(&parts.join(" "));
    if word(tokens[tokens.len() - 1], false) {
        re.push_str(r"\b");
    }
    Regex::new(&re).map_err(bad)
}

#[derive(Debug, Clone)]
pub struct PatternSet {
    sources: Vec<String>,
    compiled: Vec<Regex>,
}

impl PatternSet {
    pub fn compile(patterns: &[String]) -> Result<Self, FiltrationError> {
        let compiled = patterns.iter().map(|p| compile_pattern(p)).collect::<Result<_, _>>()?;
        Ok(PatternSet {
            sources: patterns.to_vec(),
            compiled,
        })
    }

    /// The first matching pattern, as written.
    pub fn first_match(&self, text: &str) -> Option<&str> {
        self.compiled
            .iter()
            .position(|re| re.is_match(text))
            .map(|i| self.sources[i].as_str())
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.first_match(text).is_some()
    }
}
