use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::StatementSet;

/// Lower-cased label tokens of an ontology.
pub type Vocabulary = HashSet<String>;

/// Splits a label on underscores, non-alphanumerics and camelCase humps:
/// `hasMultiplayer_Achievement` gives `has`, `multiplayer`, `achievement`.
pub fn split_label(label: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in label.split(|c: char| !c.is_alphanumeric()).filter(|c| !c.is_empty()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower)
                || (prev.is_alphabetic() && cur.is_ascii_digit())
                || (prev.is_ascii_digit() && cur.is_alphabetic());
            if boundary {
                out.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
    out
}

/// Vocabulary of every IRI and literal label in a statement set.
pub fn label_vocabulary(set: &StatementSet) -> Vocabulary {
    let mut vocab = Vocabulary::new();
    for st in set.iter() {
        for term in st.terms() {
            let text = term.label.as_deref().unwrap_or(&term.lexical);
            vocab.extend(split_label(text));
        }
    }
    vocab
}

const STOP: &[&str] = &[
    "a", "about", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "been", "being", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "each", "either", "every", "for", "from", "had", "has", "have",
    "he", "her", "here", "his", "how", "i", "if", "in", "into", "is", "it", "its", "many", "may", "me", "might",
    "more", "much", "must", "my", "no", "not", "of", "on", "one", "or", "other", "our", "over", "same", "shall", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this",
    "those", "to", "under", "up", "us", "was", "we", "were", "what", "when", "where", "whether", "which", "while",
    "who", "whom", "whose", "why", "will", "with", "would", "you", "your", "exist", "exists", "kind", "kinds", "type",
    "types", "list", "get", "give", "example", "examples", "belong", "belongs", "top", "average", "total", "most",
    "least", "number",
];

fn in_vocabulary(token: &str, vocab: &Vocabulary) -> bool {
    let t = token.to_lowercase();
    if vocab.contains(&t) {
        return true;
    }
    let mut stems = Vec::new();
    if let Some(s) = t.strip_suffix("ies") {
        stems.push(format!("{s}y"));
    }
    if let Some(s) = t.strip_suffix("es") {
        stems.push(s.to_string());
    }
    if let Some(s) = t.strip_suffix('s') {
        stems.push(s.to_string());
    }
    stems.push(format!("{t}s"));
    stems.iter().any(|s| vocab.contains(s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingResult {
    pub cq_text: String,
    pub ungrounded_terms: Vec<String>,
    pub grounded: bool,
}

/// Reports the CQ's content terms that never occur among the ontology's
/// labels. Content terms are the tokens outside the stop list, plus every
/// capitalized token that is not the opening word. Plural and singular
/// forms count as the same term; numbers are ignored.
pub fn grounding_check(cq: &str, vocabulary: &Vocabulary) -> GroundingResult {
    let mut ungrounded: Vec<String> = Vec::new();
    let tokens = cq
        .split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter(|t| !t.is_empty());
    for (i, raw) in tokens.enumerate() {
        let tok = raw.trim_matches('\'').trim_end_matches("'s");
        if tok.is_empty() || tok.chars().all(|c| c.is_ascii_digit()) {
            continue;
        }
        let capitalized = i > 0 && tok.chars().next().is_some_and(char::is_uppercase);
        let stop = STOP.contains(&tok.to_lowercase().as_str());
        if stop && !capitalized {
            continue;
        }
        let grounded = in_vocabulary(tok, vocabulary)
            || split_label(tok)
                .iter()
                .all(|part| in_vocabulary(part, vocabulary) || STOP.contains(&part.as_str()));
        if !grounded && !ungrounded.iter().any(|u| u == tok) {
            ungrounded.push(tok.to_string());
        }
    }
    GroundingResult {
        cq_text: cq.to_string(),
        grounded: ungrounded.is_empty(),
        ungrounded_terms: ungrounded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchedCategory {
    /// Needs counting, ranking or arithmetic over the data.
    Aggregation,
    /// Mentions something absent from the ontology.
    Ungrounded,
}

fn aggregation_keywords() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(?:top\s+(?:\d+|one|two|three|four|five|ten)|how\s+many|average|total|most|least)\b")
            .unwrap()
    })
}

/// Heuristic reasons a design CQ may have gone unmatched; possibly empty.
pub fn categorize_unmatched(cq: &str, vocabulary: &Vocabulary) -> BTreeSet<UnmatchedCategory> {
    let mut cats = BTreeSet::new();
    if aggregation_keywords().is_match(cq) {
        cats.insert(UnmatchedCategory::Aggregation);
    }
    if !grounding_check(cq, vocabulary).grounded {
        cats.insert(UnmatchedCategory::Ungrounded);
    }
    cats
}
