//! Question filtration: drop malformed lines, near-duplicates, questions about
//! modelling primitives, and questions asking for opinions or narratives.

mod patterns;

use std::sync::OnceLock;

use rapidfuzz::distance::levenshtein;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use patterns::{
    compile_pattern, parse_pattern_lines, read_pattern_file, PatternSet, DEFAULT_NARRATIVE_PATTERNS,
    DEFAULT_PRIMITIVE_LEXICON,
};

use crate::gateway::GenerationRecord;
use crate::prompt::TemplateId;

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error("invalid pattern '{pattern}': {message}")]
    BadPattern { pattern: String, message: String },
    #[error("dedup threshold {0} outside [0, 100]")]
    BadThreshold(u32),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Malformed,
    Duplicate,
    ModellingPrimitive,
    SubjectiveNarrative,
}

impl RemovalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::Malformed => "malformed",
            RemovalReason::Duplicate => "duplicate",
            RemovalReason::ModellingPrimitive => "modelling_primitive",
            RemovalReason::SubjectiveNarrative => "subjective_narrative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Kept,
    Removed,
}

/// A generated question with its provenance and filtration outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCQ {
    pub text: String,
    pub statement_ordinal: usize,
    pub template_id: TemplateId,
    pub provider_id: String,
    pub status: CandidateStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removal_reason: Option<RemovalReason>,
}

impl CandidateCQ {
    pub fn new(
        text: impl Into<String>,
        statement_ordinal: usize,
        template_id: TemplateId,
        provider_id: impl Into<String>,
    ) -> Self {
        CandidateCQ {
            text: text.into(),
            statement_ordinal,
            template_id,
            provider_id: provider_id.into(),
            status: CandidateStatus::Kept,
            removal_reason: None,
        }
    }

    pub fn is_kept(&self) -> bool {
        self.status == CandidateStatus::Kept
    }

    fn remove(&mut self, reason: RemovalReason) {
        self.status = CandidateStatus::Removed;
        self.removal_reason = Some(reason);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Off,
    #[default]
    Lenient,
    Strict,
}

impl std::str::FromStr for Strictness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Strictness::Off),
            "lenient" => Ok(Strictness::Lenient),
            "strict" => Ok(Strictness::Strict),
            other => Err(format!("unknown strictness '{other}' (off|lenient|strict)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiltrationConfig {
    /// Token-sort ratio (0–100) at or above which two questions are duplicates.
    pub dedup_ratio_threshold: u32,
    pub primitive_lexicon: Vec<String>,
    pub narrative_patterns: Vec<String>,
    pub strictness: Strictness,
    /// Dedup across every output of a run instead of per output file.
    pub global_dedup: bool,
}

impl Default for FiltrationConfig {
    fn default() -> Self {
        FiltrationConfig {
            dedup_ratio_threshold: 90,
            primitive_lexicon: parse_pattern_lines(DEFAULT_PRIMITIVE_LEXICON),
            narrative_patterns: parse_pattern_lines(DEFAULT_NARRATIVE_PATTERNS),
            strictness: Strictness::Lenient,
            global_dedup: false,
        }
    }
}

/// Lower-case, trimmed, single-spaced, with trailing punctuation other than
/// `?` removed. Used for comparison only.
pub fn normalize_question(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed
        .trim_end_matches(|c: char| c.is_ascii_punctuation() && c != '?' || c.is_whitespace())
        .to_string()
}

/// Lower-cased alphanumeric tokens, sorted and space-joined.
pub fn token_sort_key(text: &str) -> String {
    let lower = text.to_lowercase();
    let mut tokens: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

/// 100 × (1 − levenshtein / longer length) over token-sorted forms.
pub fn token_sort_ratio(a: &str, b: &str) -> f64 {
    ratio_of_keys(&token_sort_key(a), &token_sort_key(b))
}

fn ratio_of_keys(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 100.0;
    }
    let d = levenshtein::distance(a.chars(), b.chars());
    100.0 * (1.0 - d as f64 / longest as f64)
}

pub fn is_duplicate(a: &str, b: &str, threshold: u32) -> bool {
    token_sort_ratio(a, b) >= threshold as f64
}

/// Compiled filtration rules.
#[derive(Debug, Clone)]
pub struct Filter {
    threshold: u32,
    strictness: Strictness,
    global_dedup: bool,
    primitive: PatternSet,
    narrative: PatternSet,
}

fn bare_primitive_keyword() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"\b(?:class(?:es)?|subclass(?:es)?|propert(?:y|ies)|ontolog(?:y|ies)|instances?|individuals?|triples?)\b",
        )
        .unwrap()
    })
}

fn second_interrogative() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[.?!] +(?:what|why|how|who|whom|whose|where|when|which|is|are|was|were|do|does|did|can|could|would|should|will|shall|may|might)\b[^.?!]*\?$")
            .unwrap()
    })
}

impl Filter {
    pub fn new(cfg: &FiltrationConfig) -> Result<Self, FiltrationError> {
        if cfg.dedup_ratio_threshold > 100 {
            return Err(FiltrationError::BadThreshold(cfg.dedup_ratio_threshold));
        }
        Ok(Filter {
            threshold: cfg.dedup_ratio_threshold,
            strictness: cfg.strictness,
            global_dedup: cfg.global_dedup,
            primitive: PatternSet::compile(&cfg.primitive_lexicon)?,
            narrative: PatternSet::compile(&cfg.narrative_patterns)?,
        })
    }

    pub fn global_dedup(&self) -> bool {
        self.global_dedup
    }

    /// `q` must be normalized.
    pub fn is_modelling_primitive(&self, q: &str) -> bool {
        match self.strictness {
            Strictness::Off => false,
            Strictness::Lenient => self.primitive.is_match(q),
            Strictness::Strict => self.primitive.is_match(q) || bare_primitive_keyword().is_match(q),
        }
    }

    /// `q` must be normalized. Disabled, like the primitive rule, when
    /// strictness is off.
    pub fn is_subjective_narrative(&self, q: &str) -> bool {
        self.strictness != Strictness::Off && (self.narrative.is_match(q) || second_interrogative().is_match(q))
    }

    /// Applies malformed → duplicate → modelling primitive → narrative, first
    /// match wins. Every input question comes back exactly once, in order.
    pub fn filter_questions(&self, records: &[GenerationRecord]) -> Vec<CandidateCQ> {
        let questions: Vec<CandidateCQ> = records
            .iter()
            .flat_map(|r| {
                r.questions.iter().map(|q| {
                    CandidateCQ::new(
                        q.clone(),
                        r.statement_ordinal,
                        r.template_id.clone(),
                        r.provider_id.clone(),
                    )
                })
            })
            .collect();
        self.filter_candidates(questions)
    }

    pub fn filter_candidates(&self, mut questions: Vec<CandidateCQ>) -> Vec<CandidateCQ> {
        let normalized: Vec<String> = questions.iter().map(|q| normalize_question(&q.text)).collect();
        for (q, norm) in questions.iter_mut().zip(&normalized) {
            q.status = CandidateStatus::Kept;
            q.removal_reason = None;
            if is_malformed(norm) {
                q.remove(RemovalReason::Malformed);
            }
        }
        self.dedup_in_place(&mut questions, &normalized);
        for (q, norm) in questions.iter_mut().zip(&normalized) {
            if !q.is_kept() {
                continue;
            }
            if self.is_modelling_primitive(norm) {
                q.remove(RemovalReason::ModellingPrimitive);
            } else if self.is_subjective_narrative(norm) {
                q.remove(RemovalReason::SubjectiveNarrative);
            }
        }
        questions
    }

    /// A question is a duplicate when it matches any earlier well-formed
    /// question; the first of each group stays.
    fn dedup_in_place(&self, questions: &mut [CandidateCQ], normalized: &[String]) {
        let keys: Vec<(String, usize)> = normalized
            .iter()
            .map(|n| {
                let k = token_sort_key(n);
                let len = k.chars().count();
                (k, len)
            })
            .collect();
        let mut earlier: Vec<usize> = Vec::new();
        let max_gap = |len: usize| -> usize {
            // ratio ≥ t needs |la − lb| ≤ (1 − t/100)·max(la, lb)
            ((100 - self.threshold.min(100)) as usize * len) / 100
        };
        for i in 0..questions.len() {
            if questions[i].removal_reason == Some(RemovalReason::Malformed) {
                continue;
            }
            let (ki, li) = &keys[i];
            let dup = earlier.iter().any(|&j| {
                let (kj, lj) = &keys[j];
                if li.abs_diff(*lj) > max_gap((*li).max(*lj)) {
                    return false;
                }
                ratio_of_keys(ki, kj) >= self.threshold as f64
            });
            if dup {
                questions[i].remove(RemovalReason::Duplicate);
            }
            earlier.push(i);
        }
    }
}

fn is_malformed(normalized: &str) -> bool {
    !normalized.ends_with('?') || !normalized.chars().any(char::is_alphanumeric)
}

/// Convenience wrapper: compiles `cfg` and filters.
pub fn filter_questions(
    records: &[GenerationRecord],
    cfg: &FiltrationConfig,
) -> Result<Vec<CandidateCQ>, FiltrationError> {
    Ok(Filter::new(cfg)?.filter_questions(records))
}

pub fn dedup(questions: Vec<CandidateCQ>, cfg: &FiltrationConfig) -> Result<Vec<CandidateCQ>, FiltrationError> {
    let filter = Filter::new(cfg)?;
    let mut questions = questions;
    let normalized: Vec<String> = questions.iter().map(|q| normalize_question(&q.text)).collect();
    filter.dedup_in_place(&mut questions, &normalized);
    Ok(questions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lenient() -> Filter {
        Filter::new(&FiltrationConfig::default()).unwrap()
    }

    fn cands(texts: &[&str]) -> Vec<CandidateCQ> {
        texts
            .iter()
            .map(|t| CandidateCQ::new(*t, 0, TemplateId::P1, "mock"))
            .collect()
    }

    fn reasons(out: &[CandidateCQ]) -> Vec<Option<RemovalReason>> {
        out.iter().map(|c| c.removal_reason).collect()
    }

    #[test]
    fn normalization() {
        assert_eq!(
            normalize_question("What is a  Multiplayer Achievement?"),
            "what is a multiplayer achievement?"
        );
        assert_eq!(normalize_question("WHAT IS X?"), "what is x?");
        assert_eq!(normalize_question("  what is x?  "), "what is x?");
        assert_eq!(normalize_question("What is x?."), "what is x?");
        assert_eq!(normalize_question("A statement."), "a statement");
        let n = normalize_question("what is x?");
        assert_eq!(normalize_question(&n), n);
    }

    #[test]
    fn duplicate_examples() {
        assert!(is_duplicate(
            "what is a multiplayer achievement?",
            "what is a multiplayer achievement?",
            90
        ));
        assert!(!is_duplicate(
            "what is a multiplayer achievement?",
            "how do multiplayer achievements compare to single player achievements?",
            90
        ));
        assert!(is_duplicate(
            "what is the username of the player?",
            "what is the player's username?",
            70
        ));
        assert!(!is_duplicate(
            "what is the username of the player?",
            "what is the player's username?",
            90
        ));
    }

    #[test]
    fn dedup_keeps_first() {
        let cfg = FiltrationConfig::default();
        let out = dedup(cands(&["What is X?", "what is x?"]), &cfg).unwrap();
        assert_eq!(reasons(&out), vec![None, Some(RemovalReason::Duplicate)]);
        let out = dedup(cands(&["What is X?", "Who made Y?", "Where is Z?"]), &cfg).unwrap();
        assert!(out.iter().all(CandidateCQ::is_kept));
    }

    #[test]
    fn primitive_examples() {
        let f = lenient();
        assert!(f.is_modelling_primitive("is multiplayer a class?"));
        assert!(!f.is_modelling_primitive("what is a multiplayer achievement?"));
        assert!(f.is_modelling_primitive("what specific class is under the achievement class in the ontology?"));
        assert!(f.is_modelling_primitive("what class does multiplayer belong to?"));
        assert!(!f.is_modelling_primitive("which players are in the top class?"));
    }

    #[test]
    fn strictness_levels() {
        let strict = Filter::new(&FiltrationConfig {
            strictness: Strictness::Strict,
            ..Default::default()
        })
        .unwrap();
        let off = Filter::new(&FiltrationConfig {
            strictness: Strictness::Off,
            ..Default::default()
        })
        .unwrap();
        let q = "which players are in the top class?";
        assert!(strict.is_modelling_primitive(q));
        assert!(!lenient().is_modelling_primitive(q));
        assert!(!off.is_modelling_primitive("is multiplayer a class?"));
        assert!(!off.is_subjective_narrative("in your opinion, what is fun?"));
        assert!(strict.is_modelling_primitive("what properties does a game have?"));
    }

    #[test]
    fn narrative_examples() {
        let f = lenient();
        assert!(f.is_subjective_narrative("could you envision a future where multiplayer games abandon traditional achievements in favour of more dynamic, player-driven goals and objectives? why or why not?"));
        assert!(f.is_subjective_narrative("can you design a multiplayer game mode that incorporates achievements as rewards for collaboration and teamwork?"));
        assert!(!f.is_subjective_narrative("what is the definition of a multiplayer achievement?"));
        assert!(f.is_subjective_narrative("describe the game. what is its genre?"));
        assert!(!f.is_subjective_narrative("what is the u.s. population of gamers?"));
    }

    #[test]
    fn malformed_and_order() {
        let out = lenient().filter_candidates(cands(&[
            "Here are some questions:",
            "Is Multiplayer a class?",
            "is multiplayer a class?",
            "In your opinion, what is fun?",
            "What is a Multiplayer Achievement?",
            "?",
        ]));
        assert_eq!(
            reasons(&out),
            vec![
                Some(RemovalReason::Malformed),
                Some(RemovalReason::ModellingPrimitive),
                Some(RemovalReason::Duplicate),
                Some(RemovalReason::SubjectiveNarrative),
                None,
                Some(RemovalReason::Malformed),
            ]
        );
        assert_eq!(out[4].text, "What is a Multiplayer Achievement?");
        assert!(out.iter().all(|c| c.is_kept() == c.removal_reason.is_none()));
    }

    #[test]
    fn chains_are_removed_against_any_earlier_question() {
        // b is within 85 of both a and c, but a and c are further apart.
        let a = "which achievements can a player unlock in a game?";
        let b = "which achievements can a player unlock in this game?";
        let c = "which achievements can each player unlock in this game?";
        assert!(is_duplicate(a, b, 85) && is_duplicate(b, c, 85) && !is_duplicate(a, c, 85));
        let cfg = FiltrationConfig {
            dedup_ratio_threshold: 85,
            ..Default::default()
        };
        let out = dedup(cands(&[a, b, c]), &cfg).unwrap();
        assert_eq!(
            reasons(&out),
            vec![None, Some(RemovalReason::Duplicate), Some(RemovalReason::Duplicate)]
        );
    }

    #[test]
    fn threshold_is_validated() {
        let cfg = FiltrationConfig {
            dedup_ratio_threshold: 101,
            ..Default::default()
        };
        assert!(matches!(Filter::new(&cfg), Err(FiltrationError::BadThreshold(101))));
    }
}
