//! Deterministic offline stand-in for a chat-completion provider.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::Statement;
use crate::prompt::TemplateId;

const FRAMES: &[&str] = &[
    "What is a {s} {o}?",
    "Is {s} a kind of {o}?",
    "How is {s} related to {o}?",
    "What does {s} {p}?",
    "Which {o} is linked to {s} through {p}?",
    "Does every {s} have a {o}?",
    "What {p} does {s} have?",
    "What types of {o} exist?",
    "Is {s} a class?",
    "How do you measure your {s}?",
];

/// Numbered list of 2–5 questions about a statement. Count and frames are
/// drawn from a generator seeded by (seed, statement ordinal, template).
pub fn mock_generate(statement: &Statement, template_id: &TemplateId, seed: u64) -> String {
    let labels = statement
        .labels()
        .map(|l| l.map(String::from))
        .unwrap_or_else(|| statement.terms().map(|t| t.lexical.clone()));
    mock_generate_from_labels(&labels, statement.ordinal, template_id, seed)
}

pub(crate) fn mock_generate_from_labels(
    labels: &[String; 3],
    ordinal: usize,
    template_id: &TemplateId,
    seed: u64,
) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, ordinal as u64, template_key(template_id)));
    let count = rng.gen_range(2..=5);
    let mut frames: Vec<&str> = FRAMES.to_vec();
    frames.shuffle(&mut rng);
    let [s, p, o] = labels.each_ref().map(|l| humanize(l));

    let mut out = String::from("Here are some questions about the statement:\n");
    for (i, frame) in frames.iter().take(count).enumerate() {
        let q = frame.replace("{s}", &s).replace("{p}", &p).replace("{o}", &o);
        out.push_str(&format!("{}. {}\n", i + 1, q));
    }
    out
}

/// Underscores to spaces, whitespace collapsed, `?` removed so every frame
/// stays a single interrogative.
fn humanize(label: &str) -> String {
    let cleaned: String = label
        .chars()
        .map(|c| if c == '_' { ' ' } else { c })
        .filter(|&c| c != '?')
        .collect();
    let words: Vec<&str> = cleaned.split_whitespace().collect();
    if words.is_empty() {
        "thing".to_string()
    } else {
        words.join(" ")
    }
}

fn template_key(id: &TemplateId) -> u64 {
    match id {
        TemplateId::P1 => 1,
        TemplateId::P2 => 2,
        TemplateId::P3 => 3,
        TemplateId::Custom(name) => name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
        }),
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-model seed, so two mock models answer differently.
pub fn model_seed(seed: u64, model_name: &str) -> u64 {
    splitmix(
        seed ^ model_name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
        }),
    )
}

fn mix(seed: u64, ordinal: u64, template: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ ordinal) ^ template)
}
