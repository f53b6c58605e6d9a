use std::sync::OnceLock;

use regex::Regex;

fn enumeration_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:\d+\s*[.)]|[-*•])\s*").unwrap())
}

const QUOTES: &[char] = &['"', '\'', '“', '”', '‘', '’', '`'];

/// Pulls the questions out of a model response.
///
/// Each line is stripped of enumeration markers (`1.`, `1)`, `-`, `*`, `•`)
/// and surrounding quotes, cut at its first `?`, and kept only if something
/// readable precedes that `?`. Lines without a `?` (preambles, commentary)
/// are dropped. Internal whitespace runs collapse to one space.
pub fn extract_questions(text: &str) -> Vec<String> {
    text.lines().filter_map(clean_line).collect()
}

fn clean_line(line: &str) -> Option<String> {
    let mut s = line.trim();
    loop {
        let before = s;
        if let Some(m) = enumeration_marker().find(s) {
            s = s[m.end()..].trim_start();
        }
        s = strip_unbalanced_leading_quote(s).trim();
        if s == before {
            break;
        }
    }
    let end = s.find('?')?;
    let question = &s[..=end];
    let collapsed = question.split_whitespace().collect::<Vec<_>>().join(" ");
    let body = collapsed.trim_end_matches('?');
    if !body.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some(collapsed)
}

/// Drops an opening quote that has no closing partner before the first `?`,
/// as in `"What is X?"`. Quotes that enclose a word inside the question stay.
fn strip_unbalanced_leading_quote(s: &str) -> &str {
    let Some(first) = s.chars().next() else {
        return s;
    };
    if !QUOTES.contains(&first) {
        return s;
    }
    let rest = &s[first.len_utf8()..];
    let upto = rest.find('?').map(|i| &rest[..i]).unwrap_or(rest);
    let closer = match first {
        '“' => '”',
        '‘' => '’',
        c => c,
    };
    if upto.contains(closer) && !upto.trim_end().ends_with(closer) {
        s
    } else {
        rest
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_list() {
        let text = "1. What is a Multiplayer Achievement?\n2. How do Multiplayer Achievements compare to Single Player Achievements?";
        assert_eq!(
            extract_questions(text),
            vec![
                "What is a Multiplayer Achievement?",
                "How do Multiplayer Achievements compare to Single Player Achievements?"
            ]
        );
    }

    #[test]
    fn preamble_dropped() {
        assert_eq!(
            extract_questions("Sure! Here are questions:\n- What class does Multiplayer belong to?"),
            vec!["What class does Multiplayer belong to?"]
        );
    }

    #[test]
    fn empty_response() {
        assert!(extract_questions("").is_empty());
        assert!(extract_questions("No questions today.\n\n").is_empty());
    }

    #[test]
    fn markers_quotes_and_whitespace() {
        let text = "  3)   \"Does every   player have a username?\"  \n* • Which  concepts?\n10. ?\n- '?'";
        assert_eq!(
            extract_questions(text),
            vec!["Does every player have a username?", "Which concepts?"]
        );
    }

    #[test]
    fn second_sentence_discarded() {
        let text = "1. How do players typically earn this achievement in the game? Are there specific requirements or challenges that must be completed?";
        assert_eq!(
            extract_questions(text),
            vec!["How do players typically earn this achievement in the game?"]
        );
    }

    #[test]
    fn inner_quotes_survive() {
        let q = "What is the relationship between a \"multiplayer\" and an \"achievement\" in this context?";
        assert_eq!(extract_questions(&format!("4. {q}")), vec![q]);
        assert_eq!(
            extract_questions("\"Multiplayer\" means what?"),
            vec!["\"Multiplayer\" means what?"]
        );
    }

    #[test]
    fn idempotent_on_own_output() {
        let text = "Intro:\n1. What is X?\n2) \"Is Y a Z?\"\n- Why   not?  Because.";
        let once = extract_questions(text);
        let twice = extract_questions(&once.join("\n"));
        assert_eq!(once, twice);
    }
}
