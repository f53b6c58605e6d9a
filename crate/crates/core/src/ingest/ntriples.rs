//! N-Triples reader and writer.
//!
//! One `<s> <p> <o> .` statement per line. Comments start with `#`.

use super::scanner::Scanner;
use super::term::{Statement, Term};
use super::IngestError;

pub fn parse(src: &str) -> Result<Vec<Statement>, IngestError> {
    let mut sc = Scanner::new(src);
    let mut out = Vec::new();
    loop {
        sc.skip_ws_and_comments();
        if sc.is_eof() {
            break;
        }
        let subject = match sc.peek() {
            Some('<') => Term::iri(sc.read_iriref()?),
            Some('_') => Term::blank(sc.read_blank_label()?),
            _ => return Err(sc.error("expected IRI or blank node as subject")),
        };
        sc.skip_inline_ws();
        let predicate = match sc.peek() {
            Some('<') => Term::iri(sc.read_iriref()?),
            _ => return Err(sc.error("expected IRI as predicate")),
        };
        sc.skip_inline_ws();
        let object = match sc.peek() {
            Some('<') => Term::iri(sc.read_iriref()?),
            Some('_') => Term::blank(sc.read_blank_label()?),
            Some('"') => read_literal(&mut sc)?,
            _ => return Err(sc.error("expected IRI, blank node or literal as object")),
        };
        sc.skip_inline_ws();
        if !sc.eat('.') {
            return Err(sc.error("expected '.' at end of statement"));
        }
        sc.skip_inline_ws();
        if sc.peek() == Some('#') {
            sc.skip_comment();
        }
        match sc.peek() {
            None | Some('\n') | Some('\r') => {}
            Some(_) => return Err(sc.error("unexpected content after '.'")),
        }
        let ordinal = out.len();
        out.push(Statement::new(subject, predicate, object, ordinal));
    }
    Ok(out)
}

fn read_literal(sc: &mut Scanner<'_>) -> Result<Term, IngestError> {
    let lexical = sc.read_string(false, false)?;
    if sc.peek() == Some('@') {
        let lang = sc.read_langtag()?;
        Ok(Term::lang_literal(lexical, lang))
    } else if sc.starts_with("^^") {
        sc.advance(2);
        let dt = sc.read_iriref()?;
        Ok(Term::typed_literal(lexical, dt))
    } else {
        Ok(Term::literal(lexical))
    }
}

/// Serializes statements as N-Triples, one per line.
pub fn write(statements: &[Statement]) -> String {
    let mut out = String::new();
    for st in statements {
        out.push_str(&st.to_ntriples());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TermKind;

    #[test]
    fn subclass_triple() {
        let src = "<http://ex.org/g#Multiplayer> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex.org/g#Achievement> .\n";
        let st = parse(src).unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].labels().unwrap(), ["Multiplayer", "subClassOf", "Achievement"]);
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# nothing here\n\n   \n").unwrap().is_empty());
    }

    #[test]
    fn blank_subject_is_reported_not_filtered() {
        let st = parse("_:b0 <http://ex.org/p> <http://ex.org/o> .").unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].subject.kind, TermKind::Blank);
        assert_eq!(st[0].subject.lexical, "b0");
        assert!(st[0].subject.label.is_none());
    }

    #[test]
    fn literals_keep_lexical_form() {
        let src = concat!(
            "<http://ex.org/a> <http://ex.org/name> \"Tab\\there \\\"q\\\" \\u00e9\" .\n",
            "<http://ex.org/a> <http://ex.org/n> \"42\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n",
            "<http://ex.org/a> <http://ex.org/l> \"chat\"@fr . # trailing comment\n",
        );
        let st = parse(src).unwrap();
        assert_eq!(st[0].object.lexical, "Tab\there \"q\" é");
        assert_eq!(st[0].object.label.as_deref(), Some("Tab\there \"q\" é"));
        assert_eq!(
            st[1].object.datatype.as_deref(),
            Some("http://www.w3.org/2001/XMLSchema#integer")
        );
        assert_eq!(st[2].object.language.as_deref(), Some("fr"));
        assert_eq!(st.iter().map(|s| s.ordinal).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn syntax_errors_carry_location() {
        let src = "<http://ex.org/a> <http://ex.org/p> <http://ex.org/o> .\n<http://ex.org/a> <http://ex.org/p> <http://ex.org/o>\n";
        match parse(src) {
            Err(IngestError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 54);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("<http://ex.org/a> \"lit\" <http://ex.org/o> ."),
            Err(IngestError::Syntax {
                line: 1,
                column: 19,
                ..
            })
        ));
        assert!(parse("<http://ex.org/a <http://ex.org/p> <http://ex.org/o> .").is_err());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let src = "<http://ex.org/a> <http://ex.org/p> \"multi\\nline \\\\ x\"@en-GB .\n_:x1 <http://ex.org/p> <http://ex.org/o%20k> .\n";
        let st = parse(src).unwrap();
        assert_eq!(parse(&write(&st)).unwrap(), st);
    }
}
