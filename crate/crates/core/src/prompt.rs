//! Prompt templates and rendering of one prompt per (template, statement).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ingest::Statement;

pub const STATEMENT_SLOT: &str = "<statement>";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("statement {ordinal} has a term without a label")]
    MissingLabel { ordinal: usize },
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("template must contain exactly one {STATEMENT_SLOT} slot, found {0}")]
    BadSlotCount(usize),
    #[error("reading template {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Template identifier. `Custom` names a user-supplied template.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateId {
    P1,
    P2,
    P3,
    Custom(String),
}

impl TemplateId {
    pub const BUILTIN: [TemplateId; 3] = [TemplateId::P1, TemplateId::P2, TemplateId::P3];

    pub fn as_str(&self) -> &str {
        match self {
            TemplateId::P1 => "P1",
            TemplateId::P2 => "P2",
            TemplateId::P3 => "P3",
            TemplateId::Custom(name) => name,
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(TemplateId::P1),
            "P2" => Ok(TemplateId::P2),
            "P3" => Ok(TemplateId::P3),
            _ => Err(PromptError::UnknownTemplate(s.to_string())),
        }
    }
}

impl Serialize for TemplateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TemplateId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap_or(TemplateId::Custom(s)))
    }
}

/// A prompt body with one `<statement>` slot.
///
/// When `append_statement` is set the rendered statement is also concatenated
/// after the body, separated by one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: String,
    pub append_statement: bool,
}

const P1_BODY: &str = "Based on <statement>, generate a list of relevant question";
const P2_BODY: &str = "Based on the <statement>, generate a list of competency question. Definition of competency questions: the questions that outline the scope of an ontology and provide an idea about the knowledge that needs to be entailed in the ontology.";
const P3_BODY: &str = "As an ontology engineer, generate a list of competency questions based on the <statement>. Definition of competency questions: the questions that outline the scope of ontology and provide an idea about the knowledge that needs to be entailed in the ontology";

impl PromptTemplate {
    pub fn builtin(id: &TemplateId) -> Result<Self, PromptError> {
        let body = match id {
            TemplateId::P1 => P1_BODY,
            TemplateId::P2 => P2_BODY,
            TemplateId::P3 => P3_BODY,
            TemplateId::Custom(name) => return Err(PromptError::UnknownTemplate(name.clone())),
        };
        Ok(PromptTemplate {
            id: id.clone(),
            body: body.to_string(),
            append_statement: true,
        })
    }

    /// User template with a single `<statement>` slot; the statement is not
    /// appended.
    pub fn custom(name: impl Into<String>, body: impl Into<String>) -> Result<Self, PromptError> {
        let body = body.into();
        let slots = body.matches(STATEMENT_SLOT).count();
        if slots != 1 {
            return Err(PromptError::BadSlotCount(slots));
        }
        Ok(PromptTemplate {
            id: TemplateId::Custom(name.into()),
            body,
            append_statement: false,
        })
    }

    /// Loads a template file; the id is the file stem.
    pub fn from_file(path: &Path) -> Result<Self, PromptError> {
        let body = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom")
            .to_string();
        PromptTemplate::custom(name, body.trim_end_matches(['\n', '\r']))
    }

    pub fn render(&self, statement: &Statement) -> Result<PromptInstance, PromptError> {
        let rendered_statement = render_statement(statement)?;
        let mut rendered = self.body.replacen(STATEMENT_SLOT, &rendered_statement, 1);
        if self.append_statement {
            rendered.push(' ');
            rendered.push_str(&rendered_statement);
        }
        let labels = statement
            .labels()
            .map(|l| l.map(String::from))
            .ok_or(PromptError::MissingLabel {
                ordinal: statement.ordinal,
            })?;
        Ok(PromptInstance {
            template_id: self.id.clone(),
            statement_ordinal: statement.ordinal,
            rendered,
            labels,
        })
    }
}

/// The three shipped templates, in order P1, P2, P3.
pub fn list_templates() -> Vec<PromptTemplate> {
    TemplateId::BUILTIN
        .iter()
        .map(|id| PromptTemplate::builtin(id).expect("builtin template"))
        .collect()
}

/// A fully rendered prompt bound to its template and statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub template_id: TemplateId,
    pub statement_ordinal: usize,
    pub rendered: String,
    /// Subject, predicate and object labels of the source statement.
    pub labels: [String; 3],
}

/// `['subject', 'predicate', 'object']`
pub fn render_statement(statement: &Statement) -> Result<String, PromptError> {
    let [s, p, o] = statement.labels().ok_or(PromptError::MissingLabel {
        ordinal: statement.ordinal,
    })?;
    Ok(format!("['{s}', '{p}', '{o}']"))
}

pub fn render_prompt(template_id: &TemplateId, statement: &Statement) -> Result<PromptInstance, PromptError> {
    PromptTemplate::builtin(template_id)?.render(statement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Term;

    fn triple(s: &str, p: &str, o: &str) -> Statement {
        Statement::new(
            Term::iri(format!("http://ex.org/g#{s}")),
            Term::iri(format!("http://ex.org/g#{p}")),
            Term::iri(format!("http://ex.org/g#{o}")),
            0,
        )
    }

    #[test]
    fn statement_rendering() {
        assert_eq!(
            render_statement(&triple("Multiplayer", "subClassOf", "Achievement")).unwrap(),
            "['Multiplayer', 'subClassOf', 'Achievement']"
        );
        assert_eq!(
            render_statement(&triple("Hippocamp", "type", "Solar_System_Satellite")).unwrap(),
            "['Hippocamp', 'type', 'Solar_System_Satellite']"
        );
        assert_eq!(render_statement(&triple("A", "p", "A")).unwrap(), "['A', 'p', 'A']");
    }

    #[test]
    fn missing_label() {
        let st = Statement::new(Term::blank("b"), Term::iri("http://ex.org/p"), Term::literal("x"), 3);
        assert!(matches!(
            render_statement(&st),
            Err(PromptError::MissingLabel { ordinal: 3 })
        ));
    }

    #[test]
    fn p1_rendering_is_exact() {
        let p = render_prompt(&TemplateId::P1, &triple("Multiplayer", "subClassOf", "Achievement")).unwrap();
        assert_eq!(
            p.rendered,
            "Based on ['Multiplayer', 'subClassOf', 'Achievement'], generate a list of relevant question ['Multiplayer', 'subClassOf', 'Achievement']"
        );
    }

    #[test]
    fn p2_and_p3_wording() {
        let st = triple("Multiplayer", "subClassOf", "Achievement");
        let p2 = render_prompt(&TemplateId::P2, &st).unwrap().rendered;
        assert!(p2.contains("generate a list of competency question. Definition of competency questions: the questions that outline the scope of an ontology"));
        let p3 = render_prompt(&TemplateId::P3, &st).unwrap().rendered;
        assert!(p3.starts_with("As an ontology engineer, generate a list of competency questions based on the"));
        assert!(p3.ends_with("entailed in the ontology ['Multiplayer', 'subClassOf', 'Achievement']"));
    }

    #[test]
    fn templates_in_order_with_one_slot() {
        let ids: Vec<_> = list_templates().into_iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![TemplateId::P1, TemplateId::P2, TemplateId::P3]);
        for t in list_templates() {
            assert_eq!(t.body.matches(STATEMENT_SLOT).count(), 1);
        }
    }

    #[test]
    fn deterministic_and_injective() {
        let a = triple("A", "p", "B");
        let b = triple("A", "p", "C");
        for id in TemplateId::BUILTIN {
            assert_eq!(render_prompt(&id, &a).unwrap(), render_prompt(&id, &a).unwrap());
            assert_ne!(
                render_prompt(&id, &a).unwrap().rendered,
                render_prompt(&id, &b).unwrap().rendered
            );
        }
    }

    #[test]
    fn custom_templates() {
        let t = PromptTemplate::custom("mine", "Questions about <statement>?").unwrap();
        let p = t.render(&triple("A", "p", "B")).unwrap();
        assert_eq!(p.rendered, "Questions about ['A', 'p', 'B']?");
        assert_eq!(p.template_id.to_string(), "mine");
        assert!(matches!(
            PromptTemplate::custom("x", "no slot"),
            Err(PromptError::BadSlotCount(0))
        ));
        assert!(matches!(
            PromptTemplate::custom("x", "<statement> <statement>"),
            Err(PromptError::BadSlotCount(2))
        ));
        assert!("P4".parse::<TemplateId>().is_err());
        assert_eq!("p2".parse::<TemplateId>().unwrap(), TemplateId::P2);
    }
}
