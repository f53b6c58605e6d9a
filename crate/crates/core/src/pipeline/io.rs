use std::io::Write;
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::ingest::StatementSet;

pub const QUESTIONS_HEADER: &str = "Questions";

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| PipelineError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| PipelineError::io(path, e))?;
    tmp.persist(path).map_err(|e| PipelineError::io(path, e.error))?;
    Ok(())
}

/// Replaces characters that are unsafe in file names on common filesystems
/// (`/ \ : * ? " < > |`, control characters) with `_`. Everything else,
/// dots and dashes included, is kept verbatim.
pub fn sanitize_component(s: &str) -> String {
    let out: String = s
        .chars()
        .map(|c| match c {
            '/' | '\\' | ':' | '*' | '?' | '"' | '<' | '>' | '|' => '_',
            c if c.is_control() => '_',
            c => c,
        })
        .collect();
    match out.as_str() {
        "" => "_".to_string(),
        "." | ".." => out.replace('.', "_"),
        _ => out,
    }
}

/// `questions_<template>_<model>.csv`.
pub fn questions_filename(template: &str, model: &str) -> String {
    format!(
        "questions_{}_{}.csv",
        sanitize_component(template),
        sanitize_component(model)
    )
}

/// Splits a questions file name back into (template, model). The template
/// is everything up to the first `_` after the prefix.
pub fn parse_questions_filename(name: &str) -> Option<(String, String)> {
    let stem = name.strip_prefix("questions_")?.strip_suffix(".csv")?;
    let (t, m) = stem.split_once('_')?;
    (!t.is_empty() && !m.is_empty()).then(|| (t.to_string(), m.to_string()))
}

pub fn questions_csv<S: AsRef<str>>(questions: &[S]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([QUESTIONS_HEADER]).expect("write to Vec");
    for q in questions {
        w.write_record([q.as_ref()]).expect("write to Vec");
    }
    w.into_inner().expect("flush to Vec")
}

pub fn write_questions_csv<S: AsRef<str>>(path: &Path, questions: &[S]) -> Result<(), PipelineError> {
    atomic_write(path, &questions_csv(questions))
}

/// Reads a one-column questions CSV whose header is `Questions`.
pub fn read_questions_csv(path: &Path) -> Result<Vec<String>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let text = text.trim_start_matches('\u{feff}');
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))?
        .get(0)
        .map(str::trim)
        .map(String::from);
    if header.as_deref() != Some(QUESTIONS_HEADER) {
        return Err(PipelineError::Format(format!(
            "{}: first line must be the header `{QUESTIONS_HEADER}`",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))?;
        if let Some(q) = rec.get(0).filter(|q| !q.trim().is_empty()) {
            out.push(q.to_string());
        }
    }
    Ok(out)
}

fn tsv_field(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

/// One row per statement: ordinal, the three labels, the three terms
/// (IRIs, or the lexical form of a literal). Tabs, newlines and backslashes
/// inside fields are backslash-escaped.
pub fn statements_tsv(set: &StatementSet) -> String {
    let mut out = String::from("ordinal\tsubject_label\tpredicate_label\tobject_label\tsubject\tpredicate\tobject\n");
    for st in set.iter() {
        let labels = st.labels().unwrap_or(["", "", ""]);
        let fields = [
            st.ordinal.to_string(),
            tsv_field(labels[0]),
            tsv_field(labels[1]),
            tsv_field(labels[2]),
            tsv_field(&st.subject.lexical),
            tsv_field(&st.predicate.lexical),
            tsv_field(&st.object.lexical),
        ];
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}

/// Output directory per ontology: the root itself for a single ontology,
/// otherwise one subdirectory named after each file stem (suffixed `-2`,
/// `-3`, ... on clashes).
pub fn ontology_dirs(root: &Path, ontologies: &[PathBuf]) -> Vec<PathBuf> {
    if ontologies.len() == 1 {
        return vec![root.to_path_buf()];
    }
    let mut used: Vec<String> = Vec::new();
    ontologies
        .iter()
        .map(|p| {
            let stem = sanitize_component(
                &p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            );
            let mut name = stem.clone();
            let mut n = 2;
            while used.contains(&name) {
                name = format!("{stem}-{n}");
                n += 1;
            }
            used.push(name.clone());
            root.join(name)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filenames() {
        assert_eq!(
            questions_filename("P1", "gpt-3.5-turbo"),
            "questions_P1_gpt-3.5-turbo.csv"
        );
        assert_eq!(
            questions_filename("P2", "org/model:7b"),
            "questions_P2_org_model_7b.csv"
        );
        assert_eq!(
            parse_questions_filename("questions_P1_gpt-3.5-turbo.csv"),
            Some(("P1".into(), "gpt-3.5-turbo".into()))
        );
        assert_eq!(
            parse_questions_filename("questions_P1_llama_2_70b.csv").unwrap().1,
            "llama_2_70b"
        );
        assert_eq!(parse_questions_filename("report.csv"), None);
        assert_eq!(sanitize_component(".."), "__");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let qs = ["What is X?", "Is \"Y\", or Z, a thing?"];
        write_questions_csv(&path, &qs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("Questions\n"));
        assert_eq!(read_questions_csv(&path).unwrap(), qs);
        std::fs::write(&path, "question\nWhat?\n").unwrap();
        assert!(read_questions_csv(&path).is_err());
    }

    #[test]
    fn directories() {
        let root = Path::new("out");
        assert_eq!(ontology_dirs(root, &["a/x.nt".into()]), vec![PathBuf::from("out")]);
        assert_eq!(
            ontology_dirs(root, &["a/x.nt".into(), "b/x.ttl".into(), "y.nt".into()]),
            vec![PathBuf::from("out/x"), PathBuf::from("out/x-2"), PathBuf::from("out/y")]
        );
    }
}
