use std::path::Path;

use retrofit_cq::ingest::{filter_statements, load_ontology, ntriples, parse_ontology, turtle, IngestError, RdfFormat};

fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn corpus_round_trips() {
    let src = fixture("corpus200.nt");
    let parsed = ntriples::parse(&src).unwrap();
    assert_eq!(parsed.len(), 200);
    let written = ntriples::write(&parsed);
    assert_eq!(ntriples::parse(&written).unwrap(), parsed);
    // The corpus is already in canonical form.
    assert_eq!(written, src);
}

#[test]
fn corpus_blank_node_counts() {
    let raw = ntriples::parse(&fixture("corpus200.nt")).unwrap();
    let set = filter_statements(raw, "corpus200");
    // 40 blank subjects, 25 blank objects, 5 statements with both.
    assert_eq!(set.counts.parsed, 200);
    assert_eq!(set.counts.excluded_blank, 60);
    assert_eq!(set.counts.excluded_opaque, 0);
    assert_eq!(set.counts.kept, 140);
    assert!(set.counts.is_consistent());
    assert!(set.iter().enumerate().all(|(i, s)| s.ordinal == i));
}

#[test]
fn crafted_exclusions() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/exclusions.nt");
    let set = load_ontology(&path, None).unwrap();
    let c = &set.counts;
    assert_eq!(
        (
            c.parsed,
            c.excluded_blank,
            c.excluded_opaque,
            c.excluded_duplicate,
            c.kept
        ),
        (9, 2, 3, 1, 3)
    );
    let labels: Vec<[&str; 3]> = set.iter().map(|s| s.labels().unwrap()).collect();
    assert_eq!(labels[2], ["Player", "hasUsername", "alice"]);
}

#[test]
fn turtle_twin_matches_ntriples() {
    let nt = parse_ontology(&fixture("videogame.nt"), RdfFormat::Ntriples).unwrap();
    let ttl = turtle::parse(&fixture("videogame.ttl")).unwrap();
    assert_eq!(nt.len(), 20);
    assert_eq!(ttl, nt);
    let a = filter_statements(nt, "a");
    let b = filter_statements(ttl, "b");
    assert_eq!(a.statements, b.statements);
    assert_eq!(a.counts.kept, 20);
}

#[test]
fn errors_carry_locations() {
    let src = "<http://a.org/x> <http://a.org/p> <http://a.org/o> .\n<http://a.org/x> <http://a.org/p> \"open .\n";
    match ntriples::parse(src) {
        Err(IngestError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    match turtle::parse("@prefix ex: <http://e.org/> .\nex:a ex:p [ ex:q ex:r ] .\n") {
        Err(IngestError::Unsupported { line, column, .. }) => assert_eq!((line, column), (2, 11)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        load_ontology(Path::new("x.owl"), None),
        Err(IngestError::UnknownFormat(_))
    ));
}
