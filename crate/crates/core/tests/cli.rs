//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_retrofit-cq"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn generate(out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("generate")
        .arg("--ontology")
        .arg(fixture("videogame.nt"))
        .args(["--template", "P1", "--template", "P3"])
        .args([
            "--provider",
            "mock:gpt-3.5-turbo",
            "--provider",
            "mock:gpt-4",
            "--provider",
            "mock:llama-2-13b",
        ])
        .args(["--seed", "11"])
        .arg("--output-dir")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn extract_nt_and_ttl_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("nt"), dir.path().join("ttl"));
    let out = ok(bin()
        .arg("extract")
        .arg(fixture("videogame.nt"))
        .arg("--output-dir")
        .arg(&a)
        .output()
        .unwrap());
    assert!(String::from_utf8_lossy(&out.stderr).contains("20"));
    ok(bin()
        .arg("extract")
        .arg(fixture("videogame.ttl"))
        .arg("--output-dir")
        .arg(&b)
        .output()
        .unwrap());
    let tsv = read(a.join("statements.tsv"));
    assert_eq!(tsv.lines().count(), 21);
    assert_eq!(tsv, read(b.join("statements.tsv")));

    let out = ok(bin()
        .arg("extract")
        .arg(fixture("exclusions.nt"))
        .arg("--output-dir")
        .arg(&a)
        .output()
        .unwrap());
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    for n in ["9", "2", "3", "1"] {
        assert!(err.contains(n), "{err}");
    }
    assert_eq!(read(a.join("statements.tsv")).lines().count(), 4);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(generate(&a, &[]));
    ok(generate(&b, &[]));
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "questions_P1_gpt-3.5-turbo.csv",
            "questions_P1_gpt-4.csv",
            "questions_P1_llama-2-13b.csv",
            "questions_P3_gpt-3.5-turbo.csv",
            "questions_P3_gpt-4.csv",
            "questions_P3_llama-2-13b.csv",
        ]
    );
    for n in &names {
        let text = read(a.join(n));
        assert!(text.starts_with("Questions\n"), "{n}");
        assert!(text.lines().count() > 1, "{n}");
        assert_eq!(text, read(b.join(n)), "{n}");
    }
    assert_ne!(read(a.join(&names[0])), read(a.join(&names[1])));
}

#[test]
fn evaluate_perfect_match() {
    let dir = tempfile::tempdir().unwrap();
    let cands = dir.path().join("questions_P1_copy.csv");
    std::fs::copy(fixture("videogame_design_cqs.csv"), &cands).unwrap();
    let out = ok(bin()
        .arg("evaluate")
        .arg("--design-cqs")
        .arg(fixture("videogame_design_cqs.csv"))
        .arg("--ontology")
        .arg(fixture("videogame.nt"))
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap());
    assert!(String::from_utf8_lossy(&out.stdout).contains("copy"));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    let m = &report["cells"][0]["metrics"];
    assert_eq!(
        (m["precision"].as_f64(), m["recall"].as_f64(), m["f1"].as_f64()),
        (Some(1.0), Some(1.0), Some(1.0))
    );
    assert_eq!(report["cells"][0]["n_triples"], 20);

    let csv = ok(bin()
        .arg("report")
        .arg(dir.path())
        .args(["--format", "csv"])
        .output()
        .unwrap());
    assert_eq!(
        String::from_utf8(csv.stdout).unwrap(),
        read(dir.path().join("summary.csv"))
    );
    let json = ok(bin()
        .arg("report")
        .arg(dir.path().join("report.json"))
        .args(["--format", "json"])
        .output()
        .unwrap());
    let again: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(again, report);
}

#[test]
fn evaluate_counts_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("counts.json");
    std::fs::write(
        &fx,
        r#"[{"ontology": "vg", "template": "P1", "model": "gpt-3.5-turbo", "n_questions": 549, "n_triples": 363,
             "n_candidates": 375, "n_validated": 204, "n_unmatched": 8, "n_design": 66}]"#,
    )
    .unwrap();
    ok(bin()
        .arg("evaluate")
        .arg("--counts-fixture")
        .arg(&fx)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap());
    let summary = read(dir.path().join("summary.csv"));
    let row = summary.lines().nth(1).unwrap();
    assert!(
        row.starts_with("vg,P1,gpt-3.5-turbo,549,1.51,375,204,0.5440,0.9623,0.6951,"),
        "{row}"
    );
}

#[test]
fn evaluate_with_labels_only() {
    let dir = tempfile::tempdir().unwrap();
    let qs: Vec<String> = (0..206).map(|i| format!("What is thing number {i}?")).collect();
    let mut csv = String::from("Questions\n");
    let mut labels = String::from("question,verdict\n");
    for (i, q) in qs.iter().enumerate() {
        csv.push_str(&format!("\"{q}\"\n"));
        let v = if i < 170 {
            "valid"
        } else if i < 180 {
            "hindsight-valid"
        } else {
            "invalid"
        };
        labels.push_str(&format!("\"{q}\",{v}\n"));
    }
    std::fs::write(dir.path().join("questions_P1_llama-2-13b.csv"), csv).unwrap();
    std::fs::write(dir.path().join("labels.csv"), labels).unwrap();
    ok(bin()
        .arg("evaluate")
        .arg("--validation-labels")
        .arg(dir.path().join("labels.csv"))
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap());
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    let p = report["cells"][0]["label_precision"].as_f64().unwrap();
    assert!((p - 180.0 / 206.0).abs() < 1e-12);
    assert!(read(dir.path().join("summary.csv"))
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",0.8738"));
}

#[test]
fn filter_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("questions_P1_x.csv");
    std::fs::write(
        &input,
        "Questions\nIs Multiplayer a class?\nWhat is a Multiplayer game?\nWhat is a multiplayer game?\n",
    )
    .unwrap();
    let out = ok(bin().arg("filter").arg(&input).output().unwrap());
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 of 3"));
    assert_eq!(
        read(dir.path().join("questions_P1_x_filtered.csv")),
        "Questions\nWhat is a Multiplayer game?\n"
    );
    let refused = bin()
        .arg("filter")
        .arg(&input)
        .arg("--output")
        .arg(&input)
        .output()
        .unwrap();
    assert!(!refused.status.success());
}

#[test]
fn templates_list() {
    let out = ok(bin().args(["templates", "list"]).output().unwrap());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.ends_with("<statement>")));
}

#[test]
fn failed_cell_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env_remove("RETROFIT_API_KEY_OPENAI")
        .arg("generate")
        .arg("--ontology")
        .arg(fixture("videogame.nt"))
        .args(["--template", "P1"])
        .args([
            "--provider",
            "mock:gpt-4",
            "--provider",
            "gpt-4@http://127.0.0.1:9/v1/chat/completions",
        ])
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
    // The healthy cell is still written.
    assert!(dir.path().join("questions_P1_gpt-4.csv").exists());
}

#[test]
fn bad_input_is_an_error() {
    let out = bin().arg("extract").arg("/nonexistent/x.nt").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
