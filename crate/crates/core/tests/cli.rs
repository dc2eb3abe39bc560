//! End-to-end checks of the `aae-tagger` binary: exit codes, output shapes,
//! and seeded determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aae-tagger"))
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn tag_negation_reports_on_labeled_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.tsv");
    write(
        &input,
        "id\ttext\tmultiple_negation\n\
         s1\tI ain't step on no dog.\t1\n\
         s2\tI am usually in my office by 7:30.\t0\n\
         s3\tBecause he ain't been back to finish yet.\t0\n\
         s4\tWe was in Pentecost holiness and I wasn't allowed to smoke.\t0\n\
         s5\tI didn't ask you not to come\t0\n",
    );
    let out = bin()
        .args(["tag-negation", "--input", input.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("s1\t1"), "positive sentence tagged:\n{text}");
    assert!(text.contains("s2\t0"), "negative sentence tagged:\n{text}");
    // documented rule limitation shows up as the one false positive
    assert!(text.contains("s5\t1"), "pinned false positive:\n{text}");
    assert!(text.contains("F1w"), "gold column triggers a report:\n{text}");
}

#[test]
fn tag_negation_empty_input_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.tsv");
    write(&input, "id\ttext\n");
    let out = bin()
        .args(["tag-negation", "--input", input.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
}

#[test]
fn tag_negation_missing_lexicon_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.tsv");
    write(&input, "id\ttext\ns1\tNo dog never barked.\n");
    let out = bin()
        .args([
            "tag-negation",
            "--input",
            input.to_str().unwrap(),
            "--lexicon",
            dir.path().join("nope.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn train_habitual_rejects_single_fold() {
    let out = bin()
        .args(["train-habitual", "--folds", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn bias_recency_short_trace_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let mut lines = String::new();
    for i in 0..4 {
        lines.push_str(&format!(
            "{{\"id\":\"t{i}\",\"predicted\":1,\"gold\":0,\"batch\":0,\"position\":{i}}}\n"
        ));
    }
    write(&trace, &lines);
    let out = bin()
        .args(["bias", "recency", "--trace", trace.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("shorter than window"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn bias_formality_missing_flags_lists_ids() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let mut lines = String::new();
    for i in 0..10 {
        lines.push_str(&format!(
            "{{\"id\":\"t{i}\",\"predicted\":{},\"gold\":{},\"batch\":0,\"position\":{i}}}\n",
            i % 2,
            (i + 1) % 2
        ));
    }
    write(&trace, &lines);
    let flags = dir.path().join("flags.tsv");
    // covers t0..t4 only
    let mut flag_rows = String::from("id\tformality\n");
    for i in 0..5 {
        flag_rows.push_str(&format!("t{i}\t{}\n", i % 2));
    }
    write(&flags, &flag_rows);
    let out = bin()
        .args([
            "bias",
            "formality",
            "--trace",
            trace.to_str().unwrap(),
            "--flags",
            flags.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("t5") && err.contains("t9"), "stderr: {err}");
}

#[test]
fn synth_corpus_and_augment_are_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    for path in [&a, &b] {
        let out = bin()
            .args([
                "synth-corpus",
                "--feature",
                "habitual-be",
                "--count",
                "200",
                "--seed",
                "7",
                "--output",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let aug1 = bin()
        .args(["augment", "--count", "50", "--seed", "11"])
        .output()
        .unwrap();
    let aug2 = bin()
        .args(["augment", "--count", "50", "--seed", "11"])
        .output()
        .unwrap();
    assert!(aug1.status.success(), "stderr: {}", stderr(&aug1));
    assert_eq!(stdout(&aug1), stdout(&aug2));
    assert_eq!(stdout(&aug1).lines().count(), 51, "header plus 50 rows");
}

#[test]
fn bias_ordering_emits_24_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("probes.tsv");
    let mut rows = String::from("id\ttext\thabitual_be\n");
    for i in 0..5 {
        rows.push_str(&format!("p{i}\tThey be working late.\t1\n"));
    }
    for i in 5..10 {
        rows.push_str(&format!("p{i}\tShe is working now.\t0\n"));
    }
    write(&input, &rows);
    let plan = dir.path().join("plan.json");
    let out = bin()
        .args([
            "bias",
            "ordering",
            "--input",
            input.to_str().unwrap(),
            "--output",
            plan.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(parsed.as_array().map(|a| a.len()), Some(24));
}

#[test]
fn llm_run_writes_manifest_next_to_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.tsv");
    let mut rows = String::from("id\ttext\thabitual_be\n");
    for i in 0..20 {
        rows.push_str(&format!("s{i}\tThey be singing all day.\t1\n"));
    }
    write(&input, &rows);
    let trace = dir.path().join("trace.jsonl");
    let out = bin()
        .args([
            "llm-run",
            "--input",
            input.to_str().unwrap(),
            "--mock",
            "--batch-size",
            "10",
            "--trace-out",
            trace.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let manifest = dir.path().join("trace.jsonl.manifest.json");
    assert!(manifest.exists(), "manifest written alongside the trace");
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(
        parsed.get("seeds").and_then(|s| s.as_array()).map(|s| !s.is_empty()),
        Some(true),
        "manifest records the seed"
    );
}
