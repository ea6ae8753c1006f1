//! End-to-end checks of the binary: exit codes, witness reports, the
//! sample/certify/replay pipeline, and byte-identical output.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tilekit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().expect("binary finishes")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_reports_a_tiling() {
    let out = run(&["verify"], r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "{\"m\":12,\"tiling\":true,\"direct\":true,\"divisor_intersection\":true,\"polynomial\":true}\n"
    );
}

#[test]
fn verify_rejects_a_double_cover_with_witness() {
    let out = run(&["verify"], r#"{"M":4,"A":[0,1],"B":[0,1]}"#);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("\"tiling\":false"));
    assert!(text.contains("\"witness\":{\"residue\":1,\"count\":2}"));
}

#[test]
fn malformed_input_exits_2() {
    for bad in ["not json", r#"{"M":12,"A":[0,0,1]}"#, r#"{"M":0,"A":[0]}"#] {
        let out = run(&["verify"], bad);
        assert_eq!(out.status.code(), Some(2), "input {bad:?}");
    }
    let out = run(&["verify"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(2), "missing second factor");
}

#[test]
fn spectrum_and_flat_report_the_standard_tile() {
    let out = run(&["spectrum"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "{\"m\":12,\"size\":3,\"spectrum\":[3],\"t1_size\":3,\"t1\":true}\n"
    );
    let out = run(&["flat"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(stdout(&out), "{\"m\":12,\"spectrum\":[3],\"flat\":[0,4,8]}\n");
}

#[test]
fn t2_failure_names_the_missing_product() {
    let out = run(&["t2"], r#"{"M":36,"A":[0,1,4,5,6,11]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "{\"m\":36,\"t2\":false,\"witness\":6}\n");
    let out = run(&["t2"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn boxes_finds_the_first_bad_pair() {
    let out = run(&["boxes"], r#"{"M":4,"A":[0,1],"B":[0,1]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("\"witness\":{\"x\":0,\"y\":0,\"value\":\"3/2\"}"));
    let out = run(&["boxes"], r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"pairs\":144,\"all_one\":true"));
}

#[test]
fn split_and_slab_analyze_the_example_pair() {
    let pair = r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#;
    let out = run(&["split", "--direction", "1", "--root", "0"], pair);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"parity\":\"BA\""));
    let out = run(&["slab", "--direction", "1"], pair);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"consistent\":true"));
    let out = run(&["split", "--direction", "9", "--root", "0"], pair);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn isometry_applies_and_validates() {
    let out = run(&["isometry", "--dilate", "5"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"m\":12,\"image\":[0,5,10]}\n");
    let out = run(&["isometry", "--dilate", "4"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["isometry"], r#"{"M":12,"A":[0,1,2]}"#);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_counts_the_golden_corpus() {
    let out = run(&["enumerate", "--modulus", "12", "--count-only"], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "{\"m\":12,\"count\":97,\"nodes\":368,\"status\":\"complete\"}\n"
    );
}

#[test]
fn classify_summarizes_a_pair() {
    let out = run(&["classify"], r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"spectrum\":[3]"));
    assert!(text.contains("\"tiling\":true"));
}

#[test]
fn sample_certify_replay_pipeline_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let out = run(
        &["sample", "--modulus", "900", "--seed", "7", "--count", "3"],
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    let corpus = stdout(&out);
    assert_eq!(corpus.lines().count(), 3);
    std::fs::write(&path, &corpus).unwrap();

    let certified = run(&["certify", "--input", path.to_str().unwrap()], "");
    assert_eq!(certified.status.code(), Some(0));
    assert!(stdout(&certified).contains("{\"lines\":3,\"ok\":3}"));

    let replayed = run(&["replay", "--input", path.to_str().unwrap()], "");
    assert_eq!(replayed.status.code(), Some(0));
    assert_eq!(stdout(&replayed).lines().count(), 3);

    let tampered = corpus.replacen("\"A\":[4,", "\"A\":[3,", 1);
    if tampered != corpus {
        std::fs::write(&path, &tampered).unwrap();
        let bad = run(&["certify", "--input", path.to_str().unwrap()], "");
        assert_ne!(bad.status.code(), Some(0));
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let pair = r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#;
    let first = run(&["verify"], pair);
    let second = run(&["verify"], pair);
    assert_eq!(first.stdout, second.stdout);

    let s1 = run(&["sample", "--modulus", "900", "--seed", "41", "--count", "2"], "");
    let s2 = run(&["sample", "--modulus", "900", "--seed", "41", "--count", "2"], "");
    assert_eq!(s1.stdout, s2.stdout);
    assert_eq!(s1.status.code(), Some(0));

    let e1 = run(&["enumerate", "--modulus", "16"], "");
    let e2 = run(&["enumerate", "--modulus", "16"], "");
    assert_eq!(e1.stdout, e2.stdout);
    assert_eq!(e1.stdout.split(|&b| b == b'\n').count(), 291);
}

#[test]
fn text_format_stays_terse() {
    let out = run(
        &["verify", "--format", "text"],
        r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#,
    );
    assert_eq!(stdout(&out), "tiling\n");
    let out = run(
        &["verify", "--format", "text"],
        r#"{"M":4,"A":[0,1],"B":[0,1]}"#,
    );
    assert_eq!(stdout(&out), "not a tiling: residue 1 covered 2 times\n");
}
