use std::path::Path;
use std::process::{Command, Output};

fn cellprobe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellprobe"))
        .args(args)
        .current_dir(dir)
        .env_remove("CELLPROBE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build(dir: &Path, variant: &str, n: &str, file: &str) {
    let o = cellprobe(&["build-scheme", "--variant", variant, "--n", n, "--output", file], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_reference_scheme() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "precomputed-sums", "8", "precomputed_n8.scm");
    let o = cellprobe(&["verify", "--scheme", "precomputed_n8.scm"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("status: pass"));
}

#[test]
fn verify_catches_wrong_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellprobe(
        &["build-scheme", "--variant", "precomputed-sums", "--n", "3", "--table"],
        dir.path(),
    );
    let text = stdout(&o);
    // Answer 2 for Sum(3) on input 001 instead of 1.
    let broken = text.replacen("001 -> 0 0 1", "001 -> 0 0 2", 1);
    assert_ne!(broken, text, "table layout changed:\n{text}");
    std::fs::write(dir.path().join("bad.scm"), broken).unwrap();
    let o = cellprobe(&["verify", "--scheme", "bad.scm"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: fail"));
}

#[test]
fn catalan_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellprobe(&["brackets", "count", "--n", "8"], dir.path());
    assert_eq!(stdout(&o), "14\n");
    let o = cellprobe(&["brackets", "count", "--n", "10", "--enumerate", "--format", "machine"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("count=42") && text.contains("enumerated=42"), "{text}");
}

#[test]
fn bracket_match_and_walk() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellprobe(&["brackets", "match", "--x", "(()())", "--i", "2"], dir.path());
    assert!(stdout(&o).contains("match: 3"));
    let o = cellprobe(&["brackets", "walk", "--d", "3"], dir.path());
    assert!(stdout(&o).contains("unmatched open: 1/4"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn separator_report() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "two-level-rank", "16", "t.scm");
    let o = cellprobe(&["separator", "--scheme", "t.scm", "--gap", "4", "--format", "machine"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("checks.disjoint=pass"), "{text}");
    let o = cellprobe(&["separator", "--scheme", "t.scm", "--bracket", "--c", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = cellprobe(&["separator", "--scheme", "t.scm", "--bracket", "--c", "4", "--force"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("[bracket separator]"), "{text}");
    // At n = 16 the blocker limit n/lg^b n is below 1.
    assert!(text.contains("n/lg^b n >= 1: fail"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stretcher_and_entropy_sum() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("v.txt"), "1 2 3 5 8 13 21 34 55\n").unwrap();
    let o = cellprobe(&["stretcher", "--indices", "v.txt", "--n", "64", "--c", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("gap inequality: pass"));

    let o = cellprobe(
        &["entropy-sum", "--uniform", "261", "--p", "0", "--i", "256", "--j", "260", "--c", "64", "--format", "machine"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("checks.holds=pass"));
}

#[test]
fn entropy_and_goodset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "00 1/4\n01 1/4\n10 1/4\n11 1/4\n").unwrap();
    let o = cellprobe(&["entropy", "--dist", "d.txt", "--target", "2", "--given", "1"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("H: 2\n") && text.contains("H(target | given): 1\n"), "{text}");
    assert!(text.contains("TV to uniform: 0\n"));
    let o = cellprobe(&["goodset", "--mode", "blocks", "--dist", "d.txt", "--epsilon", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("G: {1, 2}"));
    let o = cellprobe(&["goodset", "--mode", "cells", "--dist", "d.txt", "--m", "2", "--q", "2", "--eta", "0.1"], dir.path());
    assert!(stdout(&o).contains("G: {0, 1}"));
}

#[test]
fn pipeline_runs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    build(dir.path(), "bracket-table", "8", "b.scm");
    let a = cellprobe(&["pipeline", "brackets", "--scheme", "b.scm", "--c", "4", "--format", "machine"], dir.path());
    let b = cellprobe(&["pipeline", "brackets", "--scheme", "b.scm", "--c", "4", "--format", "machine"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("chain.line_0=Pr_X[Match(i) > j and Match(j) < i] = 0\n"));
    let o = cellprobe(&["pipeline", "prefix", "--scheme", "b.scm", "--c", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cellprobe(&["verify"], dir.path()).status.code(), Some(2));
    assert_eq!(cellprobe(&["verify", "--scheme", "missing.scm"], dir.path()).status.code(), Some(2));
    assert_eq!(cellprobe(&["brackets", "count", "--n", "7"], dir.path()).status.code(), Some(2));
    assert_eq!(cellprobe(&["frobnicate"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("junk.scm"), "n: banana\n").unwrap();
    let o = cellprobe(&["verify", "--scheme", "junk.scm"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("junk.scm"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cellprobe"))
        .args(["build-scheme", "--variant", "raw-identity", "--n", "4", "--cell-alphabet", "4"])
        .env("CELLPROBE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let written = std::fs::read_to_string(dir.path().join("raw_identity_n4.scm")).unwrap();
    assert!(written.starts_with("n: 4\n"));
}

#[test]
fn scheme_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellprobe(&["build-scheme", "--variant", "bracket-table", "--n", "6", "--table"], dir.path());
    let first = stdout(&o);
    std::fs::write(dir.path().join("a.scm"), &first).unwrap();
    let o = cellprobe(&["verify", "--scheme", "a.scm"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = cellprobe(&["redundancy", "--scheme", "a.scm", "--format", "machine"], dir.path());
    assert!(stdout(&o).contains("|domain|=5"));
}
