//! End-to-end checks of the binary: subcommand flows and exit codes
//! (0 = checks pass, 1 = check failures, 2 = input errors).

use std::process::Command;

fn gtp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gtp"))
}

#[test]
fn run_then_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");

    let status = gtp()
        .args([
            "run",
            "--protocol",
            "bfqh",
            "--C",
            "1.0",
            "--forecaster",
            "random:seed={seed}",
            "--skeptic",
            "quad-comp:+",
            "--reality",
            "random:interval:seed={seed}",
            "--rounds",
            "500",
            "--seed",
            "11",
            "--out",
            trace.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let status = gtp().args(["verify", trace.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));

    // corrupt one capital field: verify must fail with exit 1
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let tampered = lines[3].replace("\"K\":", "\"K\":1e9,\"unused\":");
    assert_ne!(tampered, lines[3]);
    lines[3] = tampered;
    std::fs::write(&trace, lines.join("\n")).unwrap();
    let status = gtp().args(["verify", trace.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn input_errors_exit_2() {
    let status = gtp()
        .args(["run", "--protocol", "bfqh", "--skeptic", "no-such-strategy"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = gtp().args(["verify", "/no/such/file.jsonl"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // the negated compensator is invalid where hedge stakes must be nonnegative
    let status = gtp()
        .args(["run", "--protocol", "unbounded", "--skeptic", "quad-comp:-"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gilat_and_comply_pass() {
    let status = gtp()
        .args(["gilat", "--C", "1.0", "--a", "auto", "--rounds", "2000"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // a shift below the admissible threshold is an input error
    let status = gtp()
        .args(["gilat", "--C", "1.0", "--a", "3", "--rounds", "10"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = gtp()
        .args(["comply-demo", "--protocol", "unbounded", "--mode", "strong", "--rounds", "2000", "--seed", "5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}
