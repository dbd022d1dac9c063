use std::io::Write;
use std::process::{Command, Output, Stdio};

fn ccsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccsp"))
        .args(args)
        .output()
        .expect("run ccsp")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn check_skip_holds() {
    let out = ccsp(&["check", "skip"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("holds: skip\n"));
}

#[test]
fn deadlock_has_single_trace() {
    let out = ccsp(&["traces", "a ||{a,b} b"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "<bot>\n");
}

#[test]
fn pair_traces_are_sorted_pairs() {
    let out = ccsp(&["traces", "a % r"]);
    assert_eq!(
        stdout(&out),
        "(<a,bot>, <bot>)\n(<a,ok>, <bot>)\n(<a,ok>, <r,bot>)\n(<a,ok>, <r,ok>)\n(<bot>, <bot>)\n"
    );
}

#[test]
fn derived_and_denoted_traces_agree() {
    for term in [
        "(a ; throw) ||{a} a",
        "[[ a % r ; throww ]]",
        "(a % r) ||{} (b % s)",
    ] {
        assert_eq!(
            stdout(&ccsp(&["traces", term])),
            stdout(&ccsp(&["dtraces", term])),
            "{term}"
        );
    }
}

#[test]
fn lts_lists_edges() {
    let out = stdout(&ccsp(&["lts", "a"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        [
            "a --a--> skip",
            "a --bot--> 0",
            "skip --ok--> 0",
            "skip --bot--> 0"
        ]
    );
}

#[test]
fn fuzz_small_campaign_passes() {
    let out = ccsp(&[
        "fuzz",
        "--count",
        "100",
        "--size",
        "6",
        "--alphabet",
        "a,b",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("failed 0"));
    let again = ccsp(&[
        "fuzz",
        "--count",
        "100",
        "--size",
        "6",
        "--alphabet",
        "a,b",
        "--seed",
        "1",
    ]);
    assert_eq!(stdout(&out), stdout(&again));
}

#[test]
fn fuzz_lemmas_pass() {
    for lemma in ["seq", "synstd", "nondead", "dead"] {
        let out = ccsp(&[
            "fuzz", "--count", "40", "--size", "6", "--seed", "2", "--lemma", lemma,
        ]);
        assert_eq!(out.status.code(), Some(0), "{lemma}: {}", stdout(&out));
    }
}

#[test]
fn mutant_is_reported_with_exit_one() {
    let out = ccsp(&[
        "fuzz",
        "--count",
        "20",
        "--size",
        "5",
        "--mutant",
        "drop-bottom",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("shrunk (size 1)"));
    assert_eq!(
        ccsp(&["check", "a", "--mutant", "drop-bottom"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(ccsp(&["check", "a ;"]).status.code(), Some(2));
    assert_eq!(ccsp(&["traces", "a ; skipp"]).status.code(), Some(2));
    assert_eq!(ccsp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ccsp(&["fuzz", "--size", "0"]).status.code(), Some(2));
    assert_eq!(
        ccsp(&["example", "carbroker", "--models", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn state_bound_exits_three() {
    assert_eq!(
        ccsp(&["dtraces", "a ||{} b", "--bound", "2"]).status.code(),
        Some(3)
    );
}

#[test]
fn step_session_follows_choices() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ccsp"))
        .args(["step", "a ; b"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"x\n1\n1\n1\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = stdout(&out);
    assert!(text.contains("enter a number between 1 and 2"));
    assert!(text.trim_end().ends_with("trace: <a,b,ok>"), "{text}");
}

#[test]
fn step_reports_installed_compensation() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ccsp"))
        .args(["step", "a % r ; b % s"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1\n1\n1\n").unwrap();
    let text = stdout(&child.wait_with_output().unwrap());
    assert!(text.contains("trace: <a,b,ok>"));
    assert!(text.trim_end().ends_with("compensation: (s ; r)"), "{text}");
}

#[test]
fn carbroker_example_prints_system_and_traces() {
    let out = ccsp(&["example", "carbroker", "--models", "1", "--quotes", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("system: "));
    assert!(text.contains("<order.m1,rfq,quote.m1.q1,reqLoan.m1.q1,reply.yes,ack.yes,ok>"));
}
