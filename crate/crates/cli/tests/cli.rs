//! End-to-end tests of the `tsa` binary: exit codes, formats, and command
//! wiring, driven through the compiled executable.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn tsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("tsa-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn validate_accepts_the_fixtures() {
    for name in ["anbncndn.tsa", "aibjcidj.tsa", "aibjcidj.pmcfg"] {
        let out = tsa(&["validate", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {out:?}");
        assert!(stdout(&out).starts_with("ok:"));
    }
}

#[test]
fn fixture_files_round_trip_byte_for_byte() {
    for name in ["anbncndn.tsa", "aibjcidj.tsa"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let parsed = tsa_cli::format::parse_automaton(&text).unwrap();
        assert_eq!(tsa_cli::format::print_automaton(&parsed), text, "{name}");
    }
    let text = std::fs::read_to_string(fixture("aibjcidj.pmcfg")).unwrap();
    let parsed = tsa_cli::format::parse_grammar(&text).unwrap();
    assert_eq!(tsa_cli::format::print_grammar(&parsed).unwrap(), text);
}

#[test]
fn validate_rejects_undeclared_references() {
    let path = temp_path("bad.tsa");
    std::fs::write(&path, "states: 1\ninitial: 1\nfinal: 1\nstack: *\ntrans: 1 -a-> 7 [true] id\n")
        .unwrap();
    let out = tsa(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_arguments_are_a_usage_error() {
    let out = tsa(&["recognize"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn recognize_reports_all_three_outcomes() {
    let automaton = fixture("anbncndn.tsa");
    let automaton = automaton.to_str().unwrap();

    let out = tsa(&["recognize", automaton, "abcd"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("run: 1 2 3 4 5 6 7 8 9"));

    let out = tsa(&["recognize", automaton, "abc"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("rejected"));

    let out = tsa(&["recognize", automaton, "abcd", "--max-steps", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn recognize_emits_json_traces() {
    let out = tsa(&[
        "recognize",
        fixture("anbncndn.tsa").to_str().unwrap(),
        "abcd",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["accepting"], serde_json::json!(true));
    assert_eq!(value["run"], serde_json::json!([1, 2, 3, 4, 5, 6, 7, 8, 9]));
    assert_eq!(value["trace"].as_array().unwrap().len(), 10);
    assert_eq!(value["trace"][1]["stack"], "{(ε,@), _(1,*)_}");
}

#[test]
fn replay_prints_the_trace() {
    let run_file = temp_path("run.txt");
    std::fs::write(&run_file, "1 2 3 4 5 6 7 8 9\n").unwrap();
    let out = tsa(&[
        "replay",
        fixture("anbncndn.tsa").to_str().unwrap(),
        "abcd",
        "--run",
        run_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("(1, {_(ε,@)_}, abcd)"));
    assert!(text.contains("accepting: true"));
}

#[test]
fn enum_grammar_lists_the_bounded_language() {
    let out = tsa(&[
        "enum-grammar",
        fixture("aibjcidj.pmcfg").to_str().unwrap(),
        "--max-len",
        "4",
        "--max-nodes",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut got: Vec<&str> = text.lines().collect();
    got.sort_unstable();
    let mut expected = vec!["ε", "ac", "bd", "abcd", "aacc", "bbdd"];
    expected.sort_unstable();
    assert_eq!(got, expected);
}

#[test]
fn enum_automaton_lists_the_bounded_language() {
    let out = tsa(&[
        "enum-automaton",
        fixture("aibjcidj.tsa").to_str().unwrap(),
        "--max-len",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    let mut got: Vec<&str> = text.lines().collect();
    got.sort_unstable();
    let mut expected = vec!["abcd", "aabccd", "abbcdd"];
    expected.sort_unstable();
    assert_eq!(got, expected);
}

#[test]
fn g2a_output_agrees_with_the_grammar() {
    let compiled = temp_path("compiled.tsa");
    let out = tsa(&[
        "g2a",
        fixture("aibjcidj.pmcfg").to_str().unwrap(),
        "-o",
        compiled.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = tsa(&[
        "equiv",
        fixture("aibjcidj.pmcfg").to_str().unwrap(),
        compiled.to_str().unwrap(),
        "--max-len",
        "6",
        "--max-nodes",
        "12",
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("equivalent up to length 6"));
}

#[test]
fn equiv_reports_differences_with_exit_one() {
    let out = tsa(&[
        "equiv",
        fixture("aibjcidj.pmcfg").to_str().unwrap(),
        fixture("anbncndn.tsa").to_str().unwrap(),
        "--max-len",
        "4",
        "--max-nodes",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("only in grammar: ac"));
    assert!(text.contains("only in grammar: bd"));
}

#[test]
fn a2g_round_trips_through_the_grammar_format() {
    let grammar_file = temp_path("derived.pmcfg");
    let out = tsa(&[
        "a2g",
        fixture("anbncndn.tsa").to_str().unwrap(),
        "--k",
        "2",
        "-o",
        grammar_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = tsa(&[
        "equiv",
        grammar_file.to_str().unwrap(),
        fixture("anbncndn.tsa").to_str().unwrap(),
        "--max-len",
        "8",
        "--max-nodes",
        "12",
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn checks_report_the_fixture_properties() {
    let monadic = fixture("anbncndn.tsa");
    let branching = fixture("aibjcidj.tsa");

    let out = tsa(&["check", "cycle-free", monadic.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let out = tsa(&["check", "snf", monadic.to_str().unwrap(), "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));

    let out = tsa(&["check", "snf", branching.to_str().unwrap(), "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("violated by run:"));

    let out = tsa(&[
        "check",
        "restriction",
        monadic.to_str().unwrap(),
        "--k",
        "2",
        "--max-len",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn normalize_snf_produces_a_normal_automaton() {
    let normalised = temp_path("snf.tsa");
    let out = tsa(&[
        "normalize",
        "snf",
        fixture("aibjcidj.tsa").to_str().unwrap(),
        "-o",
        normalised.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = tsa(&["check", "snf", normalised.to_str().unwrap(), "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}
