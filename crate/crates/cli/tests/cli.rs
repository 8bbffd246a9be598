//! End-to-end checks of the command surface: exit codes, error names on
//! stderr, and the documented output shapes.

use std::path::PathBuf;
use std::process::Command;

fn machine_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../machines")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Output {
    stdout: String,
    stderr: String,
    code: i32,
}

fn ittm(args: &[&str]) -> Output {
    let output = Command::new(env!("CARGO_BIN_EXE_ittm"))
        .args(args)
        .output()
        .expect("the ittm binary runs");
    Output {
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
        code: output.status.code().unwrap_or(-1),
    }
}

#[test]
fn run_prints_the_trace_and_exits_zero() {
    let out = ittm(&[
        "run",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "11",
    ]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.first(), Some(&"t=0 state=q0 head=0 tape=0..1:11"));
    assert_eq!(lines.last(), Some(&"outcome=Halted kind=halt steps=6"));
    assert!(lines[lines.len() - 2].contains("100"));
}

#[test]
fn limit_reports_the_blinker_cell() {
    let out = ittm(&[
        "limit",
        "--machine",
        &machine_path("blinker.tm"),
        "--budget",
        "1000",
    ]);
    assert_eq!(out.code, 0);
    assert!(
        out.stdout.contains("t=w state=limit head=0 tape=0..0:1"),
        "{}",
        out.stdout
    );
    assert!(
        out.stdout.contains("cell 0 seen=0,1 limsup=1"),
        "{}",
        out.stdout
    );
}

#[test]
fn halting_verdict_lines_are_exact() {
    let out = ittm(&[
        "halting",
        "--machine",
        &machine_path("right_runner.tm"),
        "--budget",
        "50",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "Diverges(translation-cycle period=1 drift=+1)\n"
    );

    let out = ittm(&[
        "halting",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "11",
        "--budget",
        "100",
    ]);
    assert_eq!(out.stdout, "Halts(6)\n");

    let out = ittm(&[
        "halting",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "1111",
        "--budget",
        "3",
    ]);
    assert_eq!(out.stdout, "Unknown(budget=3)\n");
}

#[test]
fn accuracy_closed_form_prints_the_value() {
    let out = ittm(&[
        "accuracy",
        "--closed",
        "--epsilon",
        "0.01",
        "--length",
        "100",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("0.366032"), "{}", out.stdout);
}

#[test]
fn usage_errors_exit_two() {
    let out = ittm(&["no-such-subcommand"]);
    assert_eq!(out.code, 2);

    let out = ittm(&["accuracy", "--epsilon", "0.1", "--length", "5"]);
    assert_eq!(out.code, 2, "accuracy needs --closed or --mc");

    let out = ittm(&["route", "--greedy", "some.g"]);
    assert_eq!(out.code, 2, "--greedy needs --start");
}

#[test]
fn domain_errors_exit_one_with_the_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tm");
    std::fs::write(&bad, "machine broken\nbogus line\n").unwrap();
    let out = ittm(&["run", "--machine", &bad.to_string_lossy(), "--input", ""]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("ParseError:"), "{}", out.stderr);

    // Halting run: nothing to take a limit of.
    let out = ittm(&[
        "limit",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "11",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("NoCycleFound:"), "{}", out.stderr);

    // Translation cycles have no usable limit tape.
    let out = ittm(&[
        "transfinite",
        "--machine",
        &machine_path("right_runner.tm"),
        "--max-limits",
        "1",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnboundedTape:"), "{}", out.stderr);

    // Bad input symbol for the machine's alphabet.
    let out = ittm(&[
        "run",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "12",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("UnknownSymbol:"), "{}", out.stderr);
}

#[test]
fn merge_refuses_graphs_from_different_machines() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.g").to_string_lossy().into_owned();
    let b = dir.path().join("b.g").to_string_lossy().into_owned();
    let out = ittm(&[
        "graph",
        "collapse",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "11",
        "--out",
        &a,
    ]);
    assert_eq!(out.code, 0);
    let out = ittm(&[
        "graph",
        "collapse",
        "--machine",
        &machine_path("blinker.tm"),
        "--budget",
        "100",
        "--out",
        &b,
    ]);
    assert_eq!(out.code, 0);
    let out = ittm(&["graph", "merge", &a, &b]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("MixedProvenance:"), "{}", out.stderr);
}

#[test]
fn replay_route_defaults_to_the_recorded_start() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c.g").to_string_lossy().into_owned();
    ittm(&[
        "graph",
        "collapse",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "0",
        "--out",
        &g,
    ]);
    let out = ittm(&["route", "--replay", &g]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 4, "{}", out.stdout);
    assert!(lines[0].starts_with("q0|0|"));
    assert!(lines[3].starts_with("qh|0|"));
}

#[test]
fn transfinite_blinker_crosses_omega() {
    let out = ittm(&[
        "transfinite",
        "--machine",
        &machine_path("blinker.tm"),
        "--budget",
        "100",
        "--max-limits",
        "1",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("t=w state=limit"), "{}", out.stdout);
    assert!(out.stdout.contains("t=w+1 state=qh"), "{}", out.stdout);
    assert!(
        out.stdout.ends_with("outcome=Halted kind=halt steps=5\n"),
        "{}",
        out.stdout
    );
}

#[test]
fn layered_route_walks_one_hop_per_layer() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("layer.g").to_string_lossy().into_owned();
    ittm(&[
        "graph",
        "collapse",
        "--machine",
        &machine_path("binary_counter.tm"),
        "--input",
        "11",
        "--out",
        &g,
    ]);
    let out = ittm(&["route", "--layers", &g, &g, "--start", "q0|0|0:1|1.1"]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 2, "{}", out.stdout);
    assert!(lines[0].starts_with("t=w "));
    assert!(lines[1].starts_with("t=w+1 "));
}

#[test]
fn dot_export_draws_the_rule_graph() {
    let out = ittm(&[
        "export",
        "dot",
        &machine_path("binary_counter.tm"),
        "--rules",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.matches("->").count(), 6);
    assert!(
        out.stdout.contains("\"q1\" -> \"qh\" [label=\"0/1,S\"];"),
        "{}",
        out.stdout
    );
}

#[test]
fn env_var_supplies_the_default_budget() {
    let output = Command::new(env!("CARGO_BIN_EXE_ittm"))
        .args([
            "halting",
            "--machine",
            &machine_path("binary_counter.tm"),
            "--input",
            "1111",
        ])
        .env("ITTM_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(
        String::from_utf8(output.stdout).unwrap(),
        "Unknown(budget=3)\n"
    );

    // The flag wins over the environment.
    let output = Command::new(env!("CARGO_BIN_EXE_ittm"))
        .args([
            "halting",
            "--machine",
            &machine_path("binary_counter.tm"),
            "--input",
            "1111",
            "--budget",
            "100",
        ])
        .env("ITTM_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(output.stdout).unwrap(), "Halts(10)\n");
}
