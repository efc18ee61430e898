//! CLI surface: subcommands, formats, exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn spliteq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spliteq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpfile(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("spliteq-test-{}-{}", std::process::id(), name));
    p
}

#[test]
fn gen_solve_verify_round_trip() {
    let inst = tmpfile("ex8.txt");
    let out = spliteq(&["gen", "example8", "--out", inst.to_str().unwrap()]);
    assert!(out.status.success());

    let out = spliteq(&["solve", inst.to_str().unwrap(), "--lambda", "1/2"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verified: equilibrium at lambda = 1/2"));
    // player 0 routes one unit on its direct edge e8 at λ = 1/2
    assert!(stdout.lines().next().unwrap().ends_with("0 0 0 0 0 0 0 1"));

    // write the solved flow into a flow file and verify it
    let flow = tmpfile("flow.txt");
    let flow_text: String = stdout
        .lines()
        .filter(|l| l.starts_with("player"))
        .map(|l| l.split(':').nth(1).unwrap().trim().to_string())
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&flow, flow_text).unwrap();
    let out = spliteq(&[
        "verify",
        inst.to_str().unwrap(),
        flow.to_str().unwrap(),
        "--lambda",
        "1/2",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));

    // the same flow is not an equilibrium for λ = 1: exit code 1
    let out = spliteq(&[
        "verify",
        inst.to_str().unwrap(),
        flow.to_str().unwrap(),
        "--lambda",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let _ = fs::remove_file(inst);
    let _ = fs::remove_file(flow);
}

#[test]
fn trace_emits_csv_with_plateau() {
    let inst = tmpfile("ex8-trace.txt");
    assert!(
        spliteq(&["gen", "example8", "--out", inst.to_str().unwrap()])
            .status
            .success()
    );
    let csv = tmpfile("trace.csv");
    let out = spliteq(&[
        "trace",
        inst.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lambdas: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(lambdas, vec!["0", "1/2", "1/2", "1"]);
    let _ = fs::remove_file(inst);
    let _ = fs::remove_file(csv);
}

#[test]
fn input_errors_exit_2() {
    let out = spliteq(&["solve", "/nonexistent/file.txt"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = tmpfile("bad.txt");
    fs::write(&bad, "spliteq-instance v1\nbogus-key 1\n").unwrap();
    let out = spliteq(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"));
    let _ = fs::remove_file(bad);

    let inst = tmpfile("lam.txt");
    assert!(
        spliteq(&["gen", "example8", "--out", inst.to_str().unwrap()])
            .status
            .success()
    );
    let out = spliteq(&["solve", inst.to_str().unwrap(), "--lambda", "3/2"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_file(inst);
}

#[test]
fn compare_matches_oracle_on_parallel_links() {
    for seed in [1u64, 2, 3, 4, 5] {
        let inst = tmpfile(&format!("cmp-{seed}.txt"));
        let out = spliteq(&[
            "gen",
            "random",
            "--seed",
            &seed.to_string(),
            "--parallel-links",
            "--edges",
            "3",
            "--players",
            "2",
            "--out",
            inst.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let out = spliteq(&["compare", inst.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "seed {seed}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let _ = fs::remove_file(inst);
    }
}

#[test]
fn oracle_exhaustive_reports_count() {
    let inst = tmpfile("scan.txt");
    assert!(spliteq(&[
        "gen",
        "random",
        "--seed",
        "9",
        "--vertices",
        "3",
        "--edges",
        "4",
        "--players",
        "2",
        "--out",
        inst.to_str().unwrap()
    ])
    .status
    .success());
    let out = spliteq(&["oracle", inst.to_str().unwrap(), "--mode", "exhaustive"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("equilibria"));
    let _ = fs::remove_file(inst);
}

#[test]
fn float_mode_env_renders_decimals() {
    let inst = tmpfile("float.txt");
    assert!(
        spliteq(&["gen", "example8", "--out", inst.to_str().unwrap()])
            .status
            .success()
    );
    let out = Command::new(env!("CARGO_BIN_EXE_spliteq"))
        .args(["solve", inst.to_str().unwrap(), "--lambda", "1/2"])
        .env("SPLITEQ_MODE", "float:1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("1.000000000000"));
    let _ = fs::remove_file(inst);
}
