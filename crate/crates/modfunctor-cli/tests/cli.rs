//! End-to-end tests of the batch interface: exit codes, printed values,
//! report determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("fixtures");
    p.push(name);
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modfunctor"))
        .args(args)
        .env_remove("MODFUNCTOR_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

#[test]
fn check_passes_on_bundled_data() {
    for name in [
        "trivial.md",
        "fibonacci.md",
        "ising.md",
        "su2_4.md",
        "su3_1.md",
    ] {
        let out = run(&["check", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", name, stdout(&out));
        assert!(!stdout(&out).contains("FAIL"));
    }
}

#[test]
fn check_fails_on_degenerate_data() {
    let out = run(&["check", &fixture("z2_symmetric.md")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL axiom/s_unitary"));
    assert!(text.contains("FAIL mueger/center"));
}

#[test]
fn check_detects_corrupted_fusion_entry() {
    let original = std::fs::read_to_string(fixture("fibonacci.md")).unwrap();
    let corrupted = original.replace("N 1 1 1 1", "N 1 1 1 2");
    let path = std::env::temp_dir().join("modfunctor_corrupt_fib.md");
    std::fs::write(&path, corrupted).unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verlinde/consistency"));
}

#[test]
fn input_errors_exit_two() {
    let out = run(&["check", "/nonexistent/file.md"]);
    assert_eq!(out.status.code(), Some(2));
    let path = std::env::temp_dir().join("modfunctor_garbage.md");
    std::fs::write(&path, "rank banana\n").unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dim_spot_values() {
    let (fib, ising, trivial) = (
        fixture("fibonacci.md"),
        fixture("ising.md"),
        fixture("trivial.md"),
    );
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["dim", &fib, "--genus", "2"], "5\n"),
        (vec!["dim", &ising, "--genus", "2"], "10\n"),
        (vec!["dim", &trivial, "--genus", "7"], "1\n"),
        (
            vec![
                "dim", &ising, "--genus", "0", "sigma", "sigma", "sigma", "sigma",
            ],
            "2\n",
        ),
    ];
    for (args, expect) in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), expect, "{:?}", args);
    }
}

#[test]
fn dim_unknown_label_is_input_error() {
    let out = run(&["dim", &fixture("fibonacci.md"), "--genus", "1", "sigma"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_dim_examples() {
    let out = run(&[
        "graph-dim",
        &fixture("fibonacci.md"),
        &fixture("graphs/fib_loop.graph"),
    ]);
    assert_eq!(stdout(&out), "1\n");
    // a theta graph and its one-vertex contraction agree
    let theta = run(&[
        "graph-dim",
        &fixture("ising.md"),
        &fixture("graphs/ising_theta.graph"),
    ]);
    let contracted = run(&[
        "graph-dim",
        &fixture("ising.md"),
        &fixture("graphs/ising_genus2.graph"),
    ]);
    assert_eq!(stdout(&theta), "10\n");
    assert_eq!(stdout(&theta), stdout(&contracted));
    // disjoint unions multiply
    let out = run(&[
        "graph-dim",
        &fixture("ising.md"),
        &fixture("graphs/ising_two_corollas.graph"),
    ]);
    assert_eq!(stdout(&out), "6\n");
}

#[test]
fn report_is_byte_identical_and_machine_readable() {
    let a = run(&["report", &fixture("ising.md")]);
    let b = run(&["report", &fixture("ising.md")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("\"overall\": \"pass\""));
    assert!(text.contains("\"datum_fingerprint\""));
    assert!(!text.contains("elapsed"));
    // every entry reports pass
    assert!(!text.contains("\"status\": \"fail\""));
}

#[test]
fn report_on_corrupt_datum_has_fail_entries() {
    let out = run(&["report", &fixture("z2_symmetric.md")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("\"overall\": \"fail\""));
    assert!(text.contains("\"status\": \"fail\""));
    assert!(text.contains("\"residual\""));
}

#[test]
fn verlinde_prints_tensor() {
    let out = run(&["verlinde", &fixture("fibonacci.md")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("N 1 1 1 1"));
    assert!(text.contains("diagonalization residual"));
}

#[test]
fn cardy_prints_dimension_and_residuals() {
    let out = run(&[
        "cardy",
        &fixture("fibonacci.md"),
        "--genus",
        "1",
        "--insertions",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("5\n"));
    assert!(text.contains("[C,S]"));
}

#[test]
fn sewing_verifies_bundled_modules() {
    let out = run(&["sewing", &fixture("modules.md")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().count() >= 3);
    assert!(stdout(&out).contains("identity holds exactly"));
}

#[test]
fn tolerance_flag_is_operator_visible() {
    // an absurdly tight tolerance must make the float-residual axioms fail
    let out = run(&["check", &fixture("su2_4.md"), "--tol", "1e-18"]);
    assert_eq!(out.status.code(), Some(1));
    // and a loose one must accept the degenerate fixture's unitarity gap
    let out = run(&["check", &fixture("z2_symmetric.md"), "--tol", "10.0"]);
    let text = stdout(&out);
    assert!(!text.contains("FAIL axiom/s_unitary"), "{}", text);
}

#[test]
fn env_tolerance_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_modfunctor"))
        .args(["check", &fixture("su2_4.md")])
        .env("MODFUNCTOR_TOL", "1e-18")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn jobs_flag_gives_identical_results() {
    let serial = run(&[
        "dim",
        &fixture("su2_4.md"),
        "--genus",
        "3",
        "j1",
        "j2",
        "j1",
        "j2",
    ]);
    let parallel = run(&[
        "dim",
        &fixture("su2_4.md"),
        "--genus",
        "3",
        "j1",
        "j2",
        "j1",
        "j2",
        "--jobs",
        "4",
    ]);
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(serial.status.code(), Some(0));
}
