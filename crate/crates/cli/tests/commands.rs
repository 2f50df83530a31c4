use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asymlim::linalg::{multiply, operator_norm, ComplexMatrix};
use asymlim::operators::{read_matrix_file, write_matrix_json};
use asymlim::random::{random_contraction_with_unitary_part, Lcg64};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymlim")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

const DIAG: &str = r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0],[0.5,0]]}"#;
const TAIL_SPEC: &str = r#"{"atoms":[],"tails":[{"expr":"j/(j+1)","start":1,"increasing":true}]}"#;

#[test]
fn compute_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", DIAG);
    let out = dir.path().join("a.json");
    let table = dir.path().join("r.json");
    let o = run(&["compute", "--input", s(&input), "--out", s(&out), "--table", s(&table)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a: ComplexMatrix<f64> = read_matrix_file(&out).unwrap();
    let expected = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
    assert!(a.sub(&expected).unwrap().max_abs() <= 1e-12);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["steps"].as_array().unwrap().iter().all(|s| s["n"].is_u64() && s["error"].is_f64()));
}

#[test]
fn compute_rejects_non_contraction_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", r#"{"rows":2,"cols":2,"entries":[[2,0],[0,0],[0,0],[2,0]]}"#);
    let out = dir.path().join("a.json");
    let o = run(&["compute", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not a contraction"), "{}", stderr(&o));
    assert_eq!(files_in(dir.path()), ["t.json"]);
}

#[test]
fn compute_rejects_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#);
    let o = run(&["compute", "--input", s(&input), "--out", s(&dir.path().join("a.json"))]);
    assert_eq!(code(&o), 1);
    assert!(!stderr(&o).is_empty());
}

#[test]
fn compute_random_contraction_is_projection() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Lcg64::new(11);
    let t: ComplexMatrix<f64> = random_contraction_with_unitary_part(&mut rng, 8, 3);
    let input = write(dir.path(), "t.json", &write_matrix_json(&t));
    let out = dir.path().join("a.json");
    let o = run(&["compute", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a: ComplexMatrix<f64> = read_matrix_file(&out).unwrap();
    let defect = operator_norm(&multiply(&a, &a).unwrap().sub(&a).unwrap());
    assert!(defect <= 1e-6, "||A^2 - A|| = {defect}");
    // report went to stdout
    assert!(stdout(&o).contains("\"converged\": true"));
}

#[test]
fn compute_reports_no_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", r#"{"rows":1,"cols":1,"entries":[[0.999999,0]]}"#);
    let out = dir.path().join("a.json");
    let table = dir.path().join("r.json");
    let o = run(&["compute", "--input", s(&input), "--out", s(&out), "--table", s(&table), "--max-doublings", "3"]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
}

#[test]
fn compute_rejects_bad_tolerance() {
    let o = run(&["compute", "--input", "x", "--out", "y", "--tol", "-1"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn compute_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Lcg64::new(5);
    let t: ComplexMatrix<f64> = random_contraction_with_unitary_part(&mut rng, 6, 2);
    let input = write(dir.path(), "t.json", &write_matrix_json(&t));
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("a{k}.json"));
        let table = dir.path().join(format!("r{k}.json"));
        assert_eq!(code(&run(&["compute", "--input", s(&input), "--out", s(&out), "--table", s(&table)])), 0);
        runs.push((std::fs::read(&out).unwrap(), std::fs::read(&table).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

fn parse_csv(text: &str) -> Vec<(u64, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,error,bound"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn construct_diagonal_tail() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", TAIL_SPEC);
    let out = dir.path().join("t.json");
    let table = dir.path().join("t.csv");
    let o = run(&["construct", "--method", "diagonal", "--spec", s(&spec), "--truncate", "20", "--out", s(&out), "--table", s(&table)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_csv(&std::fs::read_to_string(&table).unwrap());
    assert!(!rows.is_empty());
    for (n, error, bound) in rows {
        assert!((bound - 1.0 / n as f64).abs() <= 1e-12);
        assert!(error <= bound + 1e-10);
    }
    let t: ComplexMatrix<f64> = read_matrix_file(&out).unwrap();
    let limit: ComplexMatrix<f64> = read_matrix_file(&dir.path().join("t.limit.json")).unwrap();
    assert_eq!(t.rows(), 19 * 19);
    assert_eq!(limit.rows(), t.rows());
    assert!(operator_norm(&t) <= 1.0 + 1e-12);

    // byte-identical rerun
    let (t1, c1) = (std::fs::read(&out).unwrap(), std::fs::read(&table).unwrap());
    assert_eq!(code(&run(&["construct", "--method", "diagonal", "--spec", s(&spec), "--truncate", "20", "--out", s(&out), "--table", s(&table)])), 0);
    assert_eq!(std::fs::read(&out).unwrap(), t1);
    assert_eq!(std::fs::read(&table).unwrap(), c1);
}

#[test]
fn construct_block_ordering_violation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"blocks":[{"rows":1,"cols":1,"entries":[[0.9,0]]},{"rows":1,"cols":1,"entries":[[0.5,0]]}]}"#,
    );
    let o = run(&["construct", "--method", "block", "--spec", s(&spec), "--out", s(&dir.path().join("t.json")), "--table", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 1);
    assert_eq!(files_in(dir.path()), ["spec.json"]);
}

#[test]
fn construct_block() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"blocks":[{"rows":1,"cols":1,"entries":[[0.5,0]]},{"rows":1,"cols":1,"entries":[[0.75,0]]},{"rows":1,"cols":1,"entries":[[0.9,0]]}]}"#,
    );
    let table = dir.path().join("t.csv");
    let o = run(&["construct", "--method", "block", "--spec", s(&spec), "--out", s(&dir.path().join("t.json")), "--table", s(&table)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_csv(&std::fs::read_to_string(&table).unwrap());
    assert_eq!(rows.len(), 2);
    // block 0 after one step: 0.5 / 0.75 vs 0.5
    assert!((rows[0].1 - 1.0 / 6.0).abs() <= 1e-12);
    assert!((rows[0].2 - 1.0 / 3.0).abs() <= 1e-12);
    let limit: ComplexMatrix<f64> = read_matrix_file(&dir.path().join("t.limit.json")).unwrap();
    assert_eq!(limit.real_diagonal(), vec![0.5, 0.75, 0.9]);
}

#[test]
fn construct_hybrid_with_zero_below_b() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"atoms":[{"value":0,"mult":1},{"value":0.25,"mult":1}],"tails":[{"expr":"j/(j+1)","start":1,"increasing":true}]}"#,
    );
    let out = dir.path().join("t.json");
    let o = run(&["construct", "--method", "hybrid", "--spec", s(&spec), "--truncate", "10", "--out", s(&out), "--table", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let limit: ComplexMatrix<f64> = read_matrix_file(&dir.path().join("t.limit.json")).unwrap();
    let d = limit.real_diagonal();
    // basis order is lexicographic in (l, m) with m from 0: (1,0) first, (2,0) after row 1
    assert_eq!(d[0], 0.0);
    assert_eq!(d[10], 0.25);
}

#[test]
fn construct_diagonal_needs_a_tail_or_finite_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", r#"{"atoms":[{"value":0.5,"mult":"inf"}],"tails":[]}"#);
    let o = run(&["construct", "--method", "diagonal", "--spec", s(&spec), "--out", s(&dir.path().join("t.json")), "--table", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let nilpotent = write(dir.path(), "n.json", r#"{"rows":2,"cols":2,"entries":[[0,0],[1,0],[0,0],[0,0]]}"#);
    let o = run(&["classify", "--input", s(&nilpotent)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("class: C_{00}"), "{}", stdout(&o));

    let unitary = write(dir.path(), "u.json", r#"{"rows":2,"cols":2,"entries":[[0,0],[0,1],[1,0],[0,0]]}"#);
    let o = run(&["classify", "--input", s(&unitary)]);
    assert!(stdout(&o).contains("class: C_{11}"), "{}", stdout(&o));

    let diag = write(dir.path(), "d.json", DIAG);
    let o = run(&["classify", "--input", s(&diag)]);
    let text = stdout(&o);
    assert!(text.contains("class: Mixed/Mixed"), "{text}");
    assert!(text.contains("dim H0: 1") && text.contains("dim H1: 1"), "{text}");

    let o = run(&["classify", "--input", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 1);
}

fn admissible(dir: &Path, spec: &str) -> Output {
    let p = write(dir, "spec.json", spec);
    run(&["admissible", "--spec", s(&p)])
}

#[test]
fn admissible_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = admissible(dir.path(), r#"{"atoms":[{"value":1,"mult":2}],"tails":[]}"#);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("case: FiniteRankProjection"));

    let o = admissible(dir.path(), r#"{"atoms":[{"value":0.5,"mult":1}],"tails":[]}"#);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("case: Inadmissible"));
    assert!(stdout(&o).contains("witness:"));

    let o = admissible(dir.path(), TAIL_SPEC);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("case: EssentialSpectralRadiusOne"));

    let o = admissible(dir.path(), r#"{"atoms":[{"value":1.5,"mult":1}],"tails":[]}"#);
    assert_eq!(code(&o), 1);
    let o = admissible(dir.path(), r#"{"atoms":[],"tails":[{"expr":"j/(","start":1,"increasing":true}]}"#);
    assert_eq!(code(&o), 1);
}

#[test]
fn admissible_non_monotone_tails() {
    let dir = tempfile::tempdir().unwrap();
    let tail = |e: &str| format!(r#"{{"atoms":[],"tails":[{{"expr":"{e}","start":1,"increasing":false}}]}}"#);
    // supremum approached from below and never attained within the horizon
    let o = admissible(dir.path(), &tail("0.5 + 0.1*(-1)^j*(1 - 1/j)"));
    assert_eq!(code(&o), 6, "{}", stderr(&o));
    assert!(stderr(&o).contains("undecidable"));
    // accumulates at 1 along even j
    let o = admissible(dir.path(), &tail("0.75 + 0.25*(-1)^j*(1 - 1/(j+1))"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("case: EssentialSpectralRadiusOne"));
}

#[test]
fn verify_props() {
    let o = run(&["verify", "--suite", "props", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().count() >= 6);
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn verify_examples() {
    let o = run(&["verify", "--suite", "examples"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
