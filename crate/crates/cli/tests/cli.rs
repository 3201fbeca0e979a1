use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qanneal_core::model::parse_qubo;
use qanneal_core::sampler::exact_solve;
use serde_json::Value;
use tempfile::TempDir;

fn qanneal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qanneal"))
        .arg("--no-timestamp")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const TWO: &str = "0 0 -1\n1 1 -1\n0 1 2\n";
const K3: &str = "0 1 1\n0 2 1\n1 2 1\n";

#[test]
fn solve_exact_matches_library() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.qubo", TWO);
    let v = json(&qanneal(&["solve", "--input", s(&f), "--sampler", "exact"]));
    let expected = exact_solve(&parse_qubo(TWO).unwrap()).unwrap();
    let expected: Value = serde_json::to_value(&expected).unwrap();
    assert_eq!(v["solutions"], expected["solutions"]);
    assert_eq!(v["config"]["backend"]["sampler"], "exact");
    assert!(v["metadata"].get("timestamp").is_none());
}

#[test]
fn duplicate_line_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "dup.qubo", "0 1 1\n# note\n0 1 2\n");
    let out = qanneal(&["solve", "--input", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn boltzmann_frequencies() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.qubo", TWO);
    let v = json(&qanneal(&[
        "solve",
        "--input",
        s(&f),
        "--sampler",
        "boltzmann",
        "--noise-sigma-a",
        "0",
        "--noise-sigma-b",
        "0",
        "--tau",
        "1",
        "--reads",
        "20000",
        "--seed",
        "3",
    ]));
    let sols = v["solutions"].as_array().unwrap();
    let total: u64 = sols.iter().map(|r| r["occurrences"].as_u64().unwrap()).sum();
    assert_eq!(total, 20000);
    // Ising form h = (0, 0), J = 0.5 with no rescaling: the two ground states
    // (E = -0.5 on the clean Ising scale) each carry e^0.5 / (2e^0.5 + 2e^-0.5).
    let p_ground = 0.5f64.exp() / (2.0 * 0.5f64.exp() + 2.0 * (-0.5f64).exp());
    for r in sols.iter().filter(|r| r["energy"] == -1.0) {
        let p = r["occurrences"].as_f64().unwrap() / 20000.0;
        assert!((p - p_ground).abs() < 0.015, "{p} vs {p_ground}");
    }
}

#[test]
fn embed_triangle() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "k3.qubo", K3);
    let v = json(&qanneal(&[
        "embed",
        "--input",
        s(&f),
        "--topology",
        "chimera:1,1,4",
    ]));
    assert_eq!(v["metrics"]["num_qubits"], 4);
    assert_eq!(v["metrics"]["max_chain_length"], 2);
    assert_eq!(v["chain_strength"], -5.0);
}

#[test]
fn native_problem_has_unit_chains() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "edge.qubo", "0 1 1\n1 2 -1\n");
    let v = json(&qanneal(&[
        "embed",
        "--input",
        s(&f),
        "--topology",
        "chimera:2,2,4",
    ]));
    assert_eq!(v["metrics"]["max_chain_length"], 1);
}

#[test]
fn embedding_failure_and_capacity_exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "k3.qubo", K3);
    let out = qanneal(&["solve", "--input", s(&f), "--topology", "chimera:1,1,1"]);
    assert_eq!(out.status.code(), Some(3));

    let big: String = (0..25).map(|i| format!("{i} {i} -1\n")).collect();
    let f = write(&dir, "big.qubo", &big);
    let out = qanneal(&["solve", "--input", s(&f), "--sampler", "exact"]);
    assert_eq!(out.status.code(), Some(4));

    let out = qanneal(&["solve", "--input", s(&dir.path().join("missing.qubo"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn embedded_solve_recovers_ground_state() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "k3.qubo", "0 0 -1\n1 1 -1\n2 2 -1\n0 1 2\n0 2 2\n1 2 2\n");
    let v = json(&qanneal(&[
        "solve",
        "--input",
        s(&f),
        "--topology",
        "chimera:1,1,4",
        "--reads",
        "50",
        "--seed",
        "4",
    ]));
    assert_eq!(v["solutions"][0]["energy"], -1.0);
    assert_eq!(v["info"]["vartype"], "qubo");
    assert_eq!(v["config"]["chain_strength"], -5.0);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "k3.qubo", K3);
    let data = write(
        &dir,
        "data.csv",
        "-2.296\n-0.216\n-0.082\n0.231\n1.127\n1.164\n1.189\n1.236\n1.272\n1.373\n",
    );
    let runs: [Vec<&str>; 3] = [
        vec![
            "solve",
            "--input",
            s(&f),
            "--reads",
            "100",
            "--seed",
            "9",
            "--topology",
            "chimera:2,2,4",
        ],
        vec![
            "mle",
            "--data",
            s(&data),
            "--sampler",
            "sa",
            "--reads",
            "100",
            "--sweeps",
            "200",
            "--iters",
            "3",
        ],
        vec!["design", "--size", "4", "--reads", "100", "--seed", "2"],
    ];
    for args in runs {
        let a = qanneal(&args);
        let b = qanneal(&args);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn mle_trace_csv() {
    let dir = TempDir::new().unwrap();
    let data = write(
        &dir,
        "data.csv",
        "-2.296,-0.216,-0.082,0.231,1.127\n1.164,1.189,1.236,1.272,1.373\n",
    );
    let out_path = dir.path().join("trace.csv");
    let out = qanneal(&[
        "mle",
        "--data",
        s(&data),
        "--sampler",
        "exact",
        "--start",
        "0,1",
        "--iters",
        "5",
        "--out",
        s(&out_path),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert!(text.starts_with("# config: "));
    assert!(text.contains("iteration,theta,phi,energy,loglik\n"));
    assert!(text.contains("# best: iteration=3 theta=0.5 phi=1.09375"));
}

#[test]
fn design_csv_with_flags() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("design.csv");
    let out = qanneal(&[
        "design",
        "--size",
        "4",
        "--sampler",
        "exact",
        "--out",
        s(&out_path),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert!(text.contains("valid=true"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], "row,col");
}

#[test]
fn matinv_outputs() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "A.csv", "2,0\n0,4\n");
    let v_path = dir.path().join("V.csv");
    let r_path = dir.path().join("report.json");
    let out = qanneal(&[
        "matinv",
        "--input",
        s(&a),
        "--bits",
        "3",
        "--power-high",
        "-1",
        "--sampler",
        "exact",
        "--out",
        s(&v_path),
        "--report",
        s(&r_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = std::fs::read_to_string(v_path).unwrap();
    let rows: Vec<&str> = v.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["0.5,0", "0,0.25"]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(r_path).unwrap()).unwrap();
    assert_eq!(report["residual"], 0.0);
    assert_eq!(report["column_energies"], serde_json::json!([0.0, 0.0]));

    let bad = write(&dir, "bad.csv", "1,2\n3\n");
    assert_eq!(qanneal(&["matinv", "--input", s(&bad)]).status.code(), Some(2));
}

#[test]
fn timestamp_only_without_flag() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.qubo", TWO);
    let out = Command::new(env!("CARGO_BIN_EXE_qanneal"))
        .args(["solve", "--input", s(&f), "--sampler", "exact"])
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["metadata"]["timestamp"].is_u64());
}
