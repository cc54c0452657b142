use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use apdg_core::Problem;
use tempfile::TempDir;

fn apdg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apdg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

const RING: &str = r#"{ "format": "apdg-schedule/1", "n": 5, "generator": "static_graph",
  "epochs": [[[0, 1], [1, 2], [2, 3], [3, 4], [4, 0]]] }"#;

const NETWORK: &str = r#"{ "generate": { "n": 5, "dim_x": 3, "dim_y": 3, "mu_x": 1.0, "l_x": 2.0,
  "mu_y": 1.0, "l_y": 2.0, "l_xy": 1.0, "heterogeneity": 0.3, "seed": 7 } }"#;

#[test]
fn generate_with_forced_spectrum_gives_identity_curvature() {
    let dir = TempDir::new().unwrap();
    let out = apdg(
        &[
            "generate", "--n", "1", "--dim-x", "2", "--dim-y", "2", "--out", "p.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let p = Problem::from_json(&fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    let f = p.locals()[0].f.curvature();
    assert!((f - nalgebra::DMatrix::identity(2, 2)).amax() < 1e-12);
    let constants: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(constants["mu_x"], 1.0);
}

#[test]
fn generate_is_byte_identical_for_a_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let args = |name| {
        [
            "generate", "--n", "3", "--dim-x", "4", "--dim-y", "3", "--mu-x", "0.2", "--l-x", "3",
            "--seed", "5", "--out", name,
        ]
    };
    assert!(apdg(&args("a.json"), dir.path()).status.success());
    assert!(apdg(&args("b.json"), dir.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn generate_rejects_infeasible_targets() {
    let dir = TempDir::new().unwrap();
    let out = apdg(&["generate", "--mu-x", "2", "--l-x", "1"], dir.path());
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("mu <= L"),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn noiseless_centralized_run_passes_contraction() {
    let dir = TempDir::new().unwrap();
    assert!(apdg(
        &[
            "generate",
            "--dim-x",
            "4",
            "--dim-y",
            "3",
            "--mu-x",
            "0.5",
            "--l-x",
            "2",
            "--mu-y",
            "0.5",
            "--l-y",
            "2",
            "--coupling-min",
            "0.5",
            "--seed",
            "11",
            "--out",
            "demo.json"
        ],
        dir.path()
    )
    .status
    .success());
    write(
        dir.path(),
        "run.json",
        r#"{ "mode": "centralized", "problem": { "file": "demo.json" }, "eps": 1e-10 }"#,
    );
    let out = apdg(&["run", "--config", "run.json", "--out", "out"], dir.path());
    let stdout = text(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", text(&out.stderr));
    assert!(stdout.contains("[PASS] psi contraction excess"), "{stdout}");
    let trace = fs::read_to_string(dir.path().join("out/trace_seed0.csv")).unwrap();
    assert!(trace.starts_with("k,dist_x2,dist_y2,psi,f_calls,g_calls,f_samples,g_samples\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["passed"], true);
    assert!(summary["plan"]["params"]["theta"].is_number());
    assert!(summary["predictions"]["rate_bound"].is_number());
}

#[test]
fn decentralized_ring_passes_consensus_check_over_30_seeds() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ring.json", RING);
    write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{ "mode": "decentralized", "problem": {NETWORK}, "schedule": {{ "file": "ring.json" }},
               "eps": 1e-3, "sigma_f2": 0.1, "sigma_g2": 0.1, "seeds": 30, "out": "runs" }}"#
        ),
    );
    let out = apdg(&["run", "--config", "run.json"], dir.path());
    let stdout = text(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", text(&out.stderr));
    assert!(
        stdout.contains("[PASS] seed-mean consensus error after projection"),
        "{stdout}"
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("runs/summary.json")).unwrap())
            .unwrap();
    let budget = &summary["plan"]["budget"];
    for key in [
        "delta_prime",
        "delta_x",
        "delta_y",
        "rounds",
        "iterations",
        "batch_f",
        "batch_g",
        "D",
        "m_x",
        "m_y",
    ] {
        assert!(!budget[key].is_null(), "summary lacks {key}");
    }
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 30);
    assert!(dir.path().join("runs/trace_seed29.csv").exists());
}

#[test]
fn missing_schedule_file_names_the_path() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{ "mode": "decentralized", "problem": {NETWORK}, "schedule": {{ "file": "nowhere/ring.json" }}, "eps": 1e-3 }}"#
        ),
    );
    let out = apdg(&["run", "--config", "run.json"], dir.path());
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("nowhere/ring.json"),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn config_errors_carry_line_and_column() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "bad.json",
        "{\n  \"mode\": \"centralized\",\n  \"eps\": oops\n}",
    );
    let out = apdg(&["run", "--config", "bad.json"], dir.path());
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("bad.json:3:"),
        "{}",
        text(&out.stderr)
    );
    write(
        dir.path(),
        "unknown.json",
        r#"{ "mode": "centralized", "problem": { "file": "p.json" }, "eps": 1e-3, "epz": 1 }"#,
    );
    let out = apdg(&["run", "--config", "unknown.json"], dir.path());
    assert!(text(&out.stderr).contains("epz"), "{}", text(&out.stderr));
}

#[test]
fn reruns_produce_byte_identical_traces() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ring.json", RING);
    write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{ "mode": "decentralized", "problem": {NETWORK}, "schedule": {{ "file": "ring.json" }},
               "eps": 1e-2, "sigma_f2": 0.5, "sigma_g2": 0.5, "seed": 9, "seeds": 3 }}"#
        ),
    );
    for out in ["a", "b"] {
        let o = apdg(
            &[
                "run",
                "--config",
                "run.json",
                "--out",
                out,
                "--format",
                "structured",
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    for seed in 9..12 {
        let name = format!("trace_seed{seed}.json");
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(&name)).unwrap());
        let records: Vec<serde_json::Value> = serde_json::from_slice(&a).unwrap();
        assert!(records[0]["consensus_error_x"].is_number());
    }
    let o = apdg(
        &[
            "run",
            "--config",
            "run.json",
            "--out",
            "c",
            "--seed",
            "10",
            "--seeds",
            "1",
            "--format",
            "structured",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("a/trace_seed10.json")).unwrap(),
        fs::read(dir.path().join("c/trace_seed10.json")).unwrap()
    );
}

#[test]
fn too_few_rounds_fail_the_run() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ring.json", RING);
    write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{ "mode": "decentralized", "problem": {NETWORK}, "schedule": {{ "file": "ring.json" }},
               "eps": 1e-3, "sigma_f2": 0.1, "sigma_g2": 0.1, "rounds": 0 }}"#
        ),
    );
    let out = apdg(&["run", "--config", "run.json", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("budget"),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn empty_grid_gives_an_empty_table() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "grid.json", r#"{ "mu_x": [], "mu_y": [1e-2] }"#);
    let out = apdg(
        &["sweep", "--config", "grid.json", "--out", "s"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("mu_x,mu_y,iterations,status"));
}

#[test]
fn small_sweep_writes_cells_and_fits() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "grid.json",
        r#"{ "mu_x": [1e-2, 1.0], "mu_y": [1e-2, 1.0], "eps": 1e-4 }"#,
    );
    let out = apdg(
        &[
            "sweep",
            "--config",
            "grid.json",
            "--out",
            "s",
            "--format",
            "structured",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let cells: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s/sweep.json")).unwrap())
            .unwrap();
    assert_eq!(cells.len(), 4);
    assert!(cells.iter().all(|c| c["status"] == "reached"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s/sweep_summary.json")).unwrap())
            .unwrap();
    assert!(summary["report"]["geometric_fit"]["r2"].is_number());
}

#[test]
fn certify_reports_the_ring_gap() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ring.json", RING);
    let out = apdg(
        &[
            "certify",
            "--config",
            "ring.json",
            "--export",
            "3",
            "--out",
            "m",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Metropolis ring of 5: second eigenvalue 1/3 + (2/3)cos(2π/5)
    let sigma2 = 1.0 / 3.0 + 2.0 / 3.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
    let lambda = report["certificate"]["lambda"].as_f64().unwrap();
    assert!((lambda - (1.0 - sigma2)).abs() < 1e-12, "{lambda}");
    let matrices: Vec<Vec<Vec<f64>>> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m/matrices.json")).unwrap())
            .unwrap();
    assert_eq!(matrices.len(), 3);
}

#[test]
fn predict_prints_plan_without_running() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ring.json", RING);
    write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{ "mode": "decentralized", "problem": {NETWORK}, "schedule": {{ "file": "ring.json" }},
               "eps": 1e-3, "sigma_f2": 0.1, "sigma_g2": 0.1, "regime": "a" }}"#
        ),
    );
    let out = apdg(&["predict", "--config", "run.json"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["predictions"]["regime"], "A");
    assert!(report["predictions"]["decentralized"]["communications"].is_number());
    assert!(!dir.path().join("apdg-run").exists());
}
