//! End-to-end checks of the `depevap` binary: golden outputs, exit codes,
//! and byte-level reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_depevap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Scratch directory unique to this test process.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("depevap-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn eigen_json_golden() {
    let out = run(&["eigen", "--n", "2", "--alpha", "1", "--beta", "2"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["n"], 2);
    assert_eq!(v["alpha"], "1/1");
    assert_eq!(v["beta"], "2/1");
    assert_eq!(v["eigenvalues"], serde_json::json!(["0/1", "-3/1", "-6/1"]));
    assert_eq!(v["vectors"][0], serde_json::json!(["4/1", "4/1", "1/1"]));
    assert_eq!(v["vectors"][1], serde_json::json!(["-2/1", "1/1", "1/1"]));
    assert_eq!(v["vectors"][2], serde_json::json!(["1/1", "-2/1", "1/1"]));
    assert_eq!(v["source"], "closed-form");
}

#[test]
fn eigen_smallest_system() {
    let out = run(&["eigen", "--n", "1", "--alpha", "1", "--beta", "1"]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["eigenvalues"], serde_json::json!(["0/1", "-2/1"]));
}

#[test]
fn eigen_csv_golden() {
    let out = run(&[
        "eigen", "--n", "2", "--alpha", "1", "--beta", "2", "--format", "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let expected = "k,lambda,u0,u1,u2\n\
                    0,0/1,4/1,4/1,1/1\n\
                    1,-3/1,-2/1,1/1,1/1\n\
                    2,-6/1,1/1,-2/1,1/1\n";
    assert_eq!(stdout(&out), expected);
}

#[test]
fn eigen_rejects_empty_lattice() {
    let out = run(&["eigen", "--n", "0", "--alpha", "1", "--beta", "2"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("n must be >= 1"));
}

#[test]
fn eigen_rejects_nonpositive_rate() {
    let out = run(&["eigen", "--n", "2", "--alpha", "0", "--beta", "2"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_mazza_suite_passes() {
    let out = run(&["verify", "--suite", "mazza", "--max-n", "12"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("PASS mazza:"), "got: {text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_thm1_suite_is_informational() {
    let out = run(&[
        "verify",
        "--suite",
        "krawtchouk-thm1-vectors",
        "--max-n",
        "3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("INFO krawtchouk-thm1-vectors:"));
    // the flat-rate desk finding: a left eigenvector the claim misses
    assert!(text.contains(
        "p = 1/3, n = 1, k = 0: at claimed eigenvalue 0: neither; right for [none]; left for [-1]"
    ));
    // reversed pairing at p = 1/2
    assert!(
        text.contains("p = 1/2, n = 2, k = 0: at claimed eigenvalue 0: neither; right for [-2]")
    );
}

#[test]
fn verify_json_report() {
    let out = run(&[
        "verify",
        "--suite",
        "sylvester",
        "--max-n",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["ok"], true);
    assert_eq!(v["max_n"], 8);
    assert_eq!(v["checks"][0]["name"], "sylvester");
    assert_eq!(v["checks"][0]["status"], "pass");
}

#[test]
fn verify_rejects_zero_max_n() {
    let out = run(&["verify", "--max-n", "0"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn evolve_exact_endpoints() {
    let out = run(&[
        "evolve", "--n", "2", "--alpha", "1", "--beta", "2", "--t", "0,inf",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# precision: exact"));
    assert_eq!(lines.next(), Some("t,Q0,Q1,Q2,sum,coverage"));
    let t0 = lines.next().expect("t = 0 row");
    assert!(t0.starts_with("0,1.000000000000000,0.000000000000000,"));
    let tinf = lines.next().expect("limit row");
    assert!(
        tinf.starts_with("inf,0.444444444444444,0.444444444444444,0.111111111111111,"),
        "got: {tinf}"
    );
}

#[test]
fn evolve_long_time_reaches_equilibrium() {
    let out = run(&[
        "evolve", "--n", "2", "--alpha", "1", "--beta", "2", "--t", "50",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let row = text.lines().last().expect("data row");
    let fields: Vec<f64> = row
        .split(',')
        .map(|f| f.parse().expect("numeric field"))
        .collect();
    for (got, want) in fields[1..4].iter().zip([4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0]) {
        assert!((got - want).abs() < 1e-12, "row: {row}");
    }
    assert!((fields[4] - 1.0).abs() < 1e-12);
    assert!((fields[5] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn evolve_oracle_columns_and_agreement() {
    let out = run(&[
        "evolve", "--n", "3", "--alpha", "1", "--beta", "2", "--init", "k=1", "--t", "0.25,1",
        "--oracle", "rk4", "--step", "1e-4",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let header = text.lines().nth(1).expect("header");
    assert_eq!(header, "t,Q0,Q1,Q2,Q3,sum,coverage,dQ0,dQ1,dQ2,dQ3");
    for row in text.lines().skip(2) {
        let fields: Vec<&str> = row.split(',').collect();
        for delta in &fields[7..] {
            let d: f64 = delta.parse().expect("numeric delta");
            assert!(d.abs() < 1e-9, "row: {row}");
        }
    }
}

#[test]
fn evolve_reads_initial_vector_from_file() {
    let dir = scratch("init");
    let path = dir.join("q0.json");
    std::fs::write(&path, r#"["1/2","1/4","1/4"]"#).expect("write init");
    let out = run(&[
        "evolve",
        "--n",
        "2",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--init",
        &format!("file={}", path.display()),
        "--t",
        "0",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let row = stdout(&out).lines().last().expect("data row").to_string();
    assert!(row.starts_with("0,0.500000000000000,0.250000000000000,0.250000000000000,"));
}

#[test]
fn evolve_rejects_bad_inits() {
    let out = run(&[
        "evolve", "--n", "2", "--alpha", "1", "--beta", "2", "--init", "k=9", "--t", "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&[
        "evolve", "--n", "2", "--alpha", "1", "--beta", "2", "--init", "sideways", "--t", "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    let dir = scratch("badinit");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"["1/2","1/2"]"#).expect("write init");
    let out = run(&[
        "evolve",
        "--n",
        "2",
        "--alpha",
        "1",
        "--beta",
        "2",
        "--init",
        &format!("file={}", path.display()),
        "--t",
        "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("does not match order"));
}

#[test]
fn evolve_rejects_negative_time() {
    let out = run(&[
        "evolve", "--n", "2", "--alpha", "1", "--beta", "2", "--t", "-1",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let args = [
        "simulate", "--n", "4", "--alpha", "1", "--beta", "2", "--trials", "3000", "--seed", "42",
        "--t", "0.5,2",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let mut reseeded = args;
    reseeded[9] = "43";
    let third = run(&reseeded);
    assert_ne!(first.stdout, third.stdout, "different seeds must differ");
}

#[test]
fn simulate_requires_seed() {
    let out = run(&[
        "simulate", "--n", "2", "--alpha", "1", "--beta", "1", "--trials", "10", "--t", "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("--seed is required"));
}

#[test]
fn simulate_pure_filling_saturates() {
    let out = run(&[
        "simulate", "--n", "3", "--alpha", "1", "--beta", "0", "--trials", "200", "--seed", "7",
        "--t", "60",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let full_row = text
        .lines()
        .find(|l| l.starts_with("60,3,"))
        .expect("k = 3 row");
    let count: u64 = full_row
        .split(',')
        .nth(2)
        .expect("count")
        .parse()
        .expect("integer");
    assert_eq!(count, 200, "all trials must end full: {full_row}");
}

#[test]
fn simulate_config_file_route() {
    let dir = scratch("cfg");
    let path = dir.join("sim.json");
    std::fs::write(
        &path,
        r#"{"n":3,"alpha":"1/1","beta":"2/1","trials":500,"seed":5,"t_grid":[0.5,2.0],"init":{"kind":"fixed","filled":3}}"#,
    )
    .expect("write config");
    let args = ["simulate", "--config", path.to_str().expect("utf-8 path")];
    let out = run(&args);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("t,k,count,freq,stderr\n"));
    // 4 occupancy bins per grid time
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    let rerun = run(&args);
    assert_eq!(out.stdout, rerun.stdout);
}

#[test]
fn simulate_config_conflicts_with_flags() {
    let dir = scratch("cfg-conflict");
    let path = dir.join("sim.json");
    std::fs::write(
        &path,
        r#"{"n":2,"alpha":"1/1","beta":"1/1","trials":10,"seed":1,"t_grid":[1.0]}"#,
    )
    .expect("write config");
    let out = run(&[
        "simulate",
        "--config",
        path.to_str().expect("utf-8 path"),
        "--seed",
        "9",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_json_summary_shape() {
    let out = run(&[
        "simulate", "--n", "2", "--alpha", "1", "--beta", "1", "--trials", "400", "--seed", "11",
        "--t", "1", "--format", "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["distribution"]["trials"], 400);
    let counts = v["distribution"]["counts"][0]
        .as_array()
        .expect("counts row");
    let total: u64 = counts.iter().map(|c| c.as_u64().expect("count")).sum();
    assert_eq!(total, 400);
    assert!(v["coverage"][0]["mean"].is_number());
    assert_eq!(v["init"]["kind"], "fixed");
}

#[test]
fn output_dir_env_var_places_relative_paths() {
    let dir = scratch("outdir");
    let out = bin()
        .args([
            "eigen", "--n", "1", "--alpha", "1", "--beta", "1", "--output", "eig.json",
        ])
        .env("DEPEVAP_OUTPUT_DIR", &dir)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let written = std::fs::read_to_string(dir.join("eig.json")).expect("file placed in dir");
    let v: serde_json::Value = serde_json::from_str(&written).expect("valid JSON");
    assert_eq!(v["eigenvalues"], serde_json::json!(["0/1", "-2/1"]));
}
