use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcqp-admm")).args(args).current_dir(dir).output().expect("binary runs")
}

fn rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

fn header(text: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.headers().unwrap().iter().map(str::to_owned).collect()
}

#[test]
fn generate_fpp_writes_the_requested_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["generate", "fpp", "--n", "20", "--m", "32", "--seed", "7", "--out", "a.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x_feas norm"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(v["n"], 20);
    assert_eq!(v["constraints"].as_array().unwrap().len(), 32);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = bin(&["generate", "fpp", "--n", "20", "--m", "32", "--seed", "7", "--out", name], dir.path());
        assert!(out.status.success());
    }
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn generate_noisy_phase_retrieval_has_one_measurement_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "pr", "--n", "32", "--m", "160", "--noise", "gaussian", "--snr-db", "20", "--seed", "3", "--out", "p.json"];
    let out = bin(&args, dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("s energy"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(v["constraints"].as_array().unwrap().len(), 160);
}

#[test]
fn solve_emits_one_row_per_trial_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["generate", "fpp", "--n", "6", "--m", "8", "--seed", "1", "--out", "f.json"], dir.path());
    let out = bin(&["solve", "f.json", "--trials", "4", "--seed", "10", "--max-iter", "2000"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        header(&text),
        ["seed", "phase1_iters", "phase2_iters", "objective", "max_violation", "kkt_stationarity", "mse_db", "wall_time"]
    );
    let rows = rows(&text);
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (10 + k).to_string());
        assert!(row[4].parse::<f64>().unwrap() <= 1e-6);
    }
}

#[test]
fn solve_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["generate", "fpp", "--n", "5", "--m", "6", "--seed", "2", "--out", "f.json"], dir.path());
    let run = |threads: &str| {
        let out = bin(&["solve", "f.json", "--trials", "3", "--max-iter", "500", "--threads", threads], dir.path());
        assert!(out.status.success());
        // drop the wall-time column
        rows(&String::from_utf8(out.stdout).unwrap()).into_iter().map(|mut r| {
            r.pop();
            r
        }).collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("1"));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn out_file_is_appended_with_a_single_header() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["generate", "fpp", "--n", "4", "--m", "4", "--seed", "3", "--out", "f.json"], dir.path());
    for seed in ["0", "1"] {
        let out = bin(&["solve", "f.json", "--seed", seed, "--max-iter", "200", "--out", "r.csv"], dir.path());
        assert!(out.status.success());
    }
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(text.matches("seed,").count(), 1);
    assert_eq!(rows(&text).len(), 2);
}

#[test]
fn trace_iterations_strictly_increase() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["generate", "fpp", "--n", "5", "--m", "7", "--seed", "4", "--out", "f.json"], dir.path());
    let out = bin(&["solve", "f.json", "--max-iter", "300", "--trace", "t.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(header(&text)[0], "iteration");
    let its: Vec<u64> = rows(&text).iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(its.len() > 1);
    assert!(its.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn missing_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["solve", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_instance_and_unknown_command_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"n\": 3}").unwrap();
    assert_eq!(bin(&["solve", "bad.json"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn infeasible_instance_exits_with_one() {
    // |x|² ≤ 1 and |x|² ≥ 4 cannot both hold
    let dir = tempfile::tempdir().unwrap();
    let inst = r#"{"n": 1, "field": "complex", "kind": "generic", "objective": null,
        "constraints": [
            {"A": [[1.0, 0.0]], "c": 1.0, "sense": "le"},
            {"A": [[1.0, 0.0]], "c": 4.0, "sense": "ge"}
        ],
        "meta": {}}"#;
    fs::write(dir.path().join("inf.json"), inst).unwrap();
    let out = bin(&["solve", "inf.json", "--restarts", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn campaign_writes_one_row_per_sweep_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["campaign", "pr", "--n", "6", "--m", "24,30", "--trials", "2", "--out", "c.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let h = header(&text);
    assert_eq!(&h[..3], ["n", "m", "trials"]);
    let rows = rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "24");
    assert_eq!(rows[1][1], "30");
    assert!(h.contains(&"resolved_rate".to_string()));
}
