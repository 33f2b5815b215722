use std::path::Path;
use std::process::{Command, Output};

fn emg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emg")).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kind = fig1\n\npoisson_rate = -1\n").unwrap();
    let out = emg(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("poisson_rate"), "{err}");

    let out = emg(&["solve-uniform", "--step-factor", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step_factor"));

    let out = emg(&["fig", "2", "--set", "nonsense=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let out = emg(&["fig", "2", "--grid-steps", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let path = dir.path().join("out.csv");
    std::fs::write(&cfg, "# sweep\nkind = fig2\ngrid_steps = 3\nformat = json\n").unwrap();
    let out = emg(&["run", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&path);
    assert_eq!(header[0], "fixed_reward");
    assert_eq!(rows.len(), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("fig2: 3 rows"));
}

#[test]
fn csv_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    assert!(emg(&["fig", "3", "--out", path.to_str().unwrap()]).status.success());
    let raw = std::fs::read_to_string(&path).unwrap();
    assert!(!raw.contains('\r'));
    let (header, rows) = read_csv(&path);
    assert_eq!(rows.len(), 101);
    let idx = column(&header, "fee_same");
    for row in &rows {
        let v: f64 = row[idx].parse().unwrap();
        assert_eq!(format!("{v}"), row[idx]);
    }
}

#[test]
fn bad_rows_are_marked_and_the_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let out = emg(&["fig", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&path);
    let status = column(&header, "status");
    assert!(rows[0][status].starts_with("error"));
    assert!(rows[1..].iter().all(|r| r[status] == "ok"));
}

#[test]
fn all_rows_failing_sets_exit_code() {
    let out = emg(&["solve-disc", "--fees", "1,100,100"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("error")).count(), 3);
}

#[test]
fn json_output_is_an_array_of_rows() {
    let out = emg(&["simulate", "--powers", "1,1", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let total: u64 = rows.iter().map(|r| r["wins"].as_u64().unwrap()).sum();
    assert!(total <= 1000);
}

/// A fig2 row can be recomputed with solve-uniform from the printed fee.
#[test]
fn sweep_rows_are_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    assert!(emg(&["fig", "2", "--grid-steps", "4", "--out", path.to_str().unwrap()]).status.success());
    let (header, rows) = read_csv(&path);
    let row = &rows[2];
    let reward = &row[column(&header, "fixed_reward")];
    let fee = &row[column(&header, "optimal_fee")];

    let single = dir.path().join("single.csv");
    let out = emg(&["solve-uniform", "--fixed-reward", reward, "--fee", fee, "--out", single.to_str().unwrap()]);
    assert!(out.status.success());
    let (h2, r2) = read_csv(&single);
    assert_eq!(r2[0][column(&h2, "follower_power")], row[column(&header, "follower_power")]);
    assert_eq!(r2[0][column(&h2, "leader_profit_full")], row[column(&header, "leader_profit")]);
}

#[test]
fn same_seed_same_bytes_different_seed_differs() {
    let a = emg(&["simulate", "--seed", "5"]).stdout;
    let b = emg(&["simulate", "--seed", "5"]).stdout;
    let c = emg(&["simulate", "--seed", "6"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}
