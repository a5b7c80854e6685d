use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrl")).args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn transfer_reports_ideal_fidelity() {
    let out = qrl(&["transfer", "--omega-deg", "55", "--scenario", "c"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "fidelity,1"));
    assert!(text.lines().any(|l| l.starts_with("p_total,0.1739")));
}

#[test]
fn transfer_near_pole_with_imperfect_device() {
    let out = qrl(&["transfer", "--th-squared", "0.983", "--omega-deg", "5", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["fidelity"].as_f64().unwrap() < 1.0);
    assert_eq!(v["model"], "imperfect");
}

#[test]
fn degenerate_preparation_exits_three() {
    let out = qrl(&["transfer", "--omega-deg", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("linearly dependent"));
}

#[test]
fn bad_configuration_exits_two() {
    assert_eq!(qrl(&["transfer", "--visibility", "1.5"]).status.code(), Some(2));
    assert_eq!(qrl(&["transfer", "--scenario", "x"]).status.code(), Some(2));
    assert_eq!(qrl(&["bogus"]).status.code(), Some(2));
    assert_eq!(qrl(&["tomography"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_qrl"))
        .arg("sweep-tv")
        .env("QRL_NUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_omega_columns() {
    let out = qrl(&["sweep-omega"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0], ["omega_deg", "scenario", "fidelity", "success_prob", "note"]);
    assert_eq!(rows.len(), 1 + 17 * 3);
    for row in &rows[1..] {
        match row[1].as_str() {
            "b" => assert_eq!(row[2], "0.5"),
            "c" => assert_eq!(row[2], "1"),
            _ => {}
        }
    }
}

#[test]
fn sweep_tv_columns() {
    let out = qrl(&["sweep-tv", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    let row = rows.iter().find(|r| r["T_V"] == 0.334).unwrap();
    assert!((row["omega_star_deg"].as_f64().unwrap() - 55.2).abs() < 0.1);
    let p: Vec<f64> = rows.iter().map(|r| r["p_optimal"].as_f64().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    for r in rows {
        let defined = !r["p_tilde"].is_null();
        assert_eq!(defined, r["T_V"].as_f64().unwrap() < 0.5);
    }
}

#[test]
fn oracle_check_passes_and_negative_control_fails() {
    let out = qrl(&["oracle-check", "--th-squared", "0.983"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert!(rows.len() >= 51);
    assert_eq!(qrl(&["oracle-check", "--flip-reflection-sign"]).status.code(), Some(3));
}

#[test]
fn optimize_reports_both_angles() {
    let out = qrl(&["optimize"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let omega: f64 = rows[1][1].parse().unwrap();
    let kappa: f64 = rows[2][2].parse().unwrap();
    assert!((omega - 55.2).abs() < 0.1 && (kappa - 45.0).abs() < 0.5);
}

fn chi(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join(name)).unwrap()).unwrap()
}

fn metric(dir: &Path, name: &str) -> f64 {
    let text = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    let row = csv_rows(&text).into_iter().find(|r| r[0] == name).unwrap();
    row[1].parse().unwrap()
}

#[test]
fn tomography_full_protocol_high_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qrl(&["tomography", "--scenario", "c", "--shots", "100000", "--seed", "7", "--out", d]);
    assert!(out.status.success());
    assert!(metric(dir.path(), "fidelity") > 0.999);
    let counts = fs::read_to_string(dir.path().join("counts.csv")).unwrap();
    assert!(counts.starts_with("probe,basis,outcome,count\n"));
}

#[test]
fn tomography_dephasing_is_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qrl(&["tomography", "--scenario", "b", "--infinite-statistics", "--out", d]);
    assert!(out.status.success());
    let v = chi(dir.path(), "chi_hat.json");
    let trace = v["trace"].as_f64().unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let re = v["re"][i][j].as_f64().unwrap();
                let im = v["im"][i][j].as_f64().unwrap();
                assert!(re.hypot(im) / trace < 1e-9);
            }
        }
    }
    assert!(!dir.path().join("counts.csv").exists());
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qrl"))
            .arg("sweep-omega")
            .env("QRL_NUM_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
