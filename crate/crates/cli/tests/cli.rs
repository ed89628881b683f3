use std::process::{Command, Output};

fn xychain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xychain")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV with `#` header lines, keyed by column name.
fn table(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| cols.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn point_ising_small_field() {
    let o = xychain(&["point", "--gamma", "1", "--h", "0.2", "--rmax", "5"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o));
    assert_eq!(rows.len(), 5);
    let h: f64 = 0.2;
    assert!((f(&rows[0]["C"]) - (h * h / 8.0 + 3.0 * h.powi(4) / 128.0)).abs() < 5e-6);
    assert!((f(&rows[1]["C"]) - h.powi(4) / 128.0).abs() < 5e-6);
    for r in &rows[2..] {
        assert_eq!(f(&r["C"]), 0.0);
    }
}

#[test]
fn point_on_factorized_circle() {
    let hf = (1.0f64 - 0.25).sqrt().to_string();
    let o = xychain(&["point", "--gamma", "0.5", "--h", &hf, "--rmax", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for r in table(&text) {
        assert!(f(&r["C"]) < 1e-12);
    }
    let tau1 = text.lines().find_map(|l| l.strip_prefix("# tau1: ")).unwrap();
    assert!(f(tau1).abs() < 1e-12);
}

#[test]
#[allow(clippy::approx_constant)]
fn point_xx_magnetization() {
    let o = xychain(&["point", "--gamma", "0", "--h", "0.7071", "--rmax", "3"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o));
    // M_z = arcsin(h)/π at γ = 0.
    assert!((f(&rows[0]["mz"]) - 0.7071f64.asin() / std::f64::consts::PI).abs() < 1e-10);
    assert!((f(&rows[0]["mz"]) - 0.25).abs() < 1e-4);
}

#[test]
fn point_output_is_byte_identical() {
    let args = ["point", "--gamma", "0.3", "--h", "0.7", "--rmax", "8"];
    assert_eq!(xychain(&args).stdout, xychain(&args).stdout);
}

#[test]
fn scan_rows_follow_grid_order() {
    let o = xychain(&["scan", "--gamma", "0.25,0.5", "--h", "lin:0.2:1.4:3", "--jobs", "2"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o));
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r["gamma"]), f(&r["h"]))).collect();
    assert_eq!(keys, vec![(0.25, 0.2), (0.25, 0.8), (0.25, 1.4), (0.5, 0.2), (0.5, 0.8), (0.5, 1.4)]);
    for r in &rows {
        assert!(f(&r["tau2"]) <= f(&r["tau1"]) + 1e-8);
    }
}

#[test]
fn domain_error_exit_code_and_class() {
    let o = xychain(&["point", "--gamma", "1.5", "--h", "0.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[domain]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(xychain(&["point", "--gamma", "0.5"]).status.code(), Some(2));
    assert_eq!(xychain(&["figure", "7"]).status.code(), Some(2));
    assert_eq!(xychain(&["accept", "--only", "no-such-criterion"]).status.code(), Some(2));
    assert_eq!(xychain(&["accept", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(xychain(&["point", "--gamma", "0.5", "--h", "0.5", "--tol", "0"]).status.code(), Some(2));
}

#[test]
fn undecided_range_is_numerical_failure() {
    // At h = 1, γ = 1e-3 the range is above 1000; a budget of 50 cannot close it.
    let o = xychain(&["range", "--gamma", "1e-3", "--h", "1", "--rmax", "50"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[undetermined]"));
}

#[test]
fn range_and_xi2se_report() {
    let o = xychain(&["range", "--gamma", "0.5", "--eps", "1e-4", "--side", "below"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("R: 9\n"));
    let o = xychain(&["xi2se", "--gamma", "0.25", "--eps", "1e-4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let xi = f(text.lines().find_map(|l| l.strip_prefix("xi: ")).unwrap());
    let alpha2 = 0.75 / 1.25;
    assert!((xi * (alpha2 as f64).ln().abs() - 1.0).abs() < 0.05);
}

#[test]
fn accept_single_criterion() {
    let o = xychain(&["accept", "--only", "monogamy"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("[PASS]  8 monogamy"));
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 1);
}

#[test]
fn accept_tampered_tolerance_fails() {
    let dir = std::env::temp_dir().join(format!("xychain-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("report.json");
    let o = xychain(&["accept", "--only", "pfeuty", "--set", "pfeuty_abs=1e-15", "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("[FAIL]  1 pfeuty"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["criteria"][0]["passed"], false);
    assert_eq!(report["tolerances"]["pfeuty_abs"], 1e-15);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn figure_three_vanishes_at_saturation() {
    let dir = std::env::temp_dir().join(format!("xychain-fig-{}", std::process::id()));
    let o = xychain(&["figure", "3", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.join("fig3.csv")).unwrap();
    assert!(text.starts_with("# version: "));
    let rows = table(&text);
    for r in &rows {
        let h = f(&r["h"]);
        for k in 1..=7 {
            let c = f(&r[&format!("C{k}")]);
            if h >= 1.0 - 1e-12 {
                assert_eq!(c, 0.0, "h={h} C{k}={c}");
            }
        }
    }
    // C1 is the highest curve everywhere below saturation.
    for r in rows.iter().filter(|r| f(&r["h"]) < 1.0) {
        assert!(f(&r["C1"]) >= f(&r["C2"]));
    }
    std::fs::remove_dir_all(&dir).ok();
}
