use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bloch-siegert"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(dir.join("out").join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

const SMALL: &str = "delta_e = 5.0\ndelta_n = 7\nn0 = 400\nn_max = 1200\n";

#[test]
fn dressed_table_rows() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dressed"], "k = 1\ng_min = 0.0\ng_max = 0.1\ng_steps = 1\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(dir.path(), "dressed.csv");
    assert_eq!(h, ["g", "dressed_ratio", "series_ratio", "hs_ratio_k"]);
    assert_eq!(rows[0], [0.0, 1.0, 1.0, 1.0]);
    assert!((rows[1][2] - 1.0388).abs() < 1e-12);
    assert!((rows[1][3] - 1.04373).abs() < 5e-6);
    // the exact dressed ratio at n0 = 1e5 sits just above the truncated series
    assert!((rows[1][1] - 1.0388).abs() < 2e-4);
}

#[test]
fn manifest_lists_outputs() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dressed", "--seed", "7"], "g_steps = 4\n");
    assert!(o.status.success());
    let m = json(dir.path(), "manifest.json");
    assert_eq!(m["command"], "dressed");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
    assert!(m["outputs"][0].as_str().unwrap().ends_with("dressed.csv"));
    assert_eq!(m["params"]["delta_e"], 11.0);
    assert!(m["versions"]["bloch-siegert"].is_string());
    assert!(m["tolerances"]["quadrature_rtol"].is_number());
}

#[test]
fn identical_runs_give_identical_csv() {
    for (cmd, cfg, file) in [
        ("dressed", "g_steps = 20\n", "dressed.csv"),
        ("dynamics", "t_steps = 50\n", "trajectory.csv"),
        ("spectrum", "delta_e = 5.0\nn0 = 200\nn_max = 400\ng = 0.2\nwindow = 5\n", "spectrum.csv"),
    ] {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        assert!(run(a.path(), &[cmd, "--seed", "3"], cfg).status.success());
        assert!(run(b.path(), &[cmd, "--seed", "3"], cfg).status.success());
        let read = |d: &TempDir| fs::read(d.path().join("out").join(file)).unwrap();
        assert_eq!(read(&a), read(&b), "{cmd}");
    }
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dressed"], "delta_e = 11.0\nbogus_key = 3\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus_key"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bloch-siegert"))
        .args(["dressed", "--config"])
        .arg(dir.path().join("absent.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_basis_is_a_capacity_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["spectrum"], "n0 = 400\ng = 0.1\nn_max = 4000000000000000000\n");
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn zero_coupling_scan_has_no_resonance() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["splitting-scan"], "g = 0.0\nn0_list = [1000]\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no resonance"), "{}", stderr(&o));
}

#[test]
fn zero_coupling_dynamics_is_frozen() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dynamics"], "coupling_u = 0.0\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(dir.path(), "trajectory.csv");
    let (pm, p0, pp) = (col(&h, "p_m1"), col(&h, "p_0"), col(&h, "p_p1"));
    for r in &rows {
        assert_eq!((r[pm], r[p0], r[pp]), (1.0, 0.0, 0.0));
    }
}

#[test]
fn default_dynamics_returns_after_one_period() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dynamics"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(dir.path(), "dynamics.json");
    let v = report["v"].as_f64().unwrap();
    assert!(v > 0.0);
    let period = report["period"].as_f64().unwrap();
    assert!((period - 2.0 * PI / (SQRT_2 * v)).abs() < 1e-9 * period);
    let (h, rows) = csv_rows(dir.path(), "trajectory.csv");
    assert_eq!(h, ["t_omega0", "p_m1", "p_0", "p_p1", "expect_M", "expect_dn"]);
    // two periods over 400 steps: half a period is row 100
    assert_eq!(rows.len(), 401);
    assert!((rows[0][1] - 1.0).abs() < 1e-12);
    assert!(rows[100][1] < 1e-12 && (rows[100][3] - 1.0).abs() < 1e-12);
    assert!((rows[200][1] - 1.0).abs() < 1e-12);
    assert!(report["oscillation_rms"].as_f64().unwrap() < 1e-10);
}

#[test]
fn twenty_five_quanta_are_exchanged() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dynamics"], "delta_n = 25\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(dir.path(), "trajectory.csv");
    let dn = col(&h, "expect_dn");
    assert!((rows[0][dn] - 25.0).abs() < 1e-10);
    assert!((rows[100][dn] + 25.0).abs() < 1e-10);
}

#[test]
fn detuned_dynamics_leaves_the_middle_state_empty() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["dynamics"], "detuning = 0.05\nt_steps = 2000\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path(), "dynamics.json")["v"].as_f64().unwrap();
    let (h, rows) = csv_rows(dir.path(), "trajectory.csv");
    let p0 = col(&h, "p_0");
    let peak = rows.iter().map(|r| r[p0]).fold(0.0, f64::max);
    assert!(peak < 8.0 * (v / 0.05).powi(2), "{peak}");
}

#[test]
fn small_instance_resonance() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["resonance"], SMALL);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(dir.path(), "resonance.json");
    let ratio = r["g_star_over_g_resonance"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    let s = r["splitting"].as_f64().unwrap();
    assert!((s / 0.032566 - 1.0).abs() < 1e-3, "{s}");
}

#[test]
fn bracket_without_minimum_is_numerical_error() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL}g_bracket = [0.30, 0.32]\n");
    let o = run(dir.path(), &["resonance"], &cfg);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn fit_away_from_resonance() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["fit"], "delta_e = 5.0\ndelta_n = 7\nn0 = 400\nn_max = 1200\ng = 0.2\nwindow = 10\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let f = json(dir.path(), "fit.json");
    assert!((f["b"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(f["levels_used"].as_u64().unwrap() >= 15);
    let mismatch = f["mismatch"].as_f64().unwrap();
    let (d, ff) = (f["d"].as_f64().unwrap(), f["f"].as_f64().unwrap());
    assert!((mismatch - (ff - 7.0 * d)).abs() < 1e-15);
}

#[test]
fn scan_with_majority_failures_exits_nonzero() {
    // the anticrossing search is defined for spin 1 only
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["splitting-scan"], "spin = 0.5\nn0_list = [400, 800]\ndelta_e = 5.0\ndelta_n = 7\n");
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let m = json(dir.path(), "manifest.json");
    assert_eq!(m["failures"].as_array().unwrap().len(), 2);
}

#[test]
fn small_scan_is_sorted() {
    let dir = TempDir::new().unwrap();
    let cfg = "delta_e = 5.0\ndelta_n = 7\nn0_list = [800, 400]\n";
    let o = run(dir.path(), &["splitting-scan", "--threads", "2"], cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = csv_rows(dir.path(), "splitting_scan.csv");
    let n0 = col(&h, "n0");
    assert_eq!((rows[0][n0], rows[1][n0]), (400.0, 800.0));
    assert!((rows[0][col(&h, "splitting")] / 0.032566 - 1.0).abs() < 1e-3);
    assert_eq!(json(dir.path(), "splitting_summary.json")["points_ok"], 2);
}

#[test]
fn ncrit_estimate_for_the_reference_model() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["ncrit"], "n0_list = []\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(dir.path(), "ncrit.json");
    let est = r["n_crit_estimate"].as_f64().unwrap();
    assert!((est / 3.26e4 - 1.0).abs() < 0.1, "{est}");
    assert!(r["n_crit_measured"].is_null());
}

#[test]
fn ncrit_measured_from_the_scan() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["ncrit"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(dir.path(), "ncrit.json");
    let measured = r["n_crit_measured"].as_f64().unwrap();
    assert!(measured > 2.7e4 / 1.5 && measured < 2.7e4 * 1.5, "{measured}");
}

#[test]
fn wkb_constants() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["wkb"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let w = json(dir.path(), "wkb.json");
    assert!((w["i_over_sqrt_n0"].as_f64().unwrap() / 1.77e-3 - 1.0).abs() < 0.02);
    let (_, rows) = csv_rows(dir.path(), "wkb_ladder.csv");
    assert_eq!(rows.len(), 4);
}
