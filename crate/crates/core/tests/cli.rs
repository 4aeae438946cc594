use std::path::Path;
use std::process::{Command, Output};

use cattaneo_similarity::closed_forms::{omega0_eval, omega0_solve_c1};
use cattaneo_similarity::io::{read_table_file, sidecar_path};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cattaneo-sim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exponents_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["exponents", "--omega", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"alpha":1,"beta":0.5,"delta":1.5,"epsilon":1,"x_star":2,"y_c":8}"#);
    let o = run(&["exponents", "--omega", "-0.5"], dir.path());
    assert_eq!(stdout(&o).trim(), r#"{"alpha":2,"beta":1,"delta":2,"epsilon":0.5,"x_star":9,"y_c":1}"#);
}

#[test]
fn exponents_outside_the_family_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["exponents", "--omega", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("omega > -1"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["profile", "--omega", "0", "--f-center", "1.5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["fields", "--omega", "0", "--r", "1:2"], dir.path()).status.code(), Some(2));
}

#[test]
fn step_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["trajectory", "--omega", "0", "--x0", "3", "--y0", "0.5", "--max-steps", "3"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn profile_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["profile", "--omega", "0", "--f-center", "3.13", "-o", "prof.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("prof.csv");
    let table = read_table_file(&path).unwrap();
    assert_eq!(table.header, ["eta", "f", "g"]);
    let f = table.column("f").unwrap();
    let last = f.iter().rev().find(|v| **v > 0.0).unwrap();
    assert!((last - 2.0).abs() < 1e-3, "{last}");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(meta["termination"], "CriticalPointApproach");
    assert!((meta["amplitude"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn closed_form_profile_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["profile", "--omega", "-0.5", "--closed-form"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = cattaneo_similarity::io::read_table(o.stdout.as_slice()).unwrap();
    for row in &table.rows {
        let expected = 9.0 / (row[0].powf(1.5) + 1.0).powi(2);
        assert!((row[1] - expected).abs() < 1e-12);
    }
    assert_eq!(table.rows.last().unwrap()[0], 10.0);
}

#[test]
fn closed_form_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["closed-form", "--case", "omega0", "--through", "3,0.5", "--eval", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = cattaneo_similarity::io::read_table(o.stdout.as_slice()).unwrap();
    let c1 = 8.0 * (3f64.sqrt() + 1.0).ln() - 7.5 * 3f64.sqrt();
    let y = 8.0 + 0.5f64.sqrt() * (c1 - 8.0 * (2.0 + 2f64.sqrt()).ln());
    assert!((table.rows[0][1] - y).abs() < 1e-12, "{:?} vs {y}", table.rows);
    let fam = omega0_solve_c1(3.0, 0.5).unwrap();
    assert!((table.rows[0][1] - omega0_eval(fam, 4.0).unwrap()).abs() < 1e-14);
}

#[test]
fn fields_then_residual() {
    let dir = tempfile::tempdir().unwrap();
    let mut energy = Vec::new();
    for n in ["50", "99"] {
        let range = format!("0.5:2:{n}");
        let o = run(
            &["fields", "--omega", "-0.5", "--closed-form", "--r", &range, "--t", &range, "-o", "f.csv", "--gnuplot"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(dir.path().join("f.csv.gp").exists());
        let o = run(&["residual", "-i", "f.csv"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        energy.push(rep["energy_max"].as_f64().unwrap());
        assert!(rep["cattaneo_max"].as_f64().unwrap() > 1.0);
    }
    // Halving h cuts the energy residual about fourfold. The worst point is the first
    // interior corner, which itself moves toward the boundary, so the ratio sits a
    // little under 4 at these sizes.
    let ratio = energy[0] / energy[1];
    assert!((3.0..4.5).contains(&ratio), "{energy:?}");
}

#[test]
fn numeric_fields_residual_uses_the_sidecar_front() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["fields", "--omega", "0", "--f-center", "3.13", "--r", "0.5:4.5:81", "--t", "1:2:21", "-o", "n.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["residual", "-i", "n.csv"], dir.path());
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep["excluded_band"]["front_points"].as_u64().unwrap() > 0);
    assert!(rep["excluded_band"]["eta0"].as_f64().is_some());
}

#[test]
fn scan_marks_positive_exponents_as_shock() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scan", "--from", "-0.9", "--to", "1", "--steps", "20"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,kind,eta0,amplitude,termination"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    for r in &rows {
        let omega: f64 = r[0].parse().unwrap();
        if omega > -0.5 {
            assert_eq!(r[1], "Shock", "{r:?}");
        }
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "omega = -0.5\n").unwrap();
    let o = run(&["--config", "run.cfg", "exponents"], dir.path());
    assert!(stdout(&o).contains(r#""x_star":9"#));
    let o = run(&["--config", "run.cfg", "exponents", "--omega", "0"], dir.path());
    assert!(stdout(&o).contains(r#""x_star":2"#));
    std::fs::write(dir.path().join("bad.cfg"), "colour = blue\n").unwrap();
    assert_eq!(run(&["--config", "bad.cfg", "exponents"], dir.path()).status.code(), Some(2));
}

#[test]
fn verbose_header_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--verbose", "profile", "--omega", "0", "--f-center", "3.13"], dir.path());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("# rel_tol = ") && err.contains("# f_center = 3.13"), "{err}");
    assert!(stdout(&o).starts_with("eta,f,g\n"));
}

#[test]
fn presets_and_bracket_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["presets"], dir.path());
    let presets: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(presets.as_array().unwrap().len(), 5);
    let o = run(&["bracket", "--lower", "-0.6", "--upper", "-0.4", "--iterations", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(b["evaluations"].as_array().unwrap().len(), 5);
    assert_eq!(b["reference"], -0.5);
    let o = run(&["bracket", "--lower", "0.1", "--upper", "0.2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
