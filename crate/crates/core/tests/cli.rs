use std::path::Path;
use std::process::{Command, Output};

use analyticity_lab::extension::{extend_solution, BoundaryMode};
use analyticity_lab::numerics::io::{read_field, read_series, write_field};
use analyticity_lab::numerics::{Field, Grid};
use analyticity_lab::projection::{halfspace_grid, random_admissible};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).env("LAB_THREADS", "1").output().expect("lab binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn list_json_round_trips() {
    let o = lab(&["list", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 7);
    let mut crit: Vec<u64> = entries.iter().flat_map(|e| e["criteria"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap())).collect();
    crit.sort_unstable();
    assert_eq!(crit, (1..=10).collect::<Vec<_>>());
    for e in entries {
        let text = serde_json::to_string(&e["config"]).unwrap();
        analyticity_lab::harness::RunConfig::from_json(&text).unwrap();
    }
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(code(&lab(&["list", "--bogus"])), 2);
    assert_eq!(code(&lab(&["frobnicate"])), 2);
    assert_eq!(code(&lab(&["run", "/definitely/missing.json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.field");
    assert_eq!(code(&lab(&["extend", "--mode", "dirichlet", "--in", "/missing.field", "--out", p(&out)])), 2);
    let bad = dir.path().join("bad.field");
    std::fs::write(&bad, "not a field\n").unwrap();
    assert_eq!(code(&lab(&["project", "--in", p(&bad), "--out", p(&out)])), 2);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"experiment":"lemmas","tolerances":{"nonsense":1.0}}"#).unwrap();
    assert_eq!(code(&lab(&["run", p(&cfg)])), 2);
    std::fs::write(&cfg, r#"{"experiment":"ns-shear","data":{"u0":{"file":"nowhere.field"}}}"#).unwrap();
    let o = lab(&["run", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.field"));
}

#[test]
fn lemma_run_passes_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lemmas.json");
    std::fs::write(&cfg, r#"{"experiment":"lemmas","criteria":[1],"quick":true}"#).unwrap();
    let out = dir.path().join("run");
    let o = lab(&["run", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("criterion  1 PASS"));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "pass");
    assert!(out.join("lemma_checks.csv").is_file());
}

#[test]
fn extend_then_restrict_recovers_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, vec![9, 5], vec![0.0, 0.0], 0.25, true).unwrap();
    let u = Field::scalar_from_fn(&g, |x| x[0].cos() * (1.0 + x[1]) * x[1]);
    let inp = dir.path().join("u.field");
    let out = dir.path().join("e.field");
    write_field(&inp, &u).unwrap();
    assert_eq!(code(&lab(&["extend", "--mode", "dirichlet", "--in", p(&inp), "--out", p(&out)])), 0);
    let e = read_field(&out).unwrap();
    assert_eq!(e, extend_solution(&u, BoundaryMode::Dirichlet, None).unwrap());
    assert_eq!(e.grid.shape, vec![9, 9]);
}

#[test]
fn solve_heat_on_halfspace_keeps_dirichlet_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, vec![17, 9], vec![0.0, 0.0], 0.125, true).unwrap();
    let u = Field::scalar_from_fn(&g, |x| (std::f64::consts::PI * x[1]).sin() * (1.0 - x[0] * x[0] / 4.0).max(0.0));
    let inp = dir.path().join("u0.field");
    write_field(&inp, &u).unwrap();
    let out = dir.path().join("heat");
    let o = lab(&["solve-heat", "--in", p(&inp), "--mode", "dirichlet", "--t-end", "0.01", "--dt", "0.002", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_series(&out).unwrap();
    assert!(s.len() >= 2);
    let last = s.snapshots.last().unwrap();
    assert!(last.grid.same_as(&g));
    for i in 0..17 {
        assert!(last.get(g.index(&[i, 0]), 0).abs() < 1e-12);
    }
    let mid = g.index(&[8, 4]);
    assert!(last.get(mid, 0) < u.get(mid, 0));
    assert_eq!(code(&lab(&["solve-heat", "--in", p(&inp), "--t-end", "0.01", "--dt", "0.002", "--out", p(&out)])), 2);
}

#[test]
fn project_writes_residual_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = halfspace_grid(2, 32, 33, 0.125).unwrap();
    let f = random_admissible(&g, 2, 7);
    let inp = dir.path().join("f.field");
    let out = dir.path().join("fp.field");
    let rep = dir.path().join("residuals.csv");
    write_field(&inp, &f).unwrap();
    let o = lab(&["project", "--in", p(&inp), "--out", p(&out), "--report", p(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&rep).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "identity_residual,h_residual,div_q,normal_trace,fprime_max");
    let vals: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(vals.iter().all(|v| v.is_finite()));
    assert_eq!(read_field(&out).unwrap().components, 4);
}

#[test]
fn kernel_commands_print_numbers() {
    let o = lab(&["kernel-eval", "--kernel", "Gamma", "--t", "1", "--x", "0,0.5", "--y", "0.1,0.2"]);
    assert_eq!(code(&o), 0);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    let r2 = 0.01 + 0.09;
    assert!((v - (-r2 / 4.0f64).exp() / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert_eq!(code(&lab(&["kernel-eval", "--kernel", "Q", "--t", "1", "--x", "0,0.5", "--y", "0,1"])), 2);
    let o = lab(&["kernel-l1", "--kernel", "Gamma", "--scan-t", "--ts", "0.5,1,2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,value,slope");
    for line in text.lines().skip(1) {
        let mass: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{line}");
    }
}

#[test]
fn ladder_reports_growth_constant() {
    let dir = tempfile::tempdir().unwrap();
    let tau = std::f64::consts::TAU;
    let g = Grid::with_periodic(2, vec![16, 4], vec![0.0, 0.0], tau / 16.0, false, vec![true, true]).unwrap();
    let u = Field::scalar_from_fn(&g, |x| x[0].sin());
    let inp = dir.path().join("u.field");
    write_field(&inp, &u).unwrap();
    let rep = dir.path().join("growth.csv");
    let o = lab(&["ladder", "--in", p(&inp), "--kmax", "6", "--x0", "1.5707963267948966,0", "--report", p(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&rep).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,abs_dtk_u,bound,A3_fit");
    assert_eq!(text.lines().count(), 8);
    let a3: f64 = text.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((a3 - 1.0).abs() < 0.1, "{a3}");
}

#[test]
fn verify_lemmas_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("ratios.csv");
    let o = lab(&["verify-lemmas", "--kmax", "40", "--trials", "5", "--report", p(&rep)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("10 of 10 checks hold"));
    let rows = analyticity_lab::diagnostics::sum_ratio_sweep(40).unwrap().ratios.len();
    assert_eq!(std::fs::read_to_string(&rep).unwrap().lines().count(), rows + 1);
}

#[test]
fn solve_ns_then_analyticity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ns.json");
    std::fs::write(
        &cfg,
        r#"{"u0":{"generator":"shear"},"h":0.125,"nt":16,"nn":25,"window":[0.05,0.2,24],"bounds":{"c0":1.2365,"c":2.0673}}"#,
    )
    .unwrap();
    let out = dir.path().join("series");
    let rep = dir.path().join("picard.csv");
    let o = lab(&["solve-ns", "--config", p(&cfg), "--out", p(&out), "--report", p(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let picard = std::fs::read_to_string(&rep).unwrap();
    assert_eq!(picard.lines().next().unwrap(), "m,sup_norm,diff_norm,ratio");
    assert!(picard.lines().count() >= 3);
    let env = dir.path().join("envelope.csv");
    let o = lab(&["analyticity", "--series", p(&out), "--kmax", "6", "--window", "0.05,0.2,24", "--report", p(&env)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&env).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,v_k,bound_Mkk,M_fit,delta_est");
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[2] * (1.0 + 1e-9), "{line}");
    }
    assert_eq!(code(&lab(&["analyticity", "--series", p(&out), "--window", "0.05,0.2"])), 2);
}
