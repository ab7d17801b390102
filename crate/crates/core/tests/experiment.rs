use std::process::Command;

use nlfem::experiment::{
    csv_string, parse_csv, run_solve, run_solve_with_diagnostics, run_sweep, ExperimentConfig, ExperimentResult, OneOrMany,
    SweepMode, CSV_COLUMNS,
};
use nlfem::validation::mutated_energy_error;
use nlfem::KernelParams;

fn sample_row(recovery: bool) -> ExperimentResult {
    ExperimentResult {
        domain: "rect".into(),
        solution: "rect-trig".into(),
        order: 2,
        n: 16,
        h: 2f64.sqrt() / 16.0,
        delta: 0.01,
        s: 2.0,
        l2_error: 1.234567891e-4,
        h1_error: 3.3e-3,
        grad_rec_full: recovery.then_some(0.1),
        grad_rec_interior: recovery.then_some(0.02),
        grad_rec_corrected: recovery.then_some(0.03),
        assembly_time_s: 0.0123,
        assembly_time_generic_s: None,
        solve_time_s: 0.5,
        cg_iters: 108,
        n_dofs: 1089,
        nnz: 62001,
    }
}

#[test]
fn csv_round_trip() {
    assert_eq!(csv_string(&[]), CSV_COLUMNS.join(",") + "\n");
    assert!(parse_csv(&csv_string(&[])).unwrap().is_empty());
    let rows = vec![sample_row(true), sample_row(false)];
    let text = csv_string(&rows);
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(csv_string(&parsed), text);
    assert_eq!(parsed[1].grad_rec_full, None);
    assert_eq!(parsed[0].cg_iters, 108);
    assert!((parsed[0].l2_error - 1.23457e-4).abs() < 1e-18);
    let line = text.lines().nth(1).unwrap();
    assert!(line.starts_with("rect,rect-trig,2,16,8.83883e-2,1.00000e-2,2.00000e0,1.23457e-4,"));
    assert!(parse_csv("domain,solution\n").is_err());
}

#[test]
fn config_from_json() {
    let c: ExperimentConfig =
        serde_json::from_str(r#"{"domain": "lshape", "solution": "lshape-mixed", "n": [8, 16], "delta": 0.01, "cutoff-eps": 1e-12, "no-invariance": true}"#)
            .unwrap();
    assert_eq!(c.n, OneOrMany::Many(vec![8, 16]));
    assert_eq!(c.delta, OneOrMany::One(0.01));
    assert_eq!(c.cutoff_eps, 1e-12);
    assert!(c.no_invariance);
    assert_eq!(c.s, 2.0);
    assert_eq!(c.sweep_mode(), SweepMode::H);
    assert_eq!(c.quad_order(), 3);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    let bad = ExperimentConfig { n: OneOrMany::Many(vec![8, 32, 16]), ..Default::default() };
    assert!(bad.expand().is_err());
}

#[test]
fn repeated_runs_agree_except_timings() {
    let config = ExperimentConfig { n: OneOrMany::Many(vec![2, 4, 8]), order: 2, recovery: true, ..Default::default() };
    let strip = |rows: &[ExperimentResult]| {
        rows.iter()
            .map(|r| ExperimentResult { assembly_time_s: 0.0, solve_time_s: 0.0, assembly_time_generic_s: None, ..r.clone() })
            .collect::<Vec<_>>()
    };
    let a = run_sweep(&config).unwrap();
    let b = run_sweep(&config).unwrap();
    assert_eq!(csv_string(&strip(&a.rows)), csv_string(&strip(&b.rows)));
    assert_eq!(a.l2_rates.len(), 2);
}

#[test]
fn short_sweep_is_rejected() {
    let config = ExperimentConfig { n: OneOrMany::Many(vec![4, 8]), ..Default::default() };
    assert!(run_sweep(&config).is_err());
    let single = ExperimentConfig { n: OneOrMany::One(4), ..Default::default() };
    assert_eq!(run_sweep(&single).unwrap().rows.len(), 1);
}

#[test]
fn fast_and_generic_assembly_agree() {
    let config = ExperimentConfig {
        n: OneOrMany::One(16),
        order: 2,
        delta: OneOrMany::One(0.05),
        compare_assembly: true,
        ..Default::default()
    };
    let (row, diag) = run_solve_with_diagnostics(&config).unwrap();
    assert!(diag.assembly_mismatch.unwrap() <= 1e-12);
    assert!(row.assembly_time_generic_s.is_some());
    assert!(diag.cg_converged);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let config = ExperimentConfig { domain: "cube".into(), ..Default::default() };
    assert!(run_solve(&config).is_err());
}

#[test]
fn corrupted_matrix_fails_energy_identity() {
    let params = KernelParams::new(0.2, 2.0).unwrap();
    assert!(mutated_energy_error(&params, 0.0).unwrap() <= 1e-6);
    assert!(mutated_energy_error(&params, 1e-3).unwrap() > 1e-6);
}

#[test]
fn command_line() {
    let bin = env!("CARGO_BIN_EXE_nlfem");
    let dir = std::env::temp_dir().join(format!("nlfem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("sweep.csv");
    let config = dir.join("run.json");
    std::fs::write(&config, r#"{"order": 2, "n": [2, 4, 8], "delta": 0.05}"#).unwrap();
    let status = Command::new(bin)
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--order", "1", "--threads", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = nlfem::experiment::read_csv(&out).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.order == 1));

    let info = Command::new(bin).args(["info", "--domain", "cube", "--n", "4"]).output().unwrap();
    assert!(info.status.success());
    assert!(String::from_utf8_lossy(&info.stdout).contains("125 dofs"));

    let validate = Command::new(bin).args(["validate", "--suite", "integrals"]).output().unwrap();
    assert!(validate.status.success());
    assert_eq!(String::from_utf8_lossy(&validate.stdout).matches("PASS").count(), 4);

    let bad = Command::new(bin).args(["solve", "--domain", "nowhere"]).output().unwrap();
    assert!(!bad.status.success());
    std::fs::remove_dir_all(&dir).ok();
}
