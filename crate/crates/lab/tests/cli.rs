use std::fs;
use std::process::Command;

use nudd_lab::cli::{run_from, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("nudd").chain(args.iter().copied());
    let code = run_from(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn predict_reproduces_four_layer_grid() {
    let (code, out, _) = run(&["predict", "--orders", "2,4,6,3"]);
    assert_eq!(code, EXIT_OK);
    for row in [
        "| 00 | 0 (0) | 6 (6) | 3 (3) | 7 (6) |",
        "| 10 | 2 (2) | 6 (6) | 3 (3) | 7 (6) |",
        "| 01 | 4 (4) | 6 (6) | 5 (4) | 7 (6) |",
        "| 11 | 4 (4) | 6 (6) | 5 (4) | 7 (6) |",
    ] {
        assert!(out.contains(row), "missing {row}\n{out}");
    }
}

#[test]
fn predict_csv_lists_every_type() {
    let (code, out, _) = run(&["predict", "--orders", "7,5,3,1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "r,predicted,naive");
    assert_eq!(lines.len(), 17);
    assert!(lines.contains(&"1111,10,7"));
}

#[test]
fn invalid_orders_are_config_errors() {
    assert_eq!(run(&["predict", "--orders", "2,0,1"]).0, EXIT_CONFIG);
    assert_eq!(run(&["predict", "--orders", "two"]).0, EXIT_CONFIG);
    assert_eq!(run(&["schedule", "--orders", "1", "--digits", "10"]).0, EXIT_CONFIG);
}

#[test]
fn schedule_csv_for_nested_spin_echo() {
    let (code, out, _) = run(&["schedule", "--orders", "1,1"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<String>> = out.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(out.lines().next().unwrap(), "time,layers_fired,interval_length");
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let fired: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(times, [0.25, 0.5, 0.75, 1.0]);
    assert_eq!(fired, ["1", "1;2", "1", "1;2"]);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.25));
}

#[test]
fn verify_passes_on_a_two_layer_spec() {
    let (code, out, _) = run(&["verify", "--orders", "1,2", "--trials", "100", "--words", "10"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 4, "{out}");
}

#[test]
fn coeffs_audit_has_no_violations() {
    let (code, out, _) = run(&["coeffs", "--orders", "1,3", "--digits", "40"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("ell,orders,r,n,word_count,max_abs_F,verdict"));
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["simulate", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn simulate_rejects_unknown_keys() {
    let (code, _, err) = run(&["simulate", "--seed", "1", "--set", "bogus=3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("bogus"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "seed = 4\nrealisations = 2\n").unwrap();
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap()]).0, EXIT_CONFIG);
}

fn small_simulation(dir: &std::path::Path, workers: &str) -> (i32, String) {
    let cfg = dir.join("small.conf");
    fs::write(
        &cfg,
        "# one-spin bath, low precision\n\
         orders = 1,1,1,1\n\
         n_bath_spins = 1\n\
         digits = 40\n\
         realizations = 1\n\
         log10_jtau_min = -5\n\
         log10_jtau_max = -2\n\
         points = 4\n\
         fit_min = -5\n\
         fit_max = -2\n",
    )
    .unwrap();
    let (code, out, err) = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--workers",
        workers,
        "--out-dir",
        dir.join("out").to_str().unwrap(),
    ]);
    assert!(code == 0 || code == 2, "{err}");
    (code, out)
}

#[test]
fn simulate_writes_all_outputs_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, md) = small_simulation(a.path(), "1");
    small_simulation(b.path(), "2");
    assert!(md.contains("Overall (D)"));
    for f in ["sweep.csv", "orders.md", "orders.csv", "manifest.json"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        if f != "manifest.json" {
            assert_eq!(x, y, "{f} differs across worker counts");
        }
    }
    let csv = fs::read_to_string(a.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# nudd sweep v1"));
    assert!(lines.next().unwrap().starts_with("log10_Jtau,tau,T,D_mean,E_0000"));
    let d: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), 4);
    assert!(d.windows(2).all(|w| w[0] < w[1]), "D grows with τ: {d:?}");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], "3");
    assert_eq!(manifest["digits"], "40");
    assert!(manifest["conventions"]["D"].as_str().unwrap().contains("Frobenius"));
    assert!(manifest["conventions"]["E"].as_str().unwrap().contains("nuclear"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nudd");
    let ok = Command::new(bin).args(["predict", "--orders", "2,4,1,6"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("| 00 | 0 (0) | 1 (1) | 2 (6) | 1 (6) |"));
    let bad = Command::new(bin).args(["simulate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
}
