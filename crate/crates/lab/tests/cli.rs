use std::path::Path;
use std::process::{Command, Output};

use onesided_core::{Grid, Weight};
use onesided_lab::formats::{read_sweep_csv, read_weight_csv, weight_csv, FittedConstants, InvariantResult};
use onesided_lab::{run, ExperimentConfig, RunOptions, Subcommand};

fn onesided(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onesided"))
        .args(args)
        .env_remove("ONESIDED_THREADS")
        .env_remove("ONESIDED_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn constant_weight_prints_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"weights": [{"family": {"kind": "constant", "value": 3}}]}"#);
    let out = onesided(&["--subcommand", "characteristic", "--config", &cfg, "--m", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "constant m=5 1.0\n");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kernel": {"kind": "hilbert", "band": 0}}"#);
    let out = onesided(&["--subcommand", "norm", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel.band"));
    let out = onesided(&["--subcommand", "sweep", "--m", "13"]);
    assert_eq!(out.status.code(), Some(2));
    let out = onesided(&["--subcommand", "norm", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_onesided"))
        .args(["--subcommand", "characteristic"])
        .env("ONESIDED_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = onesided(&["--subcommand", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = write(dir.path(), "s.json", r#"{"grid": {"m": [5, 6]}, "sweep": {"exponents": [0, 0.5, 1, 1.5]}, "seed": 9}"#);
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = onesided(&["--subcommand", "sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["sweep.csv", "sweep.meta.json", "fitted.json", "plot_char_norm.csv", "plot_char_sqrt_kgl.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let rows = read_sweep_csv(&std::fs::read_to_string(a.join("sweep.csv")).unwrap(), &a).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.windows(2).all(|p| p[0].characteristic <= p[1].characteristic));
    let one = rows.iter().find(|r| r.weight_id == "power-a0.00").unwrap();
    assert_eq!(one.characteristic, 1.0);
    assert!(rows.iter().all(|r| r.ratio1.is_finite() && r.ratio2.is_finite() && r.ratio3.is_finite()));
    let fitted: FittedConstants = serde_json::from_str(&std::fs::read_to_string(a.join("fitted.json")).unwrap()).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("sweep.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["corpus_hash"].as_str().unwrap(), fitted.corpus_hash);
    assert_eq!(meta["seeds"], serde_json::json!([9]));
}

#[test]
fn env_out_dir_and_invariants_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_onesided"))
        .args(["--subcommand", "czdecomp", "--m", "7"])
        .env("ONESIDED_OUT_DIR", dir.path())
        .env("ONESIDED_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let inv: Vec<InvariantResult> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(inv.len(), 20);
    assert!(inv.iter().all(|i| i.passed));
    assert!(dir.path().join("czdecomp.json").exists());
}

#[test]
fn library_runs_every_subcommand_but_verify() {
    let cfg = ExperimentConfig::from_json(
        r#"{"grid": {"m": [5]}, "weights": [{"family": {"kind": "corpus", "size": 6}}, {"family": {"kind": "random_dyadic", "beta": 2}, "seeds": [1, 2]}],
            "stop_multiplier": 2, "sweep": {"exponents": [0, 1]}}"#,
    )
    .unwrap();
    let opts = RunOptions { threads: Some(2), ..Default::default() };
    for cmd in [
        Subcommand::Characteristic,
        Subcommand::Norm,
        Subcommand::Testing,
        Subcommand::Sparse,
        Subcommand::Czdecomp,
        Subcommand::Weak,
        Subcommand::Sweep,
    ] {
        let a = run(cmd, &cfg, &opts).unwrap();
        assert!(a.passed(), "{cmd:?}: {:?}", a.invariants.iter().find(|i| !i.passed));
        assert!(!a.files.is_empty());
        let b = run(cmd, &cfg, &RunOptions { threads: Some(1), ..Default::default() }).unwrap();
        assert_eq!(a, b, "{cmd:?}");
    }
}

#[test]
fn expression_kernel_matches_builtin() {
    let hilbert =
        ExperimentConfig::from_json(r#"{"grid": {"m": [5]}, "weights": [{"family": {"kind": "exp_monotone", "rate": 2}}]}"#).unwrap();
    let expr = ExperimentConfig::from_json(
        r#"{"grid": {"m": [5]}, "kernel": {"kind": "expr", "expr": "1 / (x - y)", "constant": 4}, "weights": [{"family": {"kind": "exp_monotone", "rate": 2}}]}"#,
    )
    .unwrap();
    let a = run(Subcommand::Norm, &hilbert, &RunOptions::default()).unwrap();
    let b = run(Subcommand::Norm, &expr, &RunOptions::default()).unwrap();
    assert_eq!(a.files["norm.csv"], b.files["norm.csv"]);
}

#[test]
fn weight_files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(0.0, 2.0, 6).unwrap();
    let w = Weight::from_fn(&g, |x| 1.0 + x * x, None).unwrap();
    let p = dir.path().join("w.csv");
    std::fs::write(&p, weight_csv(&w).unwrap()).unwrap();
    assert_eq!(read_weight_csv(&std::fs::read_to_string(&p).unwrap(), &p).unwrap(), w);
}

#[test]
fn verify_passes_on_the_frozen_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = onesided(&["--subcommand", "verify", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains(" PASS: ")).count(), 10, "{stdout}");
    let inv: Vec<InvariantResult> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(inv.len(), 10);
    let fitted: Vec<FittedConstants> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fitted.json")).unwrap()).unwrap();
    assert!(fitted.iter().all(|f| f.corpus_hash.len() == 64));
    assert!(fitted.iter().any(|f| f.constants.contains_key("C4")));
}
