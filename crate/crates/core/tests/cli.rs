use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use hurstvol::cli;
use hurstvol::specfun::HurstValue;
use hurstvol::synth::{self, FgnCovariance, Normalization};

fn write_prices(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let cov = FgnCovariance::new(HurstValue::HALF, 0.01, Normalization::Unit).unwrap();
    let logp = synth::synth_fbm(&cov, n, seed).unwrap();
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    let mut text = String::from("Date,Open,Close\n");
    for (i, v) in logp.values.iter().enumerate() {
        let d = start + Days::new(i as u64);
        let p = 100.0 * v.exp();
        text.push_str(&format!("{d},{p:.6},{p:.6}\n"));
    }
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("hurstvol").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_prices(dir.path(), "walk", 3000, 1);
    let out = dir.path().join("out");
    assert_eq!(run(&["analyze", s(&input), "--out", s(&out), "--svg"]), 0);
    for suffix in [
        "hurst.csv",
        "hurst.svg",
        "fit.csv",
        "scatter.svg",
        "report.json",
    ] {
        assert!(out.join(format!("walk.{suffix}")).exists(), "{suffix}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("walk.report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["n"], 3000);
    assert_eq!(
        report["fair_volatility"]["intervals"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let hurst = fs::read_to_string(out.join("walk.hurst.csv")).unwrap();
    assert!(hurst.starts_with("t,h_hat,sigma_hat,flag\n"));
    assert_eq!(hurst.lines().count(), 1 + 3000 - 21);
}

#[test]
fn analyze_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_prices(dir.path(), "walk", 2000, 2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["analyze", s(&input), "--out", s(&a)]), 0);
    assert_eq!(run(&["analyze", s(&input), "--out", s(&b)]), 0);
    for suffix in ["hurst.csv", "fit.csv"] {
        let name = format!("walk.{suffix}");
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap()
        );
    }
}

#[test]
fn estimates_do_not_look_ahead() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_prices(dir.path(), "full", 1500, 3);
    let text = fs::read_to_string(&full).unwrap();
    let short: String = text
        .lines()
        .take(1 + 1000)
        .map(|l| format!("{l}\n"))
        .collect();
    let short_path = dir.path().join("short.csv");
    fs::write(&short_path, short).unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(&["analyze", s(&full), s(&short_path), "--out", s(&out)]),
        0
    );
    let a = fs::read_to_string(out.join("full.hurst.csv")).unwrap();
    let b = fs::read_to_string(out.join("short.hurst.csv")).unwrap();
    let prefix: Vec<&str> = a.lines().take(b.lines().count()).collect();
    assert_eq!(prefix, b.lines().collect::<Vec<_>>());
}

#[test]
fn odd_window_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_prices(dir.path(), "walk", 500, 4);
    let out = dir.path().join("out");
    assert_eq!(
        run(&["analyze", s(&input), "--out", s(&out), "--window", "21"]),
        2
    );
}

#[test]
fn missing_close_column_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_prices(dir.path(), "good", 1500, 5);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "Date,Price\n2000-01-03,1\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["analyze", s(&good), s(&bad), "--out", s(&out)]), 1);
    assert!(out.join("good.report.json").exists());
}

#[test]
fn presets_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(&["synth", "--preset", "fig1", "--out", s(out)]), 0);
    assert_eq!(run(&["synth", "--preset", "fig2", "--out", s(out)]), 0);
    for f in [
        "fig1.iid.csv",
        "fig1.ar1.csv",
        "fig1.iid.acf.csv",
        "fig1.ar1.acf.csv",
        "fig2.hpath.csv",
        "fig2.path.csv",
        "fig2.acf_first.csv",
        "fig2.acf_second.csv",
        "fig2.acf_full.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let path = fs::read_to_string(out.join("fig2.path.csv")).unwrap();
    assert_eq!(path.lines().count(), 1 + 4096);
}

#[test]
fn synth_spec_file_and_seed_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n": 300, "seed": 5, "params": {"kind": "fbm", "hurst": 0.7, "scale": 1.0, "normalization": "kernel_vh"}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["synth", "--spec", s(&spec), "--out", s(&out)]), 0);
    assert_eq!(
        fs::read_to_string(out.join("fbm.path.csv"))
            .unwrap()
            .lines()
            .count(),
        301
    );
    let one = dir.path().join("one");
    let two = dir.path().join("two");
    assert_eq!(
        run(&[
            "synth",
            "--kind",
            "iid",
            "--n",
            "100",
            "--seed",
            "3",
            "--out",
            s(&one)
        ]),
        0
    );
    assert_eq!(
        run(&[
            "synth",
            "--kind",
            "iid",
            "--n",
            "100",
            "--seed",
            "3",
            "--out",
            s(&two)
        ]),
        0
    );
    assert_eq!(
        fs::read(one.join("iid.path.csv")).unwrap(),
        fs::read(two.join("iid.path.csv")).unwrap()
    );
}

#[test]
fn verify_passes_and_detects_a_perturbed_constant() {
    assert_eq!(run(&["verify"]), 0);
    assert_eq!(run(&["verify", "--perturb-vh", "1e-6"]), 1);
}

#[test]
fn bad_arguments_exit_with_configuration_code() {
    assert_eq!(run(&["analyze"]), 2);
    assert_eq!(run(&["nonsense"]), 2);
    assert_eq!(run(&["--help"]), 0);
}
