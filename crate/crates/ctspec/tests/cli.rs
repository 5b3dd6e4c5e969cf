use std::fs::{self, File};
use std::path::Path;
use std::process::{Command, Output};

use ctspec::io::read_estimate;

fn ctspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctspec"))
        .args(args)
        .env_remove("CTSPEC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rates_prints_optimal_exponents() {
    let out = ctspec(&["rates", "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in ["bn_exponent=-1/3", "rho_exponent=1/6", "rate_exponent=1/3"] {
        assert!(
            text.lines().any(|l| l == line),
            "missing `{line}` in\n{text}"
        );
    }
}

#[test]
fn rates_accepts_fractional_orders() {
    let out = ctspec(&["rates", "--p", "3/2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    // D = 3/2 + 2 + 6 = 19/2
    assert!(stdout(&out).contains("bn_exponent=-7/19"));
}

#[test]
fn simulate_then_estimate_is_hermitian() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("x.csv");
    let estimate = dir.path().join("est.csv");
    let out = ctspec(&[
        "simulate",
        "--n",
        "100",
        "--rho",
        "8.61774",
        "--seed",
        "7",
        "--out",
        path(&samples),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let header = fs::read_to_string(&samples).unwrap();
    assert!(header.starts_with("ch1,ch2\n"));
    assert_eq!(header.lines().count(), 101);

    let out = ctspec(&[
        "estimate",
        "--input",
        path(&samples),
        "--rho",
        "8.61774",
        "--bn",
        "0.2",
        "--out",
        path(&estimate),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_estimate(File::open(&estimate).unwrap()).unwrap();
    assert_eq!(table.grid.len(), 301);
    for m in &table.matrices {
        assert_eq!(m.get(0, 1).unwrap(), m.get(1, 0).unwrap().conj());
        assert_eq!(m.get(0, 0).unwrap().im, 0.0);
        assert_eq!(m.get(1, 1).unwrap().im, 0.0);
    }

    let intervals = dir.path().join("ci.csv");
    let out = ctspec(&[
        "ci",
        "--input",
        path(&estimate),
        "--n",
        "100",
        "--bn",
        "0.2",
        "--out",
        path(&intervals),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&intervals).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,pair,component,lo,hi"));
    assert_eq!(lines.count(), 301 * 4 * 2);
}

#[test]
fn samples_round_trip_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("x.csv");
    let out = ctspec(&[
        "simulate",
        "--n",
        "50",
        "--rho",
        "3",
        "--seed",
        "1",
        "--out",
        path(&file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let read = ctspec::io::read_samples(File::open(&file).unwrap(), 3.0).unwrap();
    let direct = ctspec_core::OuMixtureModel::default()
        .simulate(50, 3.0, 1)
        .unwrap();
    assert_eq!(read.channels(), direct.samples.channels());
}

fn mc_files(dir: &Path) -> Vec<Vec<u8>> {
    ["ks.csv", "coverage.csv", "summary.csv"]
        .iter()
        .map(|f| fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn mc_study_is_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["1", "4", "4"]
        .iter()
        .enumerate()
        .map(|(i, threads)| {
            let out_dir = dir.path().join(format!("run{i}"));
            let out = ctspec(&[
                "mc-study",
                "--desk",
                "--n",
                "1000",
                "--replicates",
                "50",
                "--seed",
                "1",
                "--threads",
                threads,
                "--out-dir",
                path(&out_dir),
            ]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            mc_files(&out_dir)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    let ks = String::from_utf8(runs[0][0].clone()).unwrap();
    assert!(ks.starts_with("lambda,stat,D,pvalue\n"));
    let coverage = String::from_utf8(runs[0][1].clone()).unwrap();
    assert!(coverage.starts_with("lambda,stat,coverage,invalid_count\n"));
    let summary = String::from_utf8(runs[0][2].clone()).unwrap();
    assert!(summary.starts_with("stat,pct_p_above_05\n"));
}

#[test]
fn threads_env_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: &str, name: &str| {
        let out_dir = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_ctspec"))
            .args([
                "mc-study",
                "--n",
                "500",
                "--replicates",
                "20",
                "--seed",
                "3",
                "--out-dir",
            ])
            .arg(&out_dir)
            .env("CTSPEC_THREADS", env)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        mc_files(&out_dir)
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ctspec(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ctspec(&["rates", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        ctspec(&["mc-study", "--desk", "--full"]).status.code(),
        Some(2)
    );
    assert_eq!(ctspec(&[]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_1_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let checks: [&[&str]; 4] = [
        &["estimate", "--input", path(&missing)],
        &["rates", "--p", "1"],
        &["simulate", "--n", "10", "--rho=-1"],
        &["mc-study", "--n", "20000"],
    ];
    for args in checks {
        let out = ctspec(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
}

#[test]
fn malformed_samples_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "ch1,ch2\n1.0,2.0\n3.0,nan\n").unwrap();
    let out = ctspec(&[
        "estimate",
        "--input",
        path(&file),
        "--rho",
        "1",
        "--bn",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let out = ctspec(&[flag]);
        assert_eq!(out.status.code(), Some(0));
        assert!(!out.stdout.is_empty());
    }
    for sub in ["simulate", "estimate", "ci", "rates", "mc-study"] {
        assert_eq!(ctspec(&[sub, "--help"]).status.code(), Some(0));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, "kernel = \"bartlett\"\n\n[rates]\np = 3\nq = 2\n").unwrap();
    let out = ctspec(&["--config", path(&config), "rates"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // p = 3, q = 2: D = 17, b_n ~ n^(-5/17)
    assert!(stdout(&out).contains("bn_exponent=-5/17"));
    let out = ctspec(&["--config", path(&config), "rates", "--p", "2"]);
    assert!(stdout(&out).contains("bn_exponent=-1/3"));

    fs::write(&config, "[rates]\nunknown = 1\n").unwrap();
    let out = ctspec(&["--config", path(&config), "rates"]);
    assert_eq!(out.status.code(), Some(1));
}
