//! End-to-end runs of the `htlab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn htlab(args: &[&str], config: &str, dir: &Path, threads: Option<&str>) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_htlab"));
    cmd.args(args).arg("--config").arg(&cfg);
    match threads {
        Some(n) => cmd.env("HTLAB_THREADS", n),
        None => cmd.env_remove("HTLAB_THREADS"),
    };
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const LAW_GBM: &str =
    "[model]\nkind = \"gbm\"\nsigma = 0.2\n[mc]\nn_paths = 200\nseed = 4\n[law]\nlambdas = [0.02, 0.06, 0.16]\n";

#[test]
fn law_experiment_writes_closed_form_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = htlab(&["law", "--out", out.to_str().unwrap()], LAW_GBM, tmp.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "law_laplace.csv");
    assert!(csv.starts_with("lambda_or_t,value,method,err_est\n"));
    for line in csv.lines().filter(|l| l.contains("closed-form")) {
        let f: Vec<&str> = line.split(',').collect();
        let lambda: f64 = f[0].parse().unwrap();
        let v: f64 = f[1].parse().unwrap();
        let want = 2.0 / (1.0 + (1.0 + 2.0 * lambda / 0.04).sqrt());
        assert!((v - want).abs() < 1e-15, "{line}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["experiment"], "law");
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["files"][0]["name"], "law_laplace.csv");
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = htlab(
        &["law", "--seed", "99", "--out", out.to_str().unwrap()],
        LAW_GBM,
        tmp.path(),
        None,
    );
    assert!(o.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 99);
}

#[test]
fn figures_with_mmm_defaults_write_the_figure_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig");
    let cfg = "[model]\nkind = \"mmm\"\n[grid]\nT = 5.0\ndt = 0.05\n[mc]\nn_paths = 8\nseed = 1\n";
    let o = htlab(&["figures", "--out", out.to_str().unwrap()], cfg, tmp.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "fig1_paths.csv",
        "fig2_running_max.csv",
        "fig3_inverse_max.csv",
        "fig4_z_process.csv",
        "fig5_protected.csv",
        "fig7_bessel_z.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert!(read(&out, "fig4_z_process.csv").starts_with("path_id,t,value,sigma,z\n"));
    assert!(read(&out, "fig5_protected.csv").starts_with("path_id,t,value,u\n"));
    // running maxima never decrease along a path
    let mut last = (String::new(), 0.0);
    for line in read(&out, "fig2_running_max.csv").lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let v: f64 = f[2].parse().unwrap();
        if f[0] == last.0 {
            assert!(v >= last.1);
        }
        last = (f[0].to_string(), v);
    }
}

#[test]
fn repeated_runs_are_byte_identical_for_any_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[model]\nkind = \"gbm\"\nsigma = 0.2\n[grid]\nT = 5.0\ndt = 0.01\n[mc]\nn_paths = 40\nseed = 8\n[payoff]\nname = \"put\"\nstrike = 2.5\n";
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, threads) in dirs.iter().zip([None, Some("1"), Some("3")]) {
        let o = htlab(
            &["maxlaw-check", "--out", d.to_str().unwrap()],
            cfg,
            tmp.path(),
            threads,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["path_stats.csv", "maxlaw.csv", "summary.csv"] {
        let a = read(&dirs[0], name);
        assert_eq!(a, read(&dirs[1], name), "{name}");
        assert_eq!(a, read(&dirs[2], name), "{name}");
    }
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("[model]\nkind = \"heston\"\n", "kind"),
        ("[model]\nkind = \"gbm\"\nsigma = 0.2\nsigmaa = 0.3\n", "sigmaa"),
        ("[model]\nkind = \"gbm\"\nsigma = -1.0\n", "model.sigma"),
        (
            "[model]\nkind = \"gbm\"\nsigma = 0.2\n[payoff]\nname = \"straddle\"\n",
            "straddle",
        ),
        (
            "[model]\nkind = \"gbm\"\nsigma = 0.2\n[grid]\nT = 1.0\ndt = 0.0\n",
            "grid.dt",
        ),
        (
            "[model]\nkind = \"gbm\"\nsigma = 0.2\n[mc]\nn_paths = 0\nseed = 1\n",
            "mc.n_paths",
        ),
    ];
    for (cfg, field) in cases {
        let o = htlab(
            &["law", "--out", tmp.path().join("x").to_str().unwrap()],
            cfg,
            tmp.path(),
            None,
        );
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{field} not in {err}");
    }
    let o = htlab(&["law", "--out", "x"], LAW_GBM, tmp.path(), Some("zero"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("HTLAB_THREADS"));
}

#[test]
fn validation_failures_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let base = "[model]\nkind = \"gbm\"\nsigma = 0.2\n[validate]\ncriteria = [9]\n";
    let o = htlab(
        &["validate", "--out", tmp.path().join("ok").to_str().unwrap()],
        base,
        tmp.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion  9"));

    // coarse steps bias the path-level honest times
    let coarse = "[model]\nkind = \"gbm\"\nsigma = 0.2\n[validate]\ncriteria = [7]\ndt_scale = 50.0\n";
    let out = tmp.path().join("coarse");
    let o = htlab(&["validate", "--out", out.to_str().unwrap()], coarse, tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let report = read(&out, "validation.csv");
    assert!(report.lines().skip(1).any(|l| l.ends_with(",false")));
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = htlab::cli::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(cfg.experiment.is_some(), "{}", path.display());
            count += 1;
        }
    }
    assert!(count >= 8);
}
