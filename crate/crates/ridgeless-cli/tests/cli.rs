//! End-to-end tests of the `ridgeless` binary: flag/config plumbing, output
//! files, exit codes, and determinism, all on deliberately tiny problem
//! sizes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ridgeless")
}

/// A per-test scratch directory under the system temp dir, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("ridgeless-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).expect("create scratch dir");
        Scratch(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }

    fn join(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("spawn ridgeless binary");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_env(args, &[])
}

#[test]
fn selftest_passes_and_exits_zero() {
    let scratch = Scratch::new("selftest");
    let out = scratch.join("out");
    let (code, stdout, stderr) = run(&["selftest", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "stdout:\n{stdout}\nstderr:\n{stderr}");
    assert!(stdout.contains("selftest: all"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn effective_config_is_logged_before_any_output() {
    let scratch = Scratch::new("logging");
    let (code, _, stderr) = run(&[
        "cond-descent",
        "--out",
        scratch.join("out").to_str().unwrap(),
        "--n-sweep",
        "2,4",
        "--trials",
        "2",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stderr.contains("effective config:"), "{stderr}");
    assert!(stderr.contains("seed = 0"), "{stderr}");
    assert!(stderr.contains("kernel = rbf"), "{stderr}");
    assert!(stderr.contains("n_sweep = 2,4"), "{stderr}");
}

#[test]
fn experiment_writes_csv_and_optional_json_mirror() {
    let scratch = Scratch::new("outputs");
    let out = scratch.join("out");
    let (code, stdout, stderr) = run(&[
        "cond-descent",
        "--out",
        out.to_str().unwrap(),
        "--n-sweep",
        "2,4,8",
        "--trials",
        "2",
        "--seed",
        "5",
        "--json",
    ]);
    assert_eq!(code, 0, "{stderr}");

    let csv_path = out.join("cond_descent_5.csv");
    let json_path = out.join("cond_descent_5.json");
    assert!(stdout.contains("cond_descent_5.csv"), "{stdout}");
    assert!(csv_path.is_file() && json_path.is_file());

    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,d,cond_mean,cond_std"));
    assert_eq!(lines.count(), 3, "one row per sweep entry");

    // The metadata echo must be the effective config the run logged.
    let mirror: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let config = &mirror["metadata"]["config"];
    assert_eq!(config["seed"], 5);
    assert_eq!(config["d"], 15);
    assert_eq!(config["trials"], 2);
    assert_eq!(config["n_sweep"], serde_json::json!([2, 4, 8]));
    assert_eq!(config["kernel"]["kind"], "rbf");
    assert_eq!(config["kernel"]["sigma"], 5.0);
    assert_eq!(mirror["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn same_argv_produces_identical_tables() {
    let scratch = Scratch::new("determinism");
    let args = |dir: &Path| {
        vec![
            "pinv-descent".to_string(),
            "--out".into(),
            dir.to_str().unwrap().into(),
            "--n-sweep".into(),
            "2,5,9".into(),
            "--trials".into(),
            "3".into(),
            "--seed".into(),
            "11".into(),
        ]
    };
    let first = scratch.join("a");
    let second = scratch.join("b");
    for dir in [&first, &second] {
        let argv: Vec<String> = args(dir);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let (code, _, stderr) = run(&argv);
        assert_eq!(code, 0, "{stderr}");
    }
    let a = fs::read(first.join("pinv_descent_11.csv")).unwrap();
    let b = fs::read(second.join("pinv_descent_11.csv")).unwrap();
    assert_eq!(a, b, "same argv must give byte-identical CSV");
}

#[test]
fn config_file_applies_and_flags_win_over_it() {
    let scratch = Scratch::new("overrides");
    let config_path = scratch.join("run.cfg");
    fs::write(&config_path, "# sweep config\ntrials = 2\nn_sweep = 2,4\nseed = 9\n").unwrap();
    let out = scratch.join("out");
    let (code, _, stderr) = run(&[
        "cond-descent",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "3",
        "--json",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let mirror: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("cond_descent_9.json")).unwrap()).unwrap();
    let config = &mirror["metadata"]["config"];
    assert_eq!(config["seed"], 9, "file value survives");
    assert_eq!(config["n_sweep"], serde_json::json!([2, 4]), "file value survives");
    assert_eq!(config["trials"], 3, "flag beats file");
}

#[test]
fn unknown_config_key_exits_one_listing_valid_keys() {
    let scratch = Scratch::new("unknown-key");
    let config_path = scratch.join("bad.cfg");
    fs::write(&config_path, "seed = 1\nnn_test = 5\n").unwrap();
    let (code, _, stderr) = run(&["selftest", "--config", config_path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 2"), "{stderr}");
    assert!(stderr.contains("unknown key `nn_test`"), "{stderr}");
    for key in ["seed", "d", "n_test", "trials", "kernel", "sigma", "v_grid", "n_sweep", "lambda"] {
        assert!(stderr.contains(key), "valid-key listing missing {key}: {stderr}");
    }
}

#[test]
fn config_syntax_error_reports_line_number() {
    let scratch = Scratch::new("syntax");
    let config_path = scratch.join("bad.cfg");
    fs::write(&config_path, "seed = 1\n\nwhat even is this\n").unwrap();
    let (code, _, stderr) = run(&["selftest", "--config", config_path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, _) = run(&["no-such-subcommand"]);
    assert_eq!(code, 1);

    let (code, _, _) = run(&["cond-descent", "--frobnicate"]);
    assert_eq!(code, 1);

    // Invariant violation from a flag value: d must exceed n for the sweep.
    let scratch = Scratch::new("invariant");
    let (code, _, stderr) = run(&[
        "mse-vs-norm",
        "--out",
        scratch.join("out").to_str().unwrap(),
        "--d",
        "5",
        "--n",
        "10",
    ]);
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("d = 5"), "diagnostic names the values: {stderr}");

    let (code, _, stderr) = run(&["cond-descent", "--sigma", "-1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("sigma"), "{stderr}");
}

#[test]
fn help_and_version_exit_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["mse-vs-norm", "cond-descent", "pinv-descent", "stability-audit", "loo-bench", "selftest"] {
        assert!(stdout.contains(sub), "help missing {sub}:\n{stdout}");
    }
    let (code, _, _) = run(&["--version"]);
    assert_eq!(code, 0);
}

#[test]
fn missing_output_directory_is_created() {
    let scratch = Scratch::new("mkdir");
    let nested = scratch.join("does/not/exist/yet");
    let (code, _, stderr) = run(&[
        "pinv-descent",
        "--out",
        nested.to_str().unwrap(),
        "--n-sweep",
        "2,3",
        "--trials",
        "2",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(nested.join("pinv_descent_0.csv").is_file());
}

#[test]
fn stability_audit_emits_the_documented_json_shape() {
    let scratch = Scratch::new("audit");
    let out = scratch.join("out");
    let (code, stdout, stderr) = run(&[
        "stability-audit",
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "3",
        "--d",
        "6",
        "--n",
        "8",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("cvloo_mean"), "{stdout}");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stability_audit_3.json")).unwrap())
            .unwrap();
    for key in ["deltas", "cvloo_mean", "B0", "beta1", "beta2", "lemma2_rhs", "checks"] {
        assert!(report.get(key).is_some(), "missing key {key}: {report}");
    }
    assert_eq!(report["deltas"].as_array().unwrap().len(), 8);
    for check in ["almost_positivity", "lemma2_chain", "perturbation_norm"] {
        assert_eq!(report["checks"][check], true, "{report}");
    }
}

#[test]
fn linear_config_audits_the_weight_space_problem() {
    let scratch = Scratch::new("audit-linear");
    let out = scratch.join("out");
    let (code, _, stderr) = run(&[
        "stability-audit",
        "--out",
        out.to_str().unwrap(),
        "--kernel",
        "linear",
        "--d",
        "30",
        "--n",
        "10",
        "--seed",
        "4",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stability_audit_4.json")).unwrap())
            .unwrap();
    // Linear mode: β̂₁ = B₀ exactly.
    assert_eq!(report["beta1"], report["B0"]);
}

#[test]
fn thread_cap_env_var_is_honored_and_validated() {
    let scratch = Scratch::new("threads");
    let out = scratch.join("out");
    let (code, _, stderr) = run_with_env(
        &["cond-descent", "--out", out.to_str().unwrap(), "--n-sweep", "2,4", "--trials", "2"],
        &[("RIDGELESS_THREADS", "1")],
    );
    assert_eq!(code, 0, "{stderr}");

    let (code, _, stderr) = run_with_env(&["selftest"], &[("RIDGELESS_THREADS", "zero")]);
    assert_eq!(code, 1);
    assert!(stderr.contains("RIDGELESS_THREADS"), "{stderr}");
}

#[test]
fn mse_vs_norm_runs_from_a_config_file() {
    let scratch = Scratch::new("norm-sweep");
    let config_path = scratch.join("small.cfg");
    fs::write(
        &config_path,
        "d = 40\nn = 10\nn_test = 8\ntrials = 3\nv_grid = 0,2,4\nseed = 2\n",
    )
    .unwrap();
    let out = scratch.join("out");
    let (code, _, stderr) = run(&[
        "mse-vs-norm",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let csv = fs::read_to_string(out.join("mse_vs_norm_2.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "v_norm,train_mse_mean,test_mse_mean,test_mse_std");
    assert_eq!(rows.len(), 4, "header plus one row per v_grid entry");
    assert!(rows[1].starts_with("0,"));
    assert!(rows[2].starts_with("2,"));
    assert!(rows[3].starts_with("4,"));
}
