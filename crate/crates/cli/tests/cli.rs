//! End-to-end checks of the binary: determinism, manifests, file formats
//! and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn rffsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rffsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rffsim")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn sha256(path: &Path) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn generate_is_deterministic_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate",
        "--stages",
        "2",
        "--f-det",
        "45e6",
        "--f-bit",
        "20e6",
        "--dead-time",
        "6e-9",
        "--n-bits",
        "1e6",
        "--seed",
        "7",
        "--out",
        "a.bits",
    ];
    assert_ok(&rffsim(&args, dir.path()));
    let mut args2 = args;
    args2[args.len() - 1] = "b.bits";
    assert_ok(&rffsim(&args2, dir.path()));

    let (a, b) = (dir.path().join("a.bits"), dir.path().join("b.bits"));
    assert_eq!(sha256(&a), sha256(&b), "same command, different bits");
    assert_eq!(std::fs::metadata(&a).unwrap().len(), 125_000);

    // Manifest digests match the files on disk.
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.bits.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "generate");
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    assert_eq!(outputs[0]["sha256"].as_str().unwrap(), sha256(&a));

    // Re-running from the manifest's resolved config reproduces the digest.
    let cfg = &manifest["config"];
    let rerun = [
        "generate",
        "--stages",
        &cfg["stages"].to_string(),
        "--f-det",
        &cfg["f_det"].to_string(),
        "--f-bit",
        &cfg["f_bit"].to_string(),
        "--dead-time",
        &cfg["dead_time"].to_string(),
        "--eta",
        &cfg["eta"].to_string(),
        "--t-rise",
        &cfg["t_rise"].to_string(),
        "--t-fall",
        &cfg["t_fall"].to_string(),
        "--n-bits",
        &cfg["n_bits"].to_string(),
        "--seed",
        &cfg["seed"].to_string(),
        "--out",
        "c.bits",
    ];
    let rerun: Vec<&str> = rerun.iter().map(|s| &**s).collect();
    assert_ok(&rffsim(&rerun, dir.path()));
    assert_eq!(sha256(&a), sha256(&dir.path().join("c.bits")));

    // Sidecar carries the exact bit count and full config.
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(sidecar["n_bits"], 1_000_000);
    assert_eq!(sidecar["config"]["stages"].as_array().unwrap().len(), 2);
}

#[test]
fn generate_rejects_infeasible_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = rffsim(
        &[
            "generate",
            "--f-det",
            "200e6",
            "--dead-time",
            "6e-9",
            "--out",
            "x.bits",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unreachable"), "stderr: {err}");
}

#[test]
fn config_file_feeds_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "f_det = 30e6\nf-bit = 10e6\nn_bits = 2e5\nseed = 41\n# comment\nstages = 1\n",
    )
    .unwrap();
    assert_ok(&rffsim(
        &["generate", "--config", "run.cfg", "--out", "a.bits"],
        dir.path(),
    ));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.bits.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["f_det"], 30e6);
    assert_eq!(manifest["config"]["n_bits"], 200_000);
    assert_eq!(manifest["seed"], 41);

    // A flag wins over the file.
    assert_ok(&rffsim(
        &[
            "generate", "--config", "run.cfg", "--seed", "42", "--out", "b.bits",
        ],
        dir.path(),
    ));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("b.bits.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 42);
}

#[test]
fn predict_emits_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = rffsim(
        &[
            "predict", "--f-det", "45e6", "--f-bit", "20e6", "--stages", "2",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!((v["alpha"].as_f64().unwrap() - 6.8e-12).abs() < 1e-18);
    assert!((v["bias"].as_f64().unwrap() - 3.06e-4).abs() < 1e-9);
    let lambda: f64 = v["lambda"].as_f64().unwrap();
    assert!((lambda - 2.25).abs() < 1e-12);
    assert!((v["a1"].as_f64().unwrap() - (-2.0 * lambda).exp()).abs() < 1e-12);
    let chain = v["xor_chain"].as_array().unwrap();
    assert_eq!(chain.len(), 1);
    let b = v["bias"].as_f64().unwrap();
    assert!((chain[0]["bias"].as_f64().unwrap() - (-2.0 * b * b)).abs() < 1e-15);
}

#[test]
fn sweep_bias_zero_eta_column_is_consistent_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    // eta = 1/(1 + t_rise/t_fall) for the default transition times.
    let out = rffsim(
        &[
            "sweep-bias",
            "--f-det-grid",
            "20e6,60e6",
            "--f-bit-grid",
            "20e6",
            "--eta",
            "0.5132398753894081",
            "--n-bits",
            "2e6",
            "--seed",
            "11",
            "--out",
            "bias.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("bias.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# schema_version=1");
    assert_eq!(
        lines.next().unwrap(),
        "f_bit,f_det,measured_bias,stderr,predicted_bias"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (bias, stderr, predicted) = (cols[2], cols[3], cols[4]);
        assert!(predicted.abs() < 1e-15);
        assert!(bias.abs() < 8.0 * stderr, "bias {bias} too far from zero");
    }
    assert!(dir.path().join("bias.csv.manifest.json").exists());
}

#[test]
fn sweep_autocorr_matches_ideal_curve_without_dead_time() {
    let dir = tempfile::tempdir().unwrap();
    // Zero dead time needs instantaneous transitions, otherwise close
    // event pairs produce out-of-order crossings (a config error).
    let out = rffsim(
        &[
            "sweep-autocorr",
            "--f-det-grid",
            "5e6,10e6",
            "--f-bit-grid",
            "10e6",
            "--dead-time",
            "0",
            "--t-rise",
            "0",
            "--t-fall",
            "0",
            "--k-max",
            "2",
            "--n-bits",
            "4e6",
            "--seed",
            "3",
            "--out",
            "ac.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("ac.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        let k: u64 = cols[3].parse().unwrap();
        if k == 1 {
            let measured: f64 = cols[4].parse().unwrap();
            let stderr: f64 = cols[5].parse().unwrap();
            let ideal: f64 = cols[6].parse().unwrap();
            assert!((measured - ideal).abs() < 6.0 * stderr, "row {row}");
        } else {
            assert!(cols[6].is_empty(), "ideal column only for k=1: {row}");
        }
    }

    let bad = rffsim(
        &["sweep-autocorr", "--k-max", "0", "--out", "x.csv"],
        dir.path(),
    );
    assert!(!bad.status.success());
}

#[test]
fn test_command_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&rffsim(
        &[
            "generate", "--stages", "2", "--f-det", "45e6", "--f-bit", "20e6", "--n-bits", "3e6",
            "--seed", "9", "--out", "s.bits",
        ],
        dir.path(),
    ));
    let out = rffsim(
        &[
            "test",
            "s.bits",
            "--block-size",
            "1e6",
            "--apen-m",
            "3",
            "--out",
            "rep",
        ],
        dir.path(),
    );
    assert_ok(&out);
    for name in [
        "rep_frequency.json",
        "rep_runs.json",
        "rep_fft.json",
        "rep_universal.json",
        "rep_approximateentropy-m-3.json",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let rep: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("rep_frequency.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rep["p_values"].as_array().unwrap().len(), 3);
    assert_eq!(rep["proportion"]["total"], 3);
    assert_eq!(rep["unimplemented"].as_array().unwrap().len(), 10);
    let cdf = std::fs::read_to_string(dir.path().join("rep_frequency_cdf.csv")).unwrap();
    assert_eq!(cdf.lines().count(), 5);

    // A heavily biased stream trips the nonzero exit status.
    assert_ok(&rffsim(
        &[
            "generate",
            "--stages",
            "1",
            "--f-det",
            "2e6",
            "--f-bit",
            "20e6",
            "--n-bits",
            "2e6",
            "--seed",
            "10",
            "--eta",
            "0",
            "--t-rise",
            "0",
            "--t-fall",
            "60e-9",
            "--dead-time",
            "100e-9",
            "--out",
            "biased.bits",
        ],
        dir.path(),
    ));
    let out = rffsim(
        &[
            "test",
            "biased.bits",
            "--block-size",
            "1e6",
            "--tests",
            "frequency",
            "--out",
            "bad",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn analyze_emits_estimates() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&rffsim(
        &[
            "generate", "--stages", "1", "--f-det", "30e6", "--f-bit", "10e6", "--n-bits", "1e6",
            "--seed", "4", "--out", "s.bits",
        ],
        dir.path(),
    ));
    let out = rffsim(
        &[
            "analyze",
            "s.bits",
            "--k-max",
            "3",
            "--entropy-l",
            "1,3",
            "--out",
            "an.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("an.json")).unwrap())
            .unwrap();
    assert_eq!(v["n_bits"], 1_000_000);
    assert_eq!(v["autocorr"].as_array().unwrap().len(), 3);
    let h1 = v["entropy"]["1"].as_f64().unwrap();
    assert!(h1 > 0.99 && h1 <= 1.0);
    assert!(v["bias"]["stderr"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("an.json.manifest.json").exists());
}
