use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optobath::cli::{config_from_echo, parse_config_file};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

fn optobath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optobath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to_dir(task: &str, config: &Path, dir: &Path, extra: &[&str]) -> Value {
    let mut args = vec![
        task,
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = optobath(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn sweep_finds_closed_form_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_to_dir("sweep", &configs().join("sweep.toml"), dir.path(), &[]);
    let r = &summary["results"];
    assert!((r["C_OM_star"].as_f64().unwrap() - 3.0).abs() < 3e-3);
    assert!((r["n_ratio_min"].as_f64().unwrap() - 0.5).abs() < 5e-4);
    assert_eq!(summary["tool"]["name"], "optobath");

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "C_OM_dimless,n_eff_dimless,T_ratio_dimless,linewidth_rad_s,flags,error"
    );
}

#[test]
fn unstable_spectrum_exits_with_physics_code() {
    let out = optobath(&[
        "spectrum",
        "--config",
        configs().join("unstable.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["kind"], "unstable_system");
    assert_eq!(e["exit_code"], 2);
}

#[test]
fn invalid_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("spectrum.toml"))
        .unwrap()
        .replacen("gamma = 1.0\n", "gamma = -1.0\n", 1);
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = optobath(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_json(&out);
    assert_eq!(e["kind"], "config_error");
    assert!(e["message"].as_str().unwrap().contains("gamma must be ≥ 0"));

    let text = std::fs::read_to_string(configs().join("spectrum.toml"))
        .unwrap()
        .replace("lambda =", "lamda =");
    std::fs::write(&path, text).unwrap();
    let out = optobath(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("did you mean `lambda`"));

    let out = optobath(&["spectrum", "--config", "/nonexistent.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn task_mismatch_is_rejected() {
    let out = optobath(&[
        "sweep",
        "--config",
        configs().join("spectrum.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn design_reproduces_reference_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_to_dir("design", &configs().join("design.toml"), dir.path(), &[]);
    let omega0 = summary["results"]["omega0"].as_f64().unwrap();
    let target = 2.0 * std::f64::consts::PI * 1.102e6;
    assert!((omega0 / target - 1.0).abs() < 0.1);
    assert!(dir.path().join("design.csv").exists());
}

#[test]
fn output_is_byte_identical_across_runs() {
    for task in ["spectrum", "optimize", "sense"] {
        let config = configs().join(format!("{task}.toml"));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        // The echo records the output directory, so only the results are compared.
        run_to_dir(task, &config, a.path(), &[]);
        run_to_dir(task, &config, b.path(), &[]);
        let table = |d: &Path| std::fs::read(d.join(format!("{task}.csv"))).unwrap();
        assert_eq!(table(a.path()), table(b.path()), "{task}");

        let results = |d: &Path| {
            let v: Value =
                serde_json::from_slice(&std::fs::read(d.join("summary.json")).unwrap()).unwrap();
            v["results"].to_string()
        };
        assert_eq!(results(a.path()), results(b.path()), "{task}");
    }
}

#[test]
fn summary_bytes_identical_for_identical_invocation() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("optimize.toml");
    run_to_dir("optimize", &config, dir.path(), &[]);
    let first = std::fs::read(dir.path().join("summary.json")).unwrap();
    run_to_dir("optimize", &config, dir.path(), &[]);
    assert_eq!(
        first,
        std::fs::read(dir.path().join("summary.json")).unwrap()
    );
}

#[test]
fn echoed_config_reparses_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = configs().join("spectrum.toml");
    let summary = run_to_dir(
        "spectrum",
        &path,
        dir.path(),
        &["--fidelity", "full", "--format", "json"],
    );
    assert_eq!(summary["fidelity"], "full");
    assert!(dir.path().join("spectrum.json").exists());

    let again = config_from_echo(&summary["config"], &configs()).unwrap();
    let mut original = parse_config_file(&path, None).unwrap();
    original.set_fidelity(optobath::Fidelity::Full);
    original.set_output_format(optobath::cli::OutputFormat::Json);
    original.set_output_path(dir.path());
    assert_eq!(again, original);
}

#[test]
fn stdout_carries_csv_without_out_dir() {
    let out = optobath(&[
        "sense",
        "--config",
        configs().join("sense.toml").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("omega_rad_s,S_FF_N2_per_Hz,factor_dimless\n"));
    assert_eq!(text.lines().count(), 202);
}
