//! Black-box tests of the qsdp binary: exit codes, file contracts, and
//! rerun determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsdp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.display().to_string()
}

const M0_PROBLEM: &str = r#"{"epsilon": 1.0,
 "H": {"dim": 2, "re": [[0,0],[0,0]], "im": [[0,0],[0,0]]},
 "Q": [{"dim": 2, "re": [[1,0],[0,1]], "im": [[0,0],[0,0]]}],
 "q": [1.0]}"#;

#[test]
fn solve_closed_form_exits_zero_with_expected_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "m0.json", M0_PROBLEM);
    let out = qsdp(
        &[
            "solve",
            &input,
            "--reg",
            "vn",
            "--tol",
            "1e-10",
            "--out-dir",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/report.json")).unwrap())
            .unwrap();
    let alpha = report["alpha_star"][0].as_f64().unwrap();
    assert!((alpha - (1.0 - (2.0f64).ln())).abs() < 1e-8);
    assert_eq!(report["status"], "converged");

    // trace: strictly ascending iteration column, final row matches the report
    let trace = fs::read_to_string(tmp.path().join("run/trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "iter,dual_value,grad_norm,seconds");
    let rows: Vec<&str> = lines.collect();
    let mut last_grad = f64::NAN;
    for (k, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[0].parse::<usize>().unwrap(), k);
        last_grad = cols[2].parse::<f64>().unwrap();
    }
    let final_grad = report["final_grad_norm"].as_f64().unwrap();
    assert_eq!(last_grad, final_grad);

    // manifest lists every emitted file
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/manifest.json")).unwrap())
            .unwrap();
    let outputs: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for name in ["report.json", "trace.csv", "manifest.json"] {
        assert!(outputs.iter().any(|o| o.ends_with(name)), "{name} missing");
    }
}

#[test]
fn counterexample_spec_exits_diverged() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        tmp.path(),
        "cx.json",
        r#"{"family": "counterexample", "params": {"h0": 0.5, "h1": 1.0, "epsilon": 1000.0}}"#,
    );
    let out = qsdp(
        &[
            "solve",
            &input,
            "--reg",
            "vn",
            "--tol",
            "1e-8",
            "--divergence-norm",
            "1e4",
            "--out-dir",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn missing_and_malformed_inputs_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qsdp(&["solve", "absent.json", "--out-dir", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(1));

    let bad = write(tmp.path(), "bad.json", "{\"epsilon\": 1.0, \"H\": [broken");
    let out = qsdp(&["solve", &bad, "--out-dir", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line"),
        "diagnostics lack position info: {err}"
    );

    // spec with a random family but no seed anywhere
    let seedless = write(
        tmp.path(),
        "seedless.json",
        r#"{"family": "qt1", "params": {"n_qubits": 2, "p": 0.7, "theta": 0.5, "omega": 0.7, "epsilon": 1.0}}"#,
    );
    let out = qsdp(&["solve", &seedless, "--out-dir", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn gen_qt1_writes_expected_observable_count_and_roundtrips() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"family": "qt1",
            "params": {"n_qubits": 2, "p": 0.7, "theta": 0.5235987755982988,
                       "omega": 0.7853981633974483, "epsilon": 1.0},
            "seed": 7}"#,
    );
    let out = qsdp(&["gen", "--spec", &spec, "--out", "p1.json"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let problem: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p1.json")).unwrap()).unwrap();
    // 2D + 1 observables at n = 2
    assert_eq!(problem["Q"].as_array().unwrap().len(), 9);

    // identical regeneration: byte-for-byte equal files
    let out = qsdp(&["gen", "--spec", &spec, "--out", "p2.json"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(tmp.path().join("p1.json")).unwrap(),
        fs::read(tmp.path().join("p2.json")).unwrap()
    );

    // the generated problem solves cleanly
    let out = qsdp(
        &["solve", "p1.json", "--reg", "vn", "--out-dir", "run"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn gen_ising_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qsdp(
        &[
            "gen",
            "--family",
            "im",
            "--params",
            r#"{"n_per_side": 1, "h": 0.5, "epsilon": 1.0}"#,
            "--out",
            "im.json",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let problem: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("im.json")).unwrap()).unwrap();
    // 2 qubits -> cost dim 4x4 = 16 entries, marginal dim n = 2, M = 2n^2 = 8
    assert_eq!(problem["H"]["dim"], 4);
    assert_eq!(problem["Q"].as_array().unwrap().len(), 9);
}

#[test]
fn sweep_outputs_are_byte_identical_across_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"family": "qt1",
            "params": {"n_qubits": 2, "p": 0.7, "theta": 0.5235987755982988,
                       "omega": 0.7853981633974483, "epsilon": 1.0},
            "seed": 11}"#,
    );
    for dir in ["s1", "s2"] {
        let out = qsdp(
            &[
                "sweep",
                &spec,
                "--reg",
                "vn",
                "--eps-ladder",
                "1e1,1,1e-1",
                "--tol",
                "1e-8",
                "--out-dir",
                dir,
            ],
            tmp.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(tmp.path().join("s1/sweep.csv")).unwrap();
    let b = fs::read(tmp.path().join("s2/sweep.csv")).unwrap();
    assert_eq!(a, b);
    for idx in 0..3 {
        let name = format!("report_rung{idx:02}.json");
        let a = fs::read(tmp.path().join("s1").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("s2").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn gamma_probe_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let neg = write(
        tmp.path(),
        "negI.json",
        r#"{"dim": 2, "re": [[-1,0],[0,-1]], "im": [[0,0],[0,0]]}"#,
    );
    let out = qsdp(
        &[
            "gamma-probe",
            &neg,
            "--reg",
            "quad",
            "--eps-ladder",
            "1,1e-2",
            "--out-dir",
            "g",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("g/gamma.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.0);
    }
}

#[test]
fn sweep_jobs_flag_runs_cold_rungs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "m0.json", M0_PROBLEM);
    let out = qsdp(
        &[
            "sweep",
            &input,
            "--reg",
            "quad",
            "--eps-ladder",
            "1,1e-1",
            "--jobs",
            "2",
            "--out-dir",
            "par",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("par/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn custom_family_embeds_an_inline_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "custom.json",
        r#"{"family": "custom",
            "params": {"problem": {"epsilon": 1.0,
              "H": {"dim": 2, "re": [[0,0],[0,0]], "im": [[0,0],[0,0]]},
              "Q": [{"dim": 2, "re": [[1,0],[0,1]], "im": [[0,0],[0,0]]}],
              "q": [1.0]}}}"#,
    );
    let out = qsdp(
        &["solve", &spec, "--reg", "quad", "--tol", "1e-9", "--out-dir", "run"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/report.json")).unwrap())
            .unwrap();
    // quadratic trace-only optimum: alpha = eps/d
    let alpha = report["alpha_star"][0].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 1e-6);
}

#[test]
fn non_descending_ladder_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "m0.json", M0_PROBLEM);
    let out = qsdp(
        &["sweep", &input, "--eps-ladder", "1e-1,1", "--out-dir", "s"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("descending"));
}
