use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cosserat"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn canonical(v: &Value) -> String {
    cosserat_core::json::to_canonical(v)
}

#[test]
fn validate_all_passes() {
    let o = run(&["validate", "--suite", "all", "--samples", "50", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["passed"], true);
    assert!(r["checks"].as_array().unwrap().len() > 40);
}

#[test]
fn validate_without_samples_is_vacuous_pass() {
    let o = run(&["validate", "--samples", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn corrupted_nye_pair_fails_shell_nye() {
    let o = run(&["validate", "--suite", "shell", "--inject-fault", "nye_trace"]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    let failed: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["shell_nye"]);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("shell_nye") && stderr.contains("patch="), "{stderr}");
}

#[test]
fn every_fault_is_caught() {
    for f in ["shell_cross_sign", "nye_trace", "curl_transpose"] {
        let o = run(&["validate", "--samples", "10", "--inject-fault", f]);
        assert_eq!(code(&o), 1, "fault {f} went unnoticed");
    }
}

#[test]
fn unknown_suite_or_fault_is_input_error() {
    assert_eq!(code(&run(&["validate", "--suite", "everything"])), 2);
    assert_eq!(code(&run(&["validate", "--inject-fault", "nope"])), 2);
}

#[test]
fn validate_is_deterministic_up_to_timings() {
    let strip = |mut v: Value| {
        for c in v["checks"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("wall_time_s");
        }
        canonical(&v)
    };
    let a = strip(json(&run(&[
        "validate",
        "--suite",
        "shell",
        "--samples",
        "5",
        "--seed",
        "7",
    ])));
    let b = strip(json(&run(&[
        "validate",
        "--suite",
        "shell",
        "--samples",
        "5",
        "--seed",
        "7",
    ])));
    assert_eq!(a, b);
}

#[test]
fn eval_body_and_round_trip() {
    let o = run(&[
        "eval",
        "--config",
        config("body_cylindrical.json").to_str().unwrap(),
        "--points",
        config("body_points.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let v = json(&o);
    assert_eq!(canonical(&v), text);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    for p in pts {
        for r in p["nye_residual"].as_array().unwrap() {
            assert!(r.as_f64().unwrap() < 1e-10);
        }
        assert!(p["energy"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn eval_shell_with_inline_points() {
    let o = run(&[
        "eval",
        "--config",
        config("shell_sphere.json").to_str().unwrap(),
        "--points",
        "[[0.4, 0.5]]",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let p = &v["points"][0];
    assert!(p["shell_nye"]["residual"].as_f64().unwrap() < 1e-6);
    assert!(p["shell_nye"]["max_bound_excess"].as_f64().unwrap() <= 1e-9);
    assert_eq!(canonical(&v).as_bytes(), &o.stdout[..]);
}

#[test]
fn eval_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"schema":"cosserat-curvature/1","kind":"body","chart":{"kind":"affine","scale":[1,"x",2]}}"#,
    )
    .unwrap();
    let o = run(&["eval", "--config", bad.to_str().unwrap(), "--points", "[[0.5,0.5,0.5]]"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/chart/scale/1"));

    let cfg = config("body_cylindrical.json");
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--points", "[[100, 0, 0]]"]);
    assert_eq!(code(&o), 2);
    let o = run(&["eval", "--config", "/nonexistent/config.json", "--points", "[]"]);
    assert_eq!(code(&o), 2);
}

fn minimize_config(edit: impl FnOnce(&mut Value)) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(config("minimize_plate.json")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.path().join("config.json");
    fs::write(&path, v.to_string()).unwrap();
    (dir, path)
}

#[test]
fn minimize_perturbed_plate_converges_deterministically() {
    let (dir, cfg) = minimize_config(|_| {});
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = run(&[
            "minimize",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read_to_string(out_a.join("report.json")).unwrap();
    assert_eq!(a, fs::read_to_string(out_b.join("report.json")).unwrap());
    assert_eq!(
        fs::read_to_string(out_a.join("trace.csv")).unwrap(),
        fs::read_to_string(out_b.join("trace.csv")).unwrap()
    );
    let r: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(canonical(&r), a);
    assert_eq!(r["status"], "converged");
    assert_eq!(r["monotone"], true);
    let ratio = r["final_energy"].as_f64().unwrap() / r["initial_energy"].as_f64().unwrap();
    assert!(ratio < 1e-3);
    assert!(r["final_grad_norm"].as_f64().unwrap() < 1e-6);
    let csv = fs::read_to_string(out_a.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("iteration,energy,grad_norm,step"));
    assert_eq!(csv.lines().count(), r["trace"].as_array().unwrap().len() + 1);
}

#[test]
fn minimize_unperturbed_plate_is_already_converged() {
    let (dir, cfg) = minimize_config(|v| v["perturbation"] = 0.0.into());
    let out = dir.path().join("out");
    let o = run(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["iterations"], 0);
    assert_eq!(r["final_energy"], 0);
}

#[test]
fn minimize_iteration_cap_exits_1() {
    let (dir, cfg) = minimize_config(|v| v["options"]["max_iter"] = 3.into());
    let out = dir.path().join("out");
    let o = run(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["status"], "max_iter");
}

#[test]
fn minimize_rejects_p3_shell_energy() {
    let (dir, cfg) = minimize_config(|v| v["params"]["p"] = 3.into());
    let out = dir.path().join("out");
    let o = run(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p = 2"));
    assert!(!out.exists());
}

#[test]
fn thread_cap_does_not_change_results() {
    let run_with = |threads: &str| {
        let o = bin()
            .args(["validate", "--suite", "energy", "--samples", "5"])
            .env("COSSERAT_THREADS", threads)
            .output()
            .unwrap();
        let mut v = json(&o);
        for c in v["checks"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("wall_time_s");
        }
        canonical(&v)
    };
    assert_eq!(run_with("1"), run_with("0"));
}
