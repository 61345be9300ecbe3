//! Drivers behind the `eval` and `minimize` commands.

use serde_json::{json, Map, Value};

use crate::catalog::{check_schema_tag, parse, ConfigKind, Edge, EvalConfig, MinimizeConfig, SCHEMA};
use crate::cosserat3d::{nye_check, Config3D};
use crate::energy::{energy_3d, energy_shell, minimize, DiscreteShell, MinimizeOptions, MinimizeReport, ShellState};
use crate::error::{Error, Result};
use crate::json::num;
use crate::shell::{planar_split, shell_nye, InitialRotation, ShellConfig};
use crate::tensor::{Mat3, Vec3};

pub fn mat_json(m: &Mat3<f64>) -> Value {
    Value::Array(
        m.0.iter()
            .map(|r| Value::Array(r.iter().map(|x| num(*x)).collect()))
            .collect(),
    )
}

pub fn vec_json(v: &Vec3<f64>) -> Value {
    Value::Array(v.0.iter().map(|x| num(*x)).collect())
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

/// Accepts `[[x…], …]` or `{"points": [[x…], …]}`.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Points {
        Bare(Vec<Vec<f64>>),
        Wrapped { points: Vec<Vec<f64>> },
    }
    let p: Points = serde_json::from_str(text).map_err(|e| Error::Schema {
        pointer: String::new(),
        message: format!("points must be an array of coordinate arrays: {e}"),
    })?;
    Ok(match p {
        Points::Bare(v) | Points::Wrapped { points: v } => v,
    })
}

fn point_array<const D: usize>(p: &[f64], index: usize) -> Result<[f64; D]> {
    p.try_into().map_err(|_| Error::Schema {
        pointer: format!("/points/{index}"),
        message: format!("expected {D} coordinates, got {}", p.len()),
    })
}

/// Parses and evaluates a configuration at the given points.
pub fn eval_text(config: &str, points: &[Vec<f64>]) -> Result<Value> {
    let cfg: EvalConfig = parse(config)?;
    eval(&cfg, points)
}

/// All measures of the configuration at each point.
pub fn eval(cfg: &EvalConfig, points: &[Vec<f64>]) -> Result<Value> {
    check_schema_tag(&cfg.schema)?;
    let deriv = cfg.derivatives.build::<f64>(cfg.fd_step);
    let params = cfg.params.map(|p| p.build::<f64>()).transpose()?;
    let missing = |what: &str| Error::Schema {
        pointer: format!("/{what}"),
        message: format!("{what} is required for this kind"),
    };
    let mut out = Vec::with_capacity(points.len());
    match cfg.kind {
        ConfigKind::Body => {
            let chart = cfg
                .chart
                .as_ref()
                .ok_or_else(|| missing("chart"))?
                .build::<f64>("/chart")?;
            let phi = cfg.deformation.build3(&chart, "/deformation")?;
            let qe = cfg.rotation.build3::<f64>("/rotation")?;
            let mut body = Config3D::new(chart, phi, qe, deriv);
            if let Some(q0) = &cfg.initial_rotation {
                body = body.with_initial_rotation(q0.build3("/initial_rotation")?);
            }
            for (i, p) in points.iter().enumerate() {
                let x = point_array::<3>(p, i)?;
                let m = body.point(&x)?.measures();
                let (r1, r2) = nye_check(&m.wryness, &m.dislocation);
                let mut entry = Map::new();
                entry.insert("x".into(), floats(&x));
                entry.insert("F".into(), mat_json(&m.f));
                entry.insert("Ue".into(), mat_json(&m.ue));
                entry.insert("Ee".into(), mat_json(&m.ee));
                entry.insert("wryness".into(), mat_json(&m.wryness));
                entry.insert("dislocation".into(), mat_json(&m.dislocation));
                entry.insert("omega".into(), Value::Array(m.omega.iter().map(vec_json).collect()));
                entry.insert("nye_residual".into(), floats(&[r1, r2]));
                if let Some(params) = &params {
                    entry.insert("energy".into(), num(energy_3d(&m.ee, &m.dislocation, params)?));
                }
                out.push(Value::Object(entry));
            }
        }
        ConfigKind::Shell => {
            let patch = cfg
                .patch
                .as_ref()
                .ok_or_else(|| missing("patch"))?
                .build::<f64>("/patch")?;
            let m = cfg.deformation.build2(&patch, "/deformation")?;
            let qe = cfg.rotation.build2::<f64>("/rotation")?;
            let mut shell = ShellConfig::new(patch, m, qe, deriv);
            if let Some(q0) = &cfg.initial_rotation {
                shell.q0 = InitialRotation::Field(q0.build2("/initial_rotation")?);
            }
            for (i, p) in points.iter().enumerate() {
                let x = point_array::<2>(p, i)?;
                let sp = shell.point(&x)?;
                let ms = sp.measures();
                let nye = shell_nye(&ms.ke, &ms.de);
                let split = planar_split(&ms.de, &ms.ke, &sp.frames)?;
                let mut entry = Map::new();
                entry.insert("x".into(), floats(&x));
                entry.insert("Ee".into(), mat_json(&ms.ee));
                entry.insert("Ke".into(), mat_json(&ms.ke));
                entry.insert("De".into(), mat_json(&ms.de));
                entry.insert(
                    "split".into(),
                    json!({
                        "D_planar": mat_json(&split.d_planar),
                        "D_mixed": floats(&split.d_mixed),
                        "D_trace_part": mat_json(&split.d_trace_part),
                        "K_planar": mat_json(&split.k_planar),
                        "K_normal": floats(&split.k_normal),
                        "trace_D": num(ms.de.trace()),
                        "trace_K": num(ms.ke.trace()),
                    }),
                );
                entry.insert(
                    "shell_nye".into(),
                    json!({
                        "residual": num(nye.residual),
                        "inverse_residual": num(nye.inverse_residual),
                        "max_identity_residual": num(nye.max_identity_residual()),
                        "max_bound_excess": num(nye.max_bound_excess()),
                    }),
                );
                if let Some(params) = &params {
                    entry.insert("energy".into(), num(energy_shell(&ms.ee, &ms.de, params)?));
                }
                out.push(Value::Object(entry));
            }
        }
    }
    let kind = match cfg.kind {
        ConfigKind::Body => "body",
        ConfigKind::Shell => "shell",
    };
    Ok(json!({ "schema": SCHEMA, "kind": kind, "points": out }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimizeStatus {
    Converged,
    NotConverged,
    Stalled,
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub status: MinimizeStatus,
    pub report: MinimizeReport<f64>,
    pub stalled_at: Option<usize>,
}

/// Discretisation, perturbed start and solver options of a minimisation config.
pub fn build_problem(cfg: &MinimizeConfig) -> Result<(DiscreteShell<f64>, ShellState<f64>, MinimizeOptions<f64>)> {
    check_schema_tag(&cfg.schema)?;
    let patch = cfg.patch.build::<f64>("/patch")?;
    let params = cfg.params.build::<f64>()?;
    let shell = DiscreteShell::new(patch, cfg.grid.n1, cfg.grid.n2, params)?;
    if cfg.clamp.is_empty() {
        return Err(Error::InvalidParams("at least one edge must be clamped".into()));
    }
    let mut state = shell.reference_state();
    for k in 0..state.m.len() {
        let (i, j) = (k % cfg.grid.n1, k / cfg.grid.n1);
        let fixed = cfg
            .clamp
            .iter()
            .any(|e: &Edge| e.contains(i, j, cfg.grid.n1, cfg.grid.n2));
        state.fixed_m[k] = fixed;
        state.fixed_q[k] = fixed;
    }
    if !(cfg.perturbation.is_finite() && cfg.perturbation >= 0.0) {
        return Err(Error::InvalidParams("perturbation must be a non-negative angle".into()));
    }
    if !(cfg.options.grad_tol > 0.0) {
        return Err(Error::InvalidParams("grad_tol must be positive".into()));
    }
    let options = MinimizeOptions {
        max_iter: cfg.options.max_iter,
        grad_tol: cfg.options.grad_tol,
        seed: cfg.options.seed,
    };
    if cfg.perturbation > 0.0 {
        state.perturb_rotations(cfg.perturbation, options.seed);
    }
    Ok((shell, state, options))
}

pub fn run_minimize(cfg: &MinimizeConfig) -> Result<MinimizeOutcome> {
    let (shell, state, options) = build_problem(cfg)?;
    Ok(match minimize(&shell, &state, &options)? {
        Ok(report) => MinimizeOutcome {
            status: if report.converged {
                MinimizeStatus::Converged
            } else {
                MinimizeStatus::NotConverged
            },
            report,
            stalled_at: None,
        },
        Err(stall) => MinimizeOutcome {
            status: MinimizeStatus::Stalled,
            report: stall.partial,
            stalled_at: Some(stall.iteration),
        },
    })
}

pub fn minimize_report_json(cfg: &MinimizeConfig, out: &MinimizeOutcome) -> Value {
    let r = &out.report;
    let s = &r.final_state;
    let status = match out.status {
        MinimizeStatus::Converged => "converged",
        MinimizeStatus::NotConverged => "max_iter",
        MinimizeStatus::Stalled => "stalled",
    };
    json!({
        "schema": SCHEMA,
        "status": status,
        "converged": r.converged,
        "stalled_at": out.stalled_at,
        "iterations": r.iterations(),
        "initial_energy": num(r.initial_energy()),
        "final_energy": num(r.final_energy()),
        "final_grad_norm": num(r.final_grad_norm()),
        "monotone": r.is_monotone(),
        "grid": { "n1": cfg.grid.n1, "n2": cfg.grid.n2 },
        "seed": cfg.options.seed,
        "trace": r.trace.iter().map(|t| json!({
            "iteration": t.iteration,
            "energy": num(t.energy),
            "grad_norm": num(t.grad_norm),
            "step": num(t.step),
        })).collect::<Vec<_>>(),
        "final_state": {
            "m": s.m.iter().map(vec_json).collect::<Vec<_>>(),
            "q": s.q.iter().map(|q| floats(&[q.w, q.v[0], q.v[1], q.v[2]])).collect::<Vec<_>>(),
        },
    })
}

/// `iteration,energy,grad_norm,step` with `%.17g` floats.
pub fn trace_csv(report: &MinimizeReport<f64>) -> String {
    use crate::json::format_g17;
    let mut out = String::from("iteration,energy,grad_norm,step\n");
    for t in &report.trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.iteration,
            format_g17(t.energy),
            format_g17(t.grad_norm),
            format_g17(t.step)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANE_TWIST: &str = r#"{
        "schema": "cosserat-curvature/1", "kind": "shell",
        "patch": {"kind": "plane"},
        "deformation": {"reference": true},
        "rotation": {"kind": "axis_angle", "axis": [0,0,1], "angle_fn": {"kind": "linear", "c": 1, "coord": 0}},
        "params": {"mu":1,"kappa":1,"mu_c":1,"lc":1,"a1":1,"a2":1,"a3":1}
    }"#;

    #[test]
    fn plane_twist_blocks() {
        let v = eval_text(PLANE_TWIST, &[vec![0.3, 0.3]]).unwrap();
        let p = &v["points"][0];
        let k = &p["Ke"];
        let d = &p["De"];
        for i in 0..3 {
            for j in 0..3 {
                let ke = if (i, j) == (2, 0) { 1.0 } else { 0.0 };
                let de = if (i, j) == (0, 2) { -1.0 } else { 0.0 };
                assert!((k[i][j].as_f64().unwrap() - ke).abs() < 1e-14);
                assert!((d[i][j].as_f64().unwrap() - de).abs() < 1e-14);
            }
        }
        // the curvature part of the energy is additive and equals 1 here
        let ee: Vec<Vec<f64>> = serde_json::from_value(p["Ee"].clone()).unwrap();
        let ee: Mat3<f64> = Mat3::from_f64(std::array::from_fn(|i| std::array::from_fn(|j| ee[i][j])));
        let strain_only = energy_shell(&ee, &Mat3::zero(), &crate::energy::EnergyParams::unit()).unwrap();
        assert!((p["energy"].as_f64().unwrap() - strain_only - 1.0).abs() < 1e-13);
    }

    #[test]
    fn shell_energy_rejects_cubic_exponent() {
        let cfg = PLANE_TWIST.replace("\"a3\":1", "\"a3\":1,\"p\":3");
        assert!(matches!(
            eval_text(&cfg, &[vec![0.3, 0.3]]),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn points_parse_both_forms() {
        assert_eq!(parse_points("[[1,2]]").unwrap(), vec![vec![1.0, 2.0]]);
        assert_eq!(
            parse_points(r#"{"points":[[1,2,3]]}"#).unwrap(),
            vec![vec![1.0, 2.0, 3.0]]
        );
        assert!(parse_points("{}").is_err());
    }
}
