//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cosserat_core::catalog::{Catalog, PatchSpec};
use cosserat_core::cosserat3d::{nye_check, Config3D};
use cosserat_core::energy::{minimize, DiscreteShell, EnergyParams, MinimizeOptions};
use cosserat_core::shell::{shell_nye, ShellConfig};
use cosserat_core::validate::{self, Fault, Suite, ValidationReport};
use cosserat_core::Deriv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 50;
const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn sample<const D: usize>(rng: &mut ChaCha8Rng, lo: [f64; D], hi: [f64; D]) -> [f64; D] {
    std::array::from_fn(|i| {
        let m = 0.05 * (hi[i] - lo[i]);
        rng.gen_range(lo[i] + m..hi[i] - m)
    })
}

fn nye_3d() -> Outcome {
    let t = Instant::now();
    let cat = Catalog::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_an, mut worst_fd, mut count) = (0f64, 0f64, 0);
    for (cn, chart) in &cat.charts {
        let chart = chart.build::<f64>(cn).unwrap();
        let phi = cat.vectors["stretch"].build3(&chart, "").unwrap();
        let dom = chart.domain();
        for rot in cat.rotations.values() {
            let qe = rot.build3::<f64>("").unwrap();
            let an = Config3D::new(chart.clone(), phi.clone(), qe.clone(), Deriv::Analytic);
            let fd = Config3D::new(chart.clone(), phi.clone(), qe, Deriv::fd());
            for _ in 0..SAMPLES {
                let x = sample(&mut rng, dom.lo, dom.hi);
                for (cfg, worst) in [(&an, &mut worst_an), (&fd, &mut worst_fd)] {
                    let r = match cfg.point(&x) {
                        Ok(p) => {
                            let (r, _) = nye_check(&p.wryness(), &p.dislocation());
                            if r.is_nan() {
                                f64::INFINITY
                            } else {
                                r
                            }
                        }
                        Err(_) => f64::INFINITY,
                    };
                    *worst = worst.max(r);
                }
                count += 1;
            }
        }
    }
    let el = t.elapsed();
    Outcome {
        passed: worst_an < 1e-10 && worst_fd < 1e-6 && el < Duration::from_secs(10) && count == 4 * 4 * SAMPLES,
        detail: format!("{count} points, analytic {worst_an:.2e} (< 1e-10), fd {worst_fd:.2e} (< 1e-6), {el:.2?}"),
    }
}

fn nye_shell() -> Outcome {
    let t = Instant::now();
    let cat = Catalog::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut resid, mut bound, mut count) = (0f64, 0f64, 0);
    for (pn, patch) in &cat.patches {
        let patch = patch.build::<f64>(pn).unwrap();
        let m = cat.shell_vector("stretch").unwrap().build2(&patch, "").unwrap();
        let dom = patch.domain();
        for rn in cat.rotations.keys() {
            let qe = cat.shell_rotation(rn).unwrap().build2::<f64>("").unwrap();
            for deriv in [Deriv::Analytic, Deriv::fd()] {
                let cfg = ShellConfig::new(patch.clone(), m.clone(), qe.clone(), deriv);
                for _ in 0..SAMPLES {
                    let x = sample(&mut rng, dom.lo, dom.hi);
                    match cfg.point(&x) {
                        Ok(p) => {
                            let ms = p.measures();
                            let rep = shell_nye(&ms.ke, &ms.de);
                            let r = rep.residual.max(rep.inverse_residual).max(rep.max_identity_residual());
                            resid = resid.max(if r.is_nan() { f64::INFINITY } else { r });
                            bound = bound.max(rep.max_bound_excess());
                        }
                        Err(_) => resid = f64::INFINITY,
                    }
                    count += 1;
                }
            }
        }
    }
    let el = t.elapsed();
    Outcome {
        passed: resid < 1e-6 && bound <= 1e-9 && el < Duration::from_secs(10),
        detail: format!(
            "{count} points, identities {resid:.2e} (< 1e-6), bound excess {bound:.2e} (<= 1e-9), {el:.2?}"
        ),
    }
}

/// Passes when every named check in `report` passes and stays below `tol`.
fn from_checks(report: &ValidationReport, names: &[&str], tol: f64) -> Outcome {
    let mut worst = 0f64;
    let mut failed = Vec::new();
    for n in names {
        match report.check(n) {
            Some(c) if c.passed && c.max_residual <= tol => worst = worst.max(c.max_residual),
            Some(c) => failed.push(format!("{n} ({:.2e})", c.max_residual)),
            None => failed.push(format!("{n} missing")),
        }
    }
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks, worst {worst:.2e}", names.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn minimizer() -> Outcome {
    let t = Instant::now();
    let patch = PatchSpec::of(cosserat_core::catalog::PatchKind::Plane)
        .build::<f64>("")
        .unwrap();
    let shell = DiscreteShell::new(patch, 16, 16, EnergyParams::unit()).unwrap();
    let mut s0 = shell.reference_state();
    s0.perturb_rotations(0.05, SEED);
    let opts = MinimizeOptions::default();
    let run = || minimize(&shell, &s0, &opts).ok().and_then(|r| r.ok());
    let (Some(a), Some(b)) = (run(), run()) else {
        return Outcome {
            passed: false,
            detail: "minimizer errored or stalled".into(),
        };
    };
    let el = t.elapsed();
    let ratio = a.final_energy() / a.initial_energy();
    let same = a.trace == b.trace && a.final_state == b.final_state;
    Outcome {
        passed: a.is_monotone() && ratio < 1e-3 && a.final_grad_norm() < 1e-6 && same && el < Duration::from_secs(60),
        detail: format!(
            "{} iterations, monotone {}, E/E0 {ratio:.2e}, |grad| {:.2e}, deterministic {same}, {el:.2?} for two runs",
            a.iterations(),
            a.is_monotone(),
            a.final_grad_norm()
        ),
    }
}

fn faults() -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for (f, suite) in [
        (Fault::ShellCrossSign, Suite::Shell),
        (Fault::NyeTrace, Suite::Shell),
        (Fault::CurlTranspose, Suite::Curl3d),
    ] {
        let r = validate::run(suite, SAMPLES, SEED, Some(f));
        let failed: Vec<&str> = r.failed().map(|c| c.name.as_str()).collect();
        passed &= !failed.is_empty();
        parts.push(format!("{f:?} -> [{}]", failed.join(", ")));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let full = validate::run(Suite::All, SAMPLES, SEED, None);
    let criteria: Vec<Criterion> = vec![
        ("3D Nye relation", Box::new(nye_3d)),
        ("shell Nye relation and identity bundle", Box::new(nye_shell)),
        (
            "multi-route agreement",
            Box::new(|| {
                from_checks(
                    &full,
                    &[
                        "wryness_routes",
                        "wryness_fd",
                        "shell_curvature_routes",
                        "shell_curvature_fd",
                        "dislocation_routes",
                        "dislocation_fd",
                        "shell_dislocation_routes",
                        "shell_dislocation_fd",
                        "curl3d_vec_routes",
                        "curl3d_tensor_routes",
                        "curl3d_tensor_fd",
                        "surface_curl_vec_routes",
                        "surface_curl_tensor_routes",
                        "surface_curl_fd",
                    ],
                    1e-6,
                )
            }),
        ),
        (
            "cofactor structure",
            Box::new(|| {
                from_checks(
                    &full,
                    &["shell_planar_split", "shell_cofactor", "shell_transform"],
                    1e-6,
                )
            }),
        ),
        (
            "Cartesian reductions",
            Box::new(|| {
                from_checks(
                    &full,
                    &["cartesian_reductions", "curl3d_cartesian", "surface_planar_reduction"],
                    1e-12,
                )
            }),
        ),
        (
            "energy properties",
            Box::new(|| {
                from_checks(
                    &full,
                    &[
                        "energy_zero",
                        "energy_positive",
                        "energy_homogeneity",
                        "energy_worked_values",
                        "energy_frame_indifference",
                    ],
                    1e-12,
                )
            }),
        ),
        ("minimizer on clamped 16x16 plate", Box::new(minimizer)),
        ("fault injection", Box::new(faults)),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        all &= o.passed;
        println!(
            "[{}] criterion {}: {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
