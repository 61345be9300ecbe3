//! Named invariant checks swept over the built-in catalog.
//!
//! Every check records its largest residual against a fixed tolerance. A
//! [`Fault`] corrupts one route on purpose so the suite can prove it is not
//! vacuous.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{Catalog, RotationSpec};
use crate::cosserat3d::{dislocation_cartesian, nye_check, wryness_cartesian, Config3D};
use crate::curvilinear3d::{
    curl_tensor_cartesian, curl_tensor_cartesian_rows, curl_vec_cartesian, frames_at, transposed_convention, Chart3,
};
use crate::energy::{energy_3d, energy_gradient, energy_shell, minimize, DiscreteShell, EnergyParams, MinimizeOptions};
use crate::error::{Error, Result};
use crate::field::{jet, BoxDomain, ConstField, Deriv, DynField, FnField, Jet};
use crate::micro::{nye_from_wryness, wryness_from_nye};
use crate::shell::{
    default_initial_rotation, planar_cofactor_check, planar_split, shell_nye, InitialRotation, PlanarTensor,
    ShellConfig,
};
use crate::surface::{surf_frames, SurfacePatch};
use crate::tensor::{skew_from_axial, Mat3, Quat, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Curl3d,
    Cosserat3d,
    Surface,
    Shell,
    Energy,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "curl3d" => Suite::Curl3d,
            "cosserat3d" => Suite::Cosserat3d,
            "surface" => Suite::Surface,
            "shell" => Suite::Shell,
            "energy" => Suite::Energy,
            "all" => Suite::All,
            _ => return None,
        })
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Deliberate corruptions of single routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Flips the sign of the cross product in `Dₑ = −(QₑᵀQₑ,α) × aᵅ`.
    ShellCrossSign,
    /// Drops `tr(Kₑ)1₃` from the shell Nye residual.
    NyeTrace,
    /// Uses the transposed Curl convention for the direct route.
    CurlTranspose,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "shell_cross_sign" => Fault::ShellCrossSign,
            "nye_trace" => Fault::NyeTrace,
            "curl_transpose" => Fault::CurlTranspose,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    pub wall_time_s: f64,
    /// Context of the first sample above tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub schema: &'static str,
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Acc {
    tol: f64,
    max: f64,
    count: usize,
    first: Option<String>,
}

impl Acc {
    fn new(tol: f64) -> Self {
        Acc {
            tol,
            max: 0.0,
            count: 0,
            first: None,
        }
    }

    fn add(&mut self, r: f64, ctx: impl FnOnce() -> String) {
        self.count += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        self.max = self.max.max(r);
        if r > self.tol && self.first.is_none() {
            self.first = Some(format!("{} (residual {r:e})", ctx()));
        }
    }

    fn fail(&mut self, e: &Error, ctx: impl FnOnce() -> String) {
        let c = ctx();
        self.add(f64::INFINITY, || format!("{c}: {e}"));
    }

    fn record<V>(&mut self, r: Result<V>, ctx: impl Fn() -> String, f: impl FnOnce(V) -> f64) {
        match r {
            Ok(v) => {
                let res = f(v);
                self.add(res, ctx);
            }
            Err(e) => self.fail(&e, ctx),
        }
    }
}

struct Ctx {
    samples: usize,
    seed: u64,
    fault: Option<Fault>,
    catalog: Catalog,
}

impl Ctx {
    fn rng(&self, check: &str, combo: usize) -> ChaCha8Rng {
        // FNV-1a over the check name keeps streams independent of scheduling
        let mut h: u64 = 0xcbf29ce484222325;
        for b in check.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h ^ (combo as u64).wrapping_mul(0x9e3779b97f4a7c15))
    }

    fn points<const D: usize>(&self, domain: &BoxDomain<f64, D>, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
        (0..self.samples)
            .map(|_| {
                let u: [f64; D] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
                domain.lerp(&u, 0.05)
            })
            .collect()
    }
}

/// `max|a − b| / max(1, max|b|)`.
fn rel(a: &Mat3<f64>, b: &Mat3<f64>) -> f64 {
    (*a - *b).max_abs() / 1f64.max(b.max_abs())
}

fn relv(a: &Vec3<f64>, b: &Vec3<f64>) -> f64 {
    (*a - *b).max_abs() / 1f64.max(b.max_abs())
}

fn worst(rs: impl IntoIterator<Item = f64>) -> f64 {
    rs.into_iter()
        .fold(0.0, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r) })
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    let axis = Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    Quat::from_axis_angle(axis, rng.gen_range(-PI..PI)).to_mat()
}

fn random_mat(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    Mat3(std::array::from_fn(|_| {
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
    }))
}

fn fmt_pt(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|c| format!("{c:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

type Check = (&'static str, Suite, fn(&Ctx) -> Acc);

fn checks() -> Vec<Check> {
    vec![
        ("curl3d_frames", Suite::Curl3d, curl3d_frames),
        ("curl3d_christoffel_fd", Suite::Curl3d, curl3d_christoffel_fd),
        ("curl3d_vec_routes", Suite::Curl3d, curl3d_vec_routes),
        ("curl3d_vec_fd", Suite::Curl3d, curl3d_vec_fd),
        ("curl3d_tensor_routes", Suite::Curl3d, curl3d_tensor_routes),
        ("curl3d_tensor_fd", Suite::Curl3d, curl3d_tensor_fd),
        ("curl3d_transpose_rows", Suite::Curl3d, curl3d_transpose_rows),
        ("curl3d_cartesian", Suite::Curl3d, curl3d_cartesian),
        ("curl3d_constant", Suite::Curl3d, curl3d_constant),
        ("curl3d_curl_grad", Suite::Curl3d, curl3d_curl_grad),
        ("nye3d_analytic", Suite::Cosserat3d, nye3d_analytic),
        ("nye3d_fd", Suite::Cosserat3d, nye3d_fd),
        ("nye3d_trace", Suite::Cosserat3d, nye3d_trace),
        ("nye3d_inverse", Suite::Cosserat3d, nye3d_inverse),
        ("wryness_routes", Suite::Cosserat3d, wryness_routes),
        ("wryness_fd", Suite::Cosserat3d, wryness_fd),
        ("dislocation_routes", Suite::Cosserat3d, dislocation_routes),
        ("dislocation_fd", Suite::Cosserat3d, dislocation_fd),
        ("omega_routes", Suite::Cosserat3d, omega_routes),
        ("strain_routes", Suite::Cosserat3d, strain_routes),
        ("cartesian_reductions", Suite::Cosserat3d, cartesian_reductions),
        ("left_invariance_3d", Suite::Cosserat3d, left_invariance_3d),
        ("frame_indifference_3d", Suite::Cosserat3d, frame_indifference_3d),
        ("surface_frames", Suite::Surface, surface_frames),
        ("surface_frames_fd", Suite::Surface, surface_frames_fd),
        ("surface_curl_vec_routes", Suite::Surface, surface_curl_vec_routes),
        ("surface_curl_tensor_routes", Suite::Surface, surface_curl_tensor_routes),
        ("surface_curl_fd", Suite::Surface, surface_curl_fd),
        (
            "surface_derivative_reassembly",
            Suite::Surface,
            surface_derivative_reassembly,
        ),
        (
            "surface_fundamental_derivative",
            Suite::Surface,
            surface_fundamental_derivative,
        ),
        ("surface_grad_div", Suite::Surface, surface_grad_div),
        ("surface_curl_grad", Suite::Surface, surface_curl_grad),
        ("surface_planar_reduction", Suite::Surface, surface_planar_reduction),
        ("shell_initial_rotation", Suite::Shell, shell_initial_rotation),
        ("shell_strain_routes", Suite::Shell, shell_strain_routes),
        ("shell_curvature_routes", Suite::Shell, shell_curvature_routes),
        ("shell_curvature_fd", Suite::Shell, shell_curvature_fd),
        ("shell_dislocation_routes", Suite::Shell, shell_dislocation_routes),
        ("shell_dislocation_fd", Suite::Shell, shell_dislocation_fd),
        ("shell_nye", Suite::Shell, shell_nye_check),
        ("shell_nye_bundle", Suite::Shell, shell_nye_bundle),
        ("shell_norm_bounds", Suite::Shell, shell_norm_bounds),
        ("shell_planar_split", Suite::Shell, shell_planar_split),
        ("shell_cofactor", Suite::Shell, shell_cofactor),
        ("shell_transform", Suite::Shell, shell_transform),
        ("shell_left_invariance", Suite::Shell, shell_left_invariance),
        ("shell_frame_indifference", Suite::Shell, shell_frame_indifference),
        ("energy_zero", Suite::Energy, energy_zero),
        ("energy_positive", Suite::Energy, energy_positive),
        ("energy_homogeneity", Suite::Energy, energy_homogeneity),
        ("energy_worked_values", Suite::Energy, energy_worked_values),
        ("energy_density_gradient", Suite::Energy, energy_density_gradient),
        ("energy_smooth_at_zero", Suite::Energy, energy_smooth_at_zero),
        ("energy_discrete_gradient", Suite::Energy, energy_discrete_gradient),
        ("energy_frame_indifference", Suite::Energy, energy_frame_indifference),
        ("energy_descent", Suite::Energy, energy_descent),
    ]
}

/// Names of all checks a suite runs.
pub fn check_names(suite: Suite) -> Vec<&'static str> {
    let mut v: Vec<_> = checks()
        .into_iter()
        .filter(|c| suite.includes(c.1))
        .map(|c| c.0)
        .collect();
    v.sort();
    v
}

/// Runs `suite` with `samples` random points per catalog combination.
///
/// `samples = 0` yields an empty, passing report.
pub fn run(suite: Suite, samples: usize, seed: u64, fault: Option<Fault>) -> ValidationReport {
    let ctx = Ctx {
        samples,
        seed,
        fault,
        catalog: Catalog::builtin(),
    };
    let selected: Vec<Check> = if samples == 0 {
        Vec::new()
    } else {
        checks().into_iter().filter(|c| suite.includes(c.1)).collect()
    };
    let mut results: Vec<CheckResult> = selected
        .par_iter()
        .map(|(name, _, f)| {
            let t = Instant::now();
            let acc = f(&ctx);
            CheckResult {
                name: name.to_string(),
                max_residual: acc.max,
                tolerance: acc.tol,
                passed: acc.max <= acc.tol,
                samples: acc.count,
                wall_time_s: t.elapsed().as_secs_f64(),
                first_failure: acc.first,
            }
        })
        .collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    ValidationReport {
        schema: crate::catalog::SCHEMA,
        suite,
        samples,
        seed,
        fault,
        passed: results.iter().all(|c| c.passed),
        checks: results,
    }
}

// ---------------------------------------------------------------- fixtures

struct Body {
    label: String,
    cfg: Config3D<f64>,
}

fn charts(ctx: &Ctx) -> Vec<(String, Arc<dyn Chart3<f64>>)> {
    ctx.catalog
        .charts
        .iter()
        .map(|(n, c)| {
            (
                n.clone(),
                c.build::<f64>(&format!("/charts/{n}")).expect("builtin chart"),
            )
        })
        .collect()
}

fn patches(ctx: &Ctx) -> Vec<(String, Arc<dyn SurfacePatch<f64>>)> {
    ctx.catalog
        .patches
        .iter()
        .map(|(n, p)| {
            (
                n.clone(),
                p.build::<f64>(&format!("/patches/{n}")).expect("builtin patch"),
            )
        })
        .collect()
}

/// Every chart with every rotation field, plus one case with a non-trivial `Q₀`.
fn bodies(ctx: &Ctx, deriv: Deriv<f64>) -> Vec<Body> {
    let mut out = Vec::new();
    for (cn, chart) in charts(ctx) {
        let phi = ctx.catalog.vectors["stretch"]
            .build3(&chart, "/vectors/stretch")
            .expect("builtin field");
        for (rn, rot) in &ctx.catalog.rotations {
            let qe = rot.build3::<f64>("/rotations").expect("builtin rotation");
            out.push(Body {
                label: format!("chart={cn}, rotation={rn}"),
                cfg: Config3D::new(chart.clone(), phi.clone(), qe, deriv),
            });
        }
        if cn == "perturbed" {
            let qe = ctx.catalog.rotations["composed"]
                .build3::<f64>("")
                .expect("builtin rotation");
            let q0 = ctx.catalog.rotations["sine"]
                .build3::<f64>("")
                .expect("builtin rotation");
            out.push(Body {
                label: format!("chart={cn}, rotation=composed, initial=sine"),
                cfg: Config3D::new(chart.clone(), phi.clone(), qe, deriv).with_initial_rotation(q0),
            });
        }
    }
    out
}

struct Shell {
    label: String,
    cfg: ShellConfig<f64>,
}

fn shells(ctx: &Ctx, deriv: Deriv<f64>) -> Vec<Shell> {
    let mut out = Vec::new();
    for (pn, patch) in patches(ctx) {
        let m = ctx
            .catalog
            .shell_vector("stretch")
            .unwrap()
            .build2(&patch, "")
            .expect("builtin field");
        for rn in ctx.catalog.rotations.keys() {
            let qe = ctx
                .catalog
                .shell_rotation(rn)
                .unwrap()
                .build2::<f64>("")
                .expect("builtin rotation");
            out.push(Shell {
                label: format!("patch={pn}, rotation={rn}"),
                cfg: ShellConfig::new(patch.clone(), m.clone(), qe, deriv),
            });
        }
        let qe = ctx
            .catalog
            .shell_rotation("composed")
            .unwrap()
            .build2::<f64>("")
            .unwrap();
        let mut cfg = ShellConfig::new(patch.clone(), m.clone(), qe, deriv);
        cfg.q0 = InitialRotation::Field(ctx.catalog.shell_rotation("linear").unwrap().build2("").unwrap());
        out.push(Shell {
            label: format!("patch={pn}, rotation=composed, initial=linear"),
            cfg,
        });
    }
    out
}

fn tensor_fields3(ctx: &Ctx) -> Vec<(String, DynField<f64, 3, Mat3<f64>>)> {
    let mut out: Vec<(String, DynField<f64, 3, Mat3<f64>>)> = Vec::new();
    for (n, t) in &ctx.catalog.tensors {
        out.push((n.clone(), Arc::new(t.build::<f64, 3>("").expect("builtin tensor"))));
    }
    for (n, r) in &ctx.catalog.rotations {
        out.push((format!("rotation:{n}"), r.build3::<f64>("").expect("builtin rotation")));
    }
    out
}

fn vector_fields3(ctx: &Ctx, chart: &Arc<dyn Chart3<f64>>) -> Vec<(String, DynField<f64, 3, Vec3<f64>>)> {
    ctx.catalog
        .vectors
        .iter()
        .map(|(n, v)| (n.clone(), v.build3(chart, "").expect("builtin vector")))
        .collect()
}

fn tensor_fields2(ctx: &Ctx) -> Vec<(String, DynField<f64, 2, Mat3<f64>>)> {
    let mut out: Vec<(String, DynField<f64, 2, Mat3<f64>>)> = Vec::new();
    for n in ctx.catalog.tensors.keys() {
        out.push((
            n.clone(),
            Arc::new(ctx.catalog.shell_tensor(n).unwrap().build::<f64, 2>("").unwrap()),
        ));
    }
    for n in ctx.catalog.rotations.keys() {
        out.push((
            format!("rotation:{n}"),
            ctx.catalog.shell_rotation(n).unwrap().build2::<f64>("").unwrap(),
        ));
    }
    out
}

fn vector_fields2(ctx: &Ctx, patch: &Arc<dyn SurfacePatch<f64>>) -> Vec<(String, DynField<f64, 2, Vec3<f64>>)> {
    ctx.catalog
        .vectors
        .keys()
        .map(|n| {
            (
                n.clone(),
                ctx.catalog.shell_vector(n).unwrap().build2(patch, "").unwrap(),
            )
        })
        .collect()
}

/// Runs `f` on every sample point of every chart.
fn over_charts(
    ctx: &Ctx,
    name: &str,
    acc: &mut Acc,
    mut f: impl FnMut(&str, &Arc<dyn Chart3<f64>>, [f64; 3], &mut Acc),
) {
    for (c, (cn, chart)) in charts(ctx).iter().enumerate() {
        let mut rng = ctx.rng(name, c);
        for x in ctx.points(&chart.domain(), &mut rng) {
            f(cn, chart, x, acc);
        }
    }
}

fn over_patches(
    ctx: &Ctx,
    name: &str,
    acc: &mut Acc,
    mut f: impl FnMut(&str, &Arc<dyn SurfacePatch<f64>>, [f64; 2], &mut Acc),
) {
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let mut rng = ctx.rng(name, c);
        for x in ctx.points(&patch.domain(), &mut rng) {
            f(pn, patch, x, acc);
        }
    }
}

fn over_bodies(ctx: &Ctx, name: &str, deriv: Deriv<f64>, acc: &mut Acc, mut f: impl FnMut(&Body, [f64; 3], &mut Acc)) {
    for (c, b) in bodies(ctx, deriv).iter().enumerate() {
        let mut rng = ctx.rng(name, c);
        for x in ctx.points(&b.cfg.chart.domain(), &mut rng) {
            f(b, x, acc);
        }
    }
}

fn over_shells(ctx: &Ctx, name: &str, deriv: Deriv<f64>, acc: &mut Acc, mut f: impl FnMut(&Shell, [f64; 2], &mut Acc)) {
    for (c, s) in shells(ctx, deriv).iter().enumerate() {
        let mut rng = ctx.rng(name, c);
        for x in ctx.points(&s.cfg.patch.domain(), &mut rng) {
            f(s, x, acc);
        }
    }
}

/// Direct `Curl T`, corrupted under [`Fault::CurlTranspose`].
fn direct_curl(ctx: &Ctx, f: &crate::curvilinear3d::ChartFrames<f64>, j: &Jet<Mat3<f64>, 3>) -> Mat3<f64> {
    let c = f.curl_tensor(j);
    if ctx.fault == Some(Fault::CurlTranspose) {
        transposed_convention(&c)
    } else {
        c
    }
}

fn direct_curl_cartesian(ctx: &Ctx, j: &Jet<Mat3<f64>, 3>) -> Mat3<f64> {
    let c = curl_tensor_cartesian(j);
    if ctx.fault == Some(Fault::CurlTranspose) {
        transposed_convention(&c)
    } else {
        c
    }
}

// ---------------------------------------------------------------- curl3d

fn curl3d_frames(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_charts(ctx, "curl3d_frames", &mut acc, |cn, chart, x, acc| {
        acc.record(
            frames_at(chart.as_ref(), &x, Deriv::Analytic),
            || format!("chart={cn}, point={}", fmt_pt(&x)),
            |f| {
                let mut r: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        r = r.max((f.contra[j].dot(f.cov[i]) - delta).abs());
                        r = r.max((f.metric[i][j] - f.metric[j][i]).abs());
                        for k in 0..3 {
                            r = r.max((f.christoffel[k][i][j] - f.christoffel[k][j][i]).abs());
                        }
                    }
                }
                if !(f.det_g > 0.0) {
                    r = f64::INFINITY;
                }
                r
            },
        );
    });
    acc
}

fn curl3d_christoffel_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_charts(ctx, "curl3d_christoffel_fd", &mut acc, |cn, chart, x, acc| {
        let both = frames_at(chart.as_ref(), &x, Deriv::Analytic)
            .and_then(|a| Ok((a, frames_at(chart.as_ref(), &x, Deriv::fd())?)));
        acc.record(
            both,
            || format!("chart={cn}, point={}", fmt_pt(&x)),
            |(a, n)| {
                let mut r: f64 = 0.0;
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            r = r.max((a.christoffel[k][i][j] - n.christoffel[k][i][j]).abs());
                        }
                    }
                    r = r.max(relv(&n.cov[k], &a.cov[k]));
                }
                r
            },
        );
    });
    acc
}

fn curl3d_vec_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_charts(ctx, "curl3d_vec_routes", &mut acc, |cn, chart, x, acc| {
        for (vn, v) in vector_fields3(ctx, chart) {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("chart={cn}, field={vn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let direct = f.curl_vec(&j);
                    worst([
                        relv(&f.curl_vec_components(&j), &direct),
                        relv(&f.curl_vec_definition(&j), &direct),
                    ])
                },
            );
        }
    });
    acc
}

fn curl3d_vec_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_charts(ctx, "curl3d_vec_fd", &mut acc, |cn, chart, x, acc| {
        for (vn, v) in vector_fields3(ctx, chart) {
            let r = (|| {
                let a = frames_at(chart.as_ref(), &x, Deriv::Analytic)?;
                let n = frames_at(chart.as_ref(), &x, Deriv::fd())?;
                let ja = jet(v.as_ref(), &x, Deriv::Analytic)?;
                let jn = jet(v.as_ref(), &x, Deriv::fd())?;
                Ok((a, n, ja, jn))
            })();
            acc.record(
                r,
                || format!("chart={cn}, field={vn}, point={}", fmt_pt(&x)),
                |(a, n, ja, jn)| {
                    let exact = a.curl_vec(&ja);
                    worst([
                        relv(&n.curl_vec(&jn), &exact),
                        relv(&n.curl_vec_components(&jn), &exact),
                        relv(&n.curl_vec_definition(&jn), &exact),
                    ])
                },
            );
        }
    });
    acc
}

fn tensor_routes3(f: &crate::curvilinear3d::ChartFrames<f64>, j: &Jet<Mat3<f64>, 3>) -> [Mat3<f64>; 5] {
    [
        f.curl_tensor_definition(j),
        f.curl_tensor_covariant(j),
        f.curl_tensor_mixed(j),
        f.curl_rowwise_covariant(j),
        f.curl_rowwise_contravariant(j),
    ]
}

fn curl3d_tensor_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let fields = tensor_fields3(ctx);
    over_charts(ctx, "curl3d_tensor_routes", &mut acc, |cn, chart, x, acc| {
        for (tn, t) in &fields {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("chart={cn}, field={tn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let direct = direct_curl(ctx, &f, &j);
                    worst(tensor_routes3(&f, &j).iter().map(|c| rel(c, &direct)))
                },
            );
        }
    });
    acc
}

fn curl3d_tensor_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let fields = tensor_fields3(ctx);
    over_charts(ctx, "curl3d_tensor_fd", &mut acc, |cn, chart, x, acc| {
        for (tn, t) in &fields {
            let r = (|| {
                let a = frames_at(chart.as_ref(), &x, Deriv::Analytic)?;
                let n = frames_at(chart.as_ref(), &x, Deriv::fd())?;
                Ok((
                    a,
                    n,
                    jet(t.as_ref(), &x, Deriv::Analytic)?,
                    jet(t.as_ref(), &x, Deriv::fd())?,
                ))
            })();
            acc.record(
                r,
                || format!("chart={cn}, field={tn}, point={}", fmt_pt(&x)),
                |(a, n, ja, jn)| {
                    let exact = a.curl_tensor(&ja);
                    let direct = direct_curl(ctx, &n, &jn);
                    worst(
                        tensor_routes3(&n, &jn)
                            .iter()
                            .chain(std::iter::once(&direct))
                            .map(|c| rel(c, &exact)),
                    )
                },
            );
        }
    });
    acc
}

fn curl3d_transpose_rows(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let fields = tensor_fields3(ctx);
    over_charts(ctx, "curl3d_transpose_rows", &mut acc, |cn, chart, x, acc| {
        for (tn, t) in &fields {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("chart={cn}, field={tn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let curl = direct_curl(ctx, &f, &j);
                    worst((0..3).map(|c| {
                        let e = Vec3::unit(c);
                        let v = Jet {
                            value: j.value.tmul(e),
                            d: std::array::from_fn(|i| j.d[i].tmul(e)),
                        };
                        relv(&curl.tmul(e), &f.curl_vec(&v))
                    }))
                },
            );
        }
    });
    acc
}

fn curl3d_cartesian(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    let chart = ctx.catalog.charts["identity"].build::<f64>("").unwrap();
    let fields = tensor_fields3(ctx);
    let vectors = vector_fields3(ctx, &chart);
    let mut rng = ctx.rng("curl3d_cartesian", 0);
    for x in ctx.points(&chart.domain(), &mut rng) {
        let ctxs = |n: &str| format!("chart=identity, field={n}, point={}", fmt_pt(&x));
        for (tn, t) in &fields {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || ctxs(tn),
                |(f, j)| {
                    let cart = direct_curl_cartesian(ctx, &j);
                    worst([
                        rel(&f.curl_tensor(&j), &cart),
                        rel(&f.curl_tensor_covariant(&j), &cart),
                        rel(&f.curl_rowwise_covariant(&j), &cart),
                        rel(&curl_tensor_cartesian_rows(&j), &cart),
                    ])
                },
            );
        }
        for (vn, v) in &vectors {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || ctxs(vn),
                |(f, j)| {
                    let cart = curl_vec_cartesian(&j);
                    worst([relv(&f.curl_vec(&j), &cart), relv(&f.curl_vec_components(&j), &cart)])
                },
            );
        }
    }
    acc
}

fn curl3d_constant(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    let mut rng = ctx.rng("curl3d_constant", 99);
    let c = random_mat(&mut rng);
    let field = ConstField(c);
    over_charts(ctx, "curl3d_constant", &mut acc, |cn, chart, x, acc| {
        let r = frames_at(chart.as_ref(), &x, Deriv::Analytic).and_then(|f| Ok((f, jet(&field, &x, Deriv::Analytic)?)));
        acc.record(
            r,
            || format!("chart={cn}, field=constant, point={}", fmt_pt(&x)),
            |(f, j)| {
                worst(
                    tensor_routes3(&f, &j)
                        .iter()
                        .chain(std::iter::once(&direct_curl(ctx, &f, &j)))
                        .map(|m| m.max_abs()),
                )
            },
        );
    });
    acc
}

fn curl3d_curl_grad(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    for (c, (cn, chart)) in charts(ctx).iter().enumerate() {
        // v = f,ᵢ gⁱ with f = x₁x₂x₃ + x₁²
        let ch = chart.clone();
        let grad = FnField::new(move |x: &[f64; 3]| {
            let df = [x[1] * x[2] + 2.0 * x[0], x[0] * x[2], x[0] * x[1]];
            match frames_at(ch.as_ref(), x, Deriv::Analytic) {
                Ok(f) => (0..3).fold(Vec3::zero(), |acc, i| acc + f.contra[i].scale(df[i])),
                Err(_) => Vec3::new(f64::NAN, f64::NAN, f64::NAN),
            }
        });
        let mut rng = ctx.rng("curl3d_curl_grad", c);
        for x in ctx.points(&chart.domain(), &mut rng) {
            let r = frames_at(chart.as_ref(), &x, Deriv::Analytic).and_then(|f| Ok((f, jet(&grad, &x, Deriv::fd())?)));
            acc.record(
                r,
                || format!("chart={cn}, field=grad(x1x2x3+x1^2), point={}", fmt_pt(&x)),
                |(f, j)| f.curl_vec(&j).max_abs(),
            );
        }
    }
    acc
}

// ---------------------------------------------------------------- cosserat3d

fn ctx3(b: &Body, x: &[f64; 3]) -> String {
    format!("{}, point={}", b.label, fmt_pt(x))
}

fn nye3d_analytic(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "nye3d_analytic", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let (r1, r2) = nye_check(&p.wryness(), &p.dislocation());
                r1.max(r2)
            },
        );
    });
    acc
}

fn nye3d_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_bodies(ctx, "nye3d_fd", Deriv::fd(), &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let (r1, r2) = nye_check(&p.wryness(), &p.dislocation());
                r1.max(r2)
            },
        );
    });
    acc
}

fn nye3d_trace(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "nye3d_trace", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| (p.dislocation().trace() - 2.0 * p.wryness().trace()).abs(),
        );
    });
    acc
}

fn nye3d_inverse(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-14);
    let mut rng = ctx.rng("nye3d_inverse", 0);
    for _ in 0..ctx.samples * 16 {
        let g = random_mat(&mut rng);
        let d = nye_from_wryness(&g);
        let (r1, r2) = nye_check(&g, &d);
        acc.add(worst([(wryness_from_nye(&d) - g).max_abs(), r1, r2]), || {
            "random Γ".into()
        });
    }
    acc
}

fn wryness_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "wryness_routes", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let g = p.wryness();
                worst([
                    rel(&p.wryness_via_total(), &g),
                    rel(&p.wryness_via_directors(), &g),
                    rel(&p.wryness_via_omegas(), &g),
                ])
            },
        );
    });
    acc
}

fn wryness_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let exact = bodies(ctx, Deriv::Analytic);
    over_bodies(ctx, "wryness_fd", Deriv::fd(), &mut acc, |b, x, acc| {
        let e = exact.iter().find(|e| e.label == b.label).expect("same catalog");
        let r = b.cfg.point(&x).and_then(|p| Ok((p, e.cfg.point(&x)?)));
        acc.record(
            r,
            || ctx3(b, &x),
            |(p, e)| {
                let g = e.wryness();
                worst([
                    rel(&p.wryness(), &g),
                    rel(&p.wryness_via_total(), &g),
                    rel(&p.wryness_via_directors(), &g),
                    rel(&p.wryness_via_omegas(), &g),
                ])
            },
        );
    });
    acc
}

fn dislocation_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "dislocation_routes", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let curl = direct_curl(ctx, &p.frames, &p.micro.qe);
                let d = p.micro.qe.value.tmul_mat(&curl);
                worst([
                    rel(&p.dislocation_via_rates(), &d),
                    rel(&p.dislocation_via_directors(), &d),
                ])
            },
        );
    });
    acc
}

fn dislocation_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let exact = bodies(ctx, Deriv::Analytic);
    over_bodies(ctx, "dislocation_fd", Deriv::fd(), &mut acc, |b, x, acc| {
        let e = exact.iter().find(|e| e.label == b.label).expect("same catalog");
        let r = b.cfg.point(&x).and_then(|p| Ok((p, e.cfg.point(&x)?)));
        acc.record(
            r,
            || ctx3(b, &x),
            |(p, e)| {
                let d = e.dislocation();
                worst([
                    rel(&p.dislocation(), &d),
                    rel(&p.dislocation_via_rates(), &d),
                    rel(&p.dislocation_via_directors(), &d),
                ])
            },
        );
    });
    acc
}

fn omega_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "omega_routes", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let w = p.omegas();
                let wd = p.omegas_via_directors();
                worst((0..3).map(|i| relv(&wd[i], &w[i])).chain([p.micro.omega_residual(&w)]))
            },
        );
    });
    acc
}

fn strain_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_bodies(ctx, "strain_routes", Deriv::Analytic, &mut acc, |b, x, acc| {
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let (ue, ee) = p.strain();
                let f = p.deformation_gradient();
                let fg = worst((0..3).map(|i| relv(&(f * p.frames.cov[i]), &p.phi.d[i])));
                worst([
                    rel(&p.strain_via_directors(), &ee),
                    rel(&(ue - Mat3::identity()), &ee),
                    fg,
                ])
            },
        );
    });
    acc
}

fn cartesian_reductions(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    over_bodies(ctx, "cartesian_reductions", Deriv::Analytic, &mut acc, |b, x, acc| {
        if !b.label.starts_with("chart=identity") {
            return;
        }
        acc.record(
            b.cfg.point(&x),
            || ctx3(b, &x),
            |p| {
                let d = p.micro.directors();
                let dd = p.micro.director_partials();
                let curl = direct_curl(ctx, &p.frames, &p.micro.qe);
                let dis = p.micro.qe.value.tmul_mat(&curl);
                worst([
                    rel(&wryness_cartesian(&d, &dd), &p.wryness()),
                    rel(&dislocation_cartesian(&d, &dd), &dis),
                    rel(&curl_tensor_cartesian(&p.micro.qe), &curl),
                ])
            },
        );
    });
    acc
}

fn left_invariance_3d(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let mut rng = ctx.rng("left_invariance_3d", 0);
    let axis = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0];
    let angle = rng.gen_range(-PI..PI);
    for (c, (cn, chart)) in charts(ctx).iter().enumerate() {
        let phi = ctx.catalog.vectors["stretch"].build3(chart, "").unwrap();
        for (rn, spec) in &ctx.catalog.rotations {
            let plain = Config3D::new(
                chart.clone(),
                phi.clone(),
                spec.build3::<f64>("").unwrap(),
                Deriv::Analytic,
            );
            let rotated_spec = RotationSpec::composed(vec![RotationSpec::constant(axis, angle), spec.clone()]);
            let rotated = Config3D::new(
                chart.clone(),
                phi.clone(),
                rotated_spec.build3::<f64>("").unwrap(),
                Deriv::Analytic,
            );
            let mut prng = ctx.rng("left_invariance_3d", c + 1);
            for x in ctx.points(&chart.domain(), &mut prng) {
                let r = plain.point(&x).and_then(|p| Ok((p, rotated.point(&x)?)));
                acc.record(
                    r,
                    || format!("chart={cn}, rotation={rn}, point={}", fmt_pt(&x)),
                    |(p, q)| worst([rel(&q.wryness(), &p.wryness()), rel(&q.dislocation(), &p.dislocation())]),
                );
            }
        }
    }
    acc
}

fn frame_indifference_3d(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    for (c, (cn, chart)) in charts(ctx).iter().enumerate() {
        let mut rng = ctx.rng("frame_indifference_3d", c);
        let r = random_rotation(&mut rng);
        let shift = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let (c1, c2) = (chart.clone(), chart.clone());
        let phi = Arc::new(FnField::with_partial(
            move |x: &[f64; 3]| r * c1.map(x) + shift,
            move |x: &[f64; 3], i| r * c2.tangent(x, i).unwrap_or(Vec3::new(f64::NAN, f64::NAN, f64::NAN)),
        ));
        let cfg = Config3D::new(chart.clone(), phi, Arc::new(ConstField(r)), Deriv::Analytic);
        for x in ctx.points(&chart.domain(), &mut rng) {
            acc.record(
                cfg.point(&x),
                || format!("chart={cn}, rigid motion, point={}", fmt_pt(&x)),
                |p| worst([p.strain().1.max_abs(), p.wryness().max_abs(), p.dislocation().max_abs()]),
            );
        }
    }
    acc
}

// ---------------------------------------------------------------- surface

fn surface_frames(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_patches(ctx, "surface_frames", &mut acc, |pn, patch, x, acc| {
        acc.record(
            surf_frames(patch.as_ref(), &x, Deriv::Analytic),
            || format!("patch={pn}, point={}", fmt_pt(&x)),
            |f| {
                let a = f.first_fundamental();
                let b = f.second_fundamental();
                let c = f.alternator();
                let n = f.normal;
                let mut r: f64 = 0.0;
                for al in 0..2 {
                    for be in 0..2 {
                        let delta = if al == be { 1.0 } else { 0.0 };
                        r = r.max((f.cov[al].dot(f.contra[be]) - delta).abs());
                    }
                    r = r.max(f.cov[al].dot(n).abs());
                }
                worst([
                    r,
                    rel(&a, &a.transpose()),
                    rel(&b, &b.transpose()),
                    rel(&c, &-c.transpose()),
                    rel(&(c * c), &-a),
                    rel(&c, &-(n.cross_tensor(&a))),
                    rel(&c, &-(a.cross_vec(n))),
                    (a * n).max_abs(),
                    (b * n).max_abs(),
                    f.cross_identity_residual(),
                    rel(&f.second_fundamental_from_normal_part(), &b),
                    (n.norm() - 1.0).abs(),
                ])
            },
        );
    });
    acc
}

fn surface_frames_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_patches(ctx, "surface_frames_fd", &mut acc, |pn, patch, x, acc| {
        let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
            .and_then(|a| Ok((a, surf_frames(patch.as_ref(), &x, Deriv::fd())?)));
        acc.record(
            r,
            || format!("patch={pn}, point={}", fmt_pt(&x)),
            |(a, n)| {
                let mut r: f64 = 0.0;
                for g in 0..2 {
                    for al in 0..2 {
                        for be in 0..2 {
                            r = r.max((a.christoffel[g][al][be] - n.christoffel[g][al][be]).abs());
                        }
                    }
                }
                worst([r, rel(&n.second_fundamental(), &a.second_fundamental())])
            },
        );
    });
    acc
}

fn surface_curl_vec_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_patches(ctx, "surface_curl_vec_routes", &mut acc, |pn, patch, x, acc| {
        for (vn, v) in vector_fields2(ctx, patch) {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch={pn}, field={vn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let d = f.curl_s_vec(&j);
                    worst([
                        relv(&f.curl_s_vec_definition(&j), &d),
                        relv(&f.curl_s_vec_components(&j), &d),
                    ])
                },
            );
        }
    });
    acc
}

fn surface_tensor_routes(f: &crate::surface::SurfaceFrames<f64>, j: &Jet<Mat3<f64>, 2>) -> [Mat3<f64>; 5] {
    [
        f.curl_s_tensor_definition(j),
        f.curl_s_tensor_covariant(j),
        f.curl_s_tensor_mixed(j),
        f.curl_s_rowwise_covariant(j),
        f.curl_s_rowwise_contravariant(j),
    ]
}

fn surface_curl_tensor_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let fields = tensor_fields2(ctx);
    over_patches(ctx, "surface_curl_tensor_routes", &mut acc, |pn, patch, x, acc| {
        for (tn, t) in &fields {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch={pn}, field={tn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let d = f.curl_s_tensor(&j);
                    worst(surface_tensor_routes(&f, &j).iter().map(|c| rel(c, &d)))
                },
            );
        }
    });
    acc
}

fn surface_curl_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let fields = tensor_fields2(ctx);
    over_patches(ctx, "surface_curl_fd", &mut acc, |pn, patch, x, acc| {
        for (tn, t) in &fields {
            let r = (|| {
                let a = surf_frames(patch.as_ref(), &x, Deriv::Analytic)?;
                let n = surf_frames(patch.as_ref(), &x, Deriv::fd())?;
                Ok((
                    a,
                    n,
                    jet(t.as_ref(), &x, Deriv::Analytic)?,
                    jet(t.as_ref(), &x, Deriv::fd())?,
                ))
            })();
            acc.record(
                r,
                || format!("patch={pn}, field={tn}, point={}", fmt_pt(&x)),
                |(a, n, ja, jn)| {
                    let exact = a.curl_s_tensor(&ja);
                    worst(
                        surface_tensor_routes(&n, &jn)
                            .iter()
                            .chain(std::iter::once(&n.curl_s_tensor(&jn)))
                            .map(|c| rel(c, &exact)),
                    )
                },
            );
        }
        for (vn, v) in vector_fields2(ctx, patch) {
            let r = (|| {
                let a = surf_frames(patch.as_ref(), &x, Deriv::Analytic)?;
                let n = surf_frames(patch.as_ref(), &x, Deriv::fd())?;
                Ok((
                    a,
                    n,
                    jet(v.as_ref(), &x, Deriv::Analytic)?,
                    jet(v.as_ref(), &x, Deriv::fd())?,
                ))
            })();
            acc.record(
                r,
                || format!("patch={pn}, field={vn}, point={}", fmt_pt(&x)),
                |(a, n, ja, jn)| {
                    let exact = a.curl_s_vec(&ja);
                    worst([
                        relv(&n.curl_s_vec(&jn), &exact),
                        relv(&n.curl_s_vec_definition(&jn), &exact),
                        relv(&n.curl_s_vec_components(&jn), &exact),
                    ])
                },
            );
        }
    });
    acc
}

fn surface_derivative_reassembly(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let fields = tensor_fields2(ctx);
    over_patches(ctx, "surface_derivative_reassembly", &mut acc, |pn, patch, x, acc| {
        for (tn, t) in &fields {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch={pn}, field={tn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let re = f.tensor_derivative_reassembled(&j);
                    worst((0..2).map(|g| rel(&re[g], &j.d[g])))
                },
            );
        }
        for (vn, v) in vector_fields2(ctx, patch) {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch={pn}, field={vn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let re = f.vector_derivative_reassembled(&j);
                    worst((0..2).map(|g| relv(&re[g], &j.d[g])))
                },
            );
        }
    });
    acc
}

fn surface_fundamental_derivative(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let p = patch.clone();
        let afield = FnField::new(move |x: &[f64; 2]| match surf_frames(p.as_ref(), x, Deriv::Analytic) {
            Ok(f) => f.first_fundamental(),
            Err(_) => Mat3([[f64::NAN; 3]; 3]),
        });
        let mut rng = ctx.rng("surface_fundamental_derivative", c);
        for x in ctx.points(&patch.domain(), &mut rng) {
            let r =
                surf_frames(patch.as_ref(), &x, Deriv::Analytic).and_then(|f| Ok((f, jet(&afield, &x, Deriv::fd())?)));
            acc.record(
                r,
                || format!("patch={pn}, field=first_fundamental, point={}", fmt_pt(&x)),
                |(f, j)| {
                    // blocks from the exact value, compared with differences of 𝐚
                    let exact = Jet { value: j.value, d: j.d };
                    let re = f.tensor_derivative_reassembled(&exact);
                    let blocks = f.covariant_derivative_blocks(&exact);
                    let tangential = worst(
                        (0..2)
                            .flat_map(|g| blocks[g][..2].iter().flat_map(|r| r[..2].to_vec()).collect::<Vec<_>>())
                            .map(f64::abs),
                    );
                    worst([rel(&re[0], &j.d[0]), rel(&re[1], &j.d[1]), tangential])
                },
            );
        }
    }
    acc
}

fn surface_grad_div(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    over_patches(ctx, "surface_grad_div", &mut acc, |pn, patch, x, acc| {
        let p = patch.clone();
        let y0 = FnField::with_partial(move |x: &[f64; 2]| p.map(x), |_x: &[f64; 2], _i| Vec3::zero());
        let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic).map(|f| {
            let j = Jet {
                value: y0.value_at(&x),
                d: f.cov,
            };
            (f, j)
        });
        acc.record(
            r,
            || format!("patch={pn}, field=y0, point={}", fmt_pt(&x)),
            |(f, j)| worst([rel(&f.grad_s(&j), &f.first_fundamental()), (f.div_s(&j) - 2.0).abs()]),
        );
        for (vn, v) in vector_fields2(ctx, patch) {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch={pn}, field={vn}, point={}", fmt_pt(&x)),
                |(f, j)| (f.div_s(&j) - f.grad_s(&j).trace()).abs(),
            );
        }
    });
    acc
}

trait ValueAt<V> {
    fn value_at(&self, x: &[f64; 2]) -> V;
}

impl<V, F: crate::field::Field<f64, 2, Value = V>> ValueAt<V> for F {
    fn value_at(&self, x: &[f64; 2]) -> V {
        self.value(x)
    }
}

fn surface_curl_grad(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        // f = x₁²x₂ + sin x₂
        let df = |x: &[f64; 2]| [2.0 * x[0] * x[1], x[0] * x[0] + x[1].cos()];
        let p = patch.clone();
        let grad = FnField::new(move |x: &[f64; 2]| match surf_frames(p.as_ref(), x, Deriv::Analytic) {
            Ok(f) => {
                let d = df(x);
                f.contra[0].scale(d[0]) + f.contra[1].scale(d[1])
            }
            Err(_) => Vec3::new(f64::NAN, f64::NAN, f64::NAN),
        });
        let mut rng = ctx.rng("surface_curl_grad", c);
        for x in ctx.points(&patch.domain(), &mut rng) {
            let r =
                surf_frames(patch.as_ref(), &x, Deriv::Analytic).and_then(|f| Ok((f, jet(&grad, &x, Deriv::fd())?)));
            acc.record(
                r,
                || format!("patch={pn}, field=grad_s(x1^2 x2 + sin x2), point={}", fmt_pt(&x)),
                |(f, j)| relv(&f.curl_s_vec(&j), &f.curl_s_of_gradient(&df(&x))),
            );
        }
    }
    acc
}

fn surface_planar_reduction(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    let patch = ctx.catalog.patches["plane"].build::<f64>("").unwrap();
    let mut rng = ctx.rng("surface_planar_reduction", 0);
    let fields = tensor_fields2(ctx);
    for x in ctx.points(&patch.domain(), &mut rng) {
        for (vn, v) in vector_fields2(ctx, &patch) {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(v.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch=plane, field={vn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    let (d1, d2) = (j.d[0], j.d[1]);
                    let curl = Vec3::new(d2[2], -d1[2], d1[1] - d2[0]);
                    let grad = d1.outer(Vec3::unit(0)) + d2.outer(Vec3::unit(1));
                    worst([
                        relv(&f.curl_s_vec(&j), &curl),
                        rel(&f.grad_s(&j), &grad),
                        (f.div_s(&j) - d1[0] - d2[1]).abs(),
                    ])
                },
            );
        }
        for (tn, t) in &fields {
            let r = surf_frames(patch.as_ref(), &x, Deriv::Analytic)
                .and_then(|f| Ok((f, jet(t.as_ref(), &x, Deriv::Analytic)?)));
            acc.record(
                r,
                || format!("patch=plane, field={tn}, point={}", fmt_pt(&x)),
                |(f, j)| {
                    // rows of the Cartesian curl with ∂₃ = 0
                    let rows: [Vec3<f64>; 3] = std::array::from_fn(|s| {
                        let (d1, d2) = (j.d[0].row(s), j.d[1].row(s));
                        Vec3::new(d2[2], -d1[2], d1[1] - d2[0])
                    });
                    rel(&f.curl_s_tensor(&j), &Mat3::from_rows(rows))
                },
            );
        }
    }
    acc
}

// ---------------------------------------------------------------- shell

fn ctx2(s: &Shell, x: &[f64; 2]) -> String {
    format!("{}, point={}", s.label, fmt_pt(x))
}

fn shell_initial_rotation(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_patches(ctx, "shell_initial_rotation", &mut acc, |pn, patch, x, acc| {
        let r = default_initial_rotation(patch.as_ref(), &x, Deriv::Analytic)
            .and_then(|q| Ok((q, surf_frames(patch.as_ref(), &x, Deriv::Analytic)?)));
        acc.record(
            r,
            || format!("patch={pn}, point={}", fmt_pt(&x)),
            |(q, f)| {
                let q = *q.mat();
                let p = q.tmul_mat(&Mat3::from_cols(f.cov3()));
                worst([
                    q.orthogonality_defect(),
                    (q.det() - 1.0).abs(),
                    relv(&(q * Vec3::unit(2)), &f.normal),
                    rel(&p, &p.transpose()),
                ])
            },
        );
    });
    acc
}

fn shell_strain_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_shells(ctx, "shell_strain_routes", Deriv::Analytic, &mut acc, |s, x, acc| {
        acc.record(
            s.cfg.point(&x),
            || ctx2(s, &x),
            |p| rel(&p.strain_via_directors(), &p.strain()),
        );
    });
    acc
}

fn curvature_routes(p: &crate::shell::ShellPoint<f64>) -> [Mat3<f64>; 6] {
    let alt = p.axial_rates_alternate();
    [
        p.curvature_via_total(),
        p.curvature_via_directors(),
        p.curvature_rows(),
        crate::micro::assemble(&alt, &p.frames.contra),
        p.curvature_via_cross(),
        p.curvature_via_omega(),
    ]
}

fn shell_curvature_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_shells(ctx, "shell_curvature_routes", Deriv::Analytic, &mut acc, |s, x, acc| {
        acc.record(
            s.cfg.point(&x),
            || ctx2(s, &x),
            |p| {
                let k = p.curvature();
                let normal_col = (k * p.frames.normal).max_abs();
                worst(curvature_routes(&p).iter().map(|c| rel(c, &k)).chain([normal_col]))
            },
        );
    });
    acc
}

fn shell_curvature_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let exact = shells(ctx, Deriv::Analytic);
    over_shells(ctx, "shell_curvature_fd", Deriv::fd(), &mut acc, |s, x, acc| {
        let e = exact.iter().find(|e| e.label == s.label).expect("same catalog");
        let r = s.cfg.point(&x).and_then(|p| Ok((p, e.cfg.point(&x)?)));
        acc.record(
            r,
            || ctx2(s, &x),
            |(p, e)| {
                let k = e.curvature();
                worst(curvature_routes(&p).iter().chain([&p.curvature()]).map(|c| rel(c, &k)))
            },
        );
    });
    acc
}

/// `−(QₑᵀQₑ,α) × aᵅ`, with the sign flipped under [`Fault::ShellCrossSign`].
fn shell_dislocation_rates(ctx: &Ctx, p: &crate::shell::ShellPoint<f64>) -> Mat3<f64> {
    let d = p.dislocation_via_rates();
    if ctx.fault == Some(Fault::ShellCrossSign) {
        -d
    } else {
        d
    }
}

fn shell_dislocation_routes(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_shells(
        ctx,
        "shell_dislocation_routes",
        Deriv::Analytic,
        &mut acc,
        |s, x, acc| {
            acc.record(
                s.cfg.point(&x),
                || ctx2(s, &x),
                |p| {
                    let d = p.dislocation();
                    worst([
                        rel(&shell_dislocation_rates(ctx, &p), &d),
                        rel(&p.dislocation_via_directors(), &d),
                    ])
                },
            );
        },
    );
    acc
}

fn shell_dislocation_fd(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let exact = shells(ctx, Deriv::Analytic);
    over_shells(ctx, "shell_dislocation_fd", Deriv::fd(), &mut acc, |s, x, acc| {
        let e = exact.iter().find(|e| e.label == s.label).expect("same catalog");
        let r = s.cfg.point(&x).and_then(|p| Ok((p, e.cfg.point(&x)?)));
        acc.record(
            r,
            || ctx2(s, &x),
            |(p, e)| {
                let d = e.dislocation();
                worst([
                    rel(&p.dislocation(), &d),
                    rel(&shell_dislocation_rates(ctx, &p), &d),
                    rel(&p.dislocation_via_directors(), &d),
                ])
            },
        );
    });
    acc
}

fn shell_nye_check(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    for deriv in [Deriv::Analytic, Deriv::fd()] {
        over_shells(ctx, "shell_nye", deriv, &mut acc, |s, x, acc| {
            acc.record(
                s.cfg.point(&x),
                || ctx2(s, &x),
                |p| {
                    let m = p.measures();
                    let rep = shell_nye(&m.ke, &m.de);
                    if ctx.fault == Some(Fault::NyeTrace) {
                        (m.de + m.ke.transpose()).norm()
                    } else {
                        rep.residual.max(rep.inverse_residual)
                    }
                },
            );
        });
    }
    acc
}

fn shell_nye_bundle(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    for deriv in [Deriv::Analytic, Deriv::fd()] {
        over_shells(ctx, "shell_nye_bundle", deriv, &mut acc, |s, x, acc| {
            acc.record(
                s.cfg.point(&x),
                || ctx2(s, &x),
                |p| {
                    let m = p.measures();
                    shell_nye(&m.ke, &m.de).max_identity_residual()
                },
            );
        });
    }
    acc
}

fn shell_norm_bounds(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-9);
    for deriv in [Deriv::Analytic, Deriv::fd()] {
        over_shells(ctx, "shell_norm_bounds", deriv, &mut acc, |s, x, acc| {
            acc.record(
                s.cfg.point(&x),
                || ctx2(s, &x),
                |p| {
                    let m = p.measures();
                    shell_nye(&m.ke, &m.de).max_bound_excess().max(0.0)
                },
            );
        });
    }
    acc
}

fn shell_planar_split(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_shells(ctx, "shell_planar_split", Deriv::Analytic, &mut acc, |s, x, acc| {
        let r = s.cfg.point(&x).and_then(|p| {
            let m = p.measures();
            planar_split(&m.de, &m.ke, &p.frames)
        });
        acc.record(
            r,
            || ctx2(s, &x),
            |sp| {
                worst([
                    sp.reassembly,
                    sp.mixed_residual,
                    sp.planar_residual,
                    sp.normal_row_residual,
                ])
            },
        );
    });
    acc
}

fn shell_cofactor(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    over_shells(ctx, "shell_cofactor", Deriv::Analytic, &mut acc, |s, x, acc| {
        let r = s.cfg.point(&x).and_then(|p| {
            let m = p.measures();
            planar_cofactor_check(&m.ke, &m.de, &p.frames)
        });
        acc.record(r, || ctx2(s, &x), |c| c.planar.max(c.reassembly));
    });
    acc
}

fn shell_transform(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    over_patches(ctx, "shell_transform", &mut acc, |pn, patch, x, acc| {
        let mut rng = ctx.rng("shell_transform_values", (x[0] * 1e6) as usize);
        let mixed: [[f64; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
        acc.record(
            surf_frames(patch.as_ref(), &x, Deriv::Analytic),
            || format!("patch={pn}, planar S={mixed:?}, point={}", fmt_pt(&x)),
            |f| {
                let s = PlanarTensor::new(mixed, &f);
                let t = s.transform();
                let tt = t.transform().to_tensor();
                let a = f.first_fundamental();
                let formula = a.scale(s.trace()) - s.to_tensor().transpose();
                let mut rs = vec![
                    rel(&tt, &s.to_tensor()),
                    rel(&s.via_alternator(), &t.to_tensor()),
                    rel(&formula, &t.to_tensor()),
                    rel(&PlanarTensor::from_tensor(&a, &f).transform().to_tensor(), &a),
                    (t.to_tensor() * f.normal).max_abs(),
                    (t.to_tensor().tmul(f.normal)).max_abs(),
                ];
                if s.det2().abs() > 1e-6 {
                    match s.det_inverse_transpose() {
                        Some(m) => rs.push(rel(&m, &t.to_tensor())),
                        None => rs.push(f64::INFINITY),
                    }
                }
                worst(rs)
            },
        );
    });
    acc
}

fn shell_left_invariance(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-10);
    let mut rng = ctx.rng("shell_left_invariance", 0);
    let axis = [rng.gen_range(-1.0..1.0), 1.0, rng.gen_range(-1.0..1.0)];
    let angle = rng.gen_range(-PI..PI);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let m = ctx.catalog.shell_vector("stretch").unwrap().build2(patch, "").unwrap();
        for rn in ctx.catalog.rotations.keys() {
            let spec = ctx.catalog.shell_rotation(rn).unwrap();
            let plain = ShellConfig::new(
                patch.clone(),
                m.clone(),
                spec.build2::<f64>("").unwrap(),
                Deriv::Analytic,
            );
            let rotated_spec = RotationSpec::composed(vec![RotationSpec::constant(axis, angle), spec]);
            let rotated = ShellConfig::new(
                patch.clone(),
                m.clone(),
                rotated_spec.build2::<f64>("").unwrap(),
                Deriv::Analytic,
            );
            let mut prng = ctx.rng("shell_left_invariance", c + 1);
            for x in ctx.points(&patch.domain(), &mut prng) {
                let r = plain.point(&x).and_then(|p| Ok((p, rotated.point(&x)?)));
                acc.record(
                    r,
                    || format!("patch={pn}, rotation={rn}, point={}", fmt_pt(&x)),
                    |(p, q)| {
                        worst([
                            rel(&q.curvature(), &p.curvature()),
                            rel(&q.dislocation(), &p.dislocation()),
                        ])
                    },
                );
            }
        }
    }
    acc
}

fn shell_frame_indifference(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let mut rng = ctx.rng("shell_frame_indifference", c);
        let r = random_rotation(&mut rng);
        let shift = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let (p1, p2) = (patch.clone(), patch.clone());
        let m = Arc::new(FnField::with_partial(
            move |x: &[f64; 2]| r * p1.map(x) + shift,
            move |x: &[f64; 2], i| r * p2.tangent(x, i).unwrap_or(Vec3::new(f64::NAN, f64::NAN, f64::NAN)),
        ));
        let cfg = ShellConfig::new(patch.clone(), m, Arc::new(ConstField(r)), Deriv::Analytic);
        for x in ctx.points(&patch.domain(), &mut rng) {
            acc.record(
                cfg.point(&x),
                || format!("patch={pn}, rigid motion, point={}", fmt_pt(&x)),
                |p| {
                    let ms = p.measures();
                    worst([ms.ee.max_abs(), ms.ke.max_abs(), ms.de.max_abs()])
                },
            );
        }
    }
    acc
}

// ---------------------------------------------------------------- energy

fn random_params(rng: &mut ChaCha8Rng, p: f64) -> EnergyParams<f64> {
    let mut g = || rng.gen_range(0.2..3.0);
    EnergyParams {
        mu: g(),
        kappa: g(),
        mu_c: g(),
        lc: g(),
        a1: g(),
        a2: g(),
        a3: g(),
        p,
    }
}

fn energy_zero(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(0.0);
    let mut rng = ctx.rng("energy_zero", 0);
    for _ in 0..ctx.samples {
        let pexp = 2.0 + rng.gen_range(0.0..2.0);
        let p = random_params(&mut rng, pexp);
        acc.record(
            energy_3d(&Mat3::zero(), &Mat3::zero(), &p),
            || format!("params={p:?}"),
            f64::abs,
        );
        let mut p2 = p;
        p2.p = 2.0;
        acc.record(
            energy_shell(&Mat3::zero(), &Mat3::zero(), &p2),
            || format!("params={p2:?}"),
            f64::abs,
        );
    }
    acc
}

fn energy_positive(ctx: &Ctx) -> Acc {
    // residual counts non-positive values
    let mut acc = Acc::new(0.0);
    let mut rng = ctx.rng("energy_positive", 0);
    for k in 0..1000 {
        let pexp = 2.0 + rng.gen_range(0.0..2.0);
        let p = random_params(&mut rng, pexp);
        let mut e = random_mat(&mut rng);
        let mut d = random_mat(&mut rng);
        match k % 3 {
            0 => e = Mat3::zero(),
            1 => d = Mat3::zero(),
            _ => {}
        }
        acc.record(
            energy_3d(&e, &d, &p),
            || format!("E={e:?}, D={d:?}"),
            |w| if w > 0.0 { 0.0 } else { 1.0 },
        );
    }
    acc
}

fn energy_homogeneity(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    let mut rng = ctx.rng("energy_homogeneity", 0);
    for _ in 0..ctx.samples * 4 {
        let p = random_params(&mut rng, 2.0);
        let (e, d) = (random_mat(&mut rng), random_mat(&mut rng));
        for t in [0.5, 2.0] {
            let r = energy_shell(&e.scale(t), &d.scale(t), &p).and_then(|wt| Ok((wt, energy_shell(&e, &d, &p)?)));
            acc.record(
                r,
                || format!("t={t}, E={e:?}, D={d:?}"),
                |(wt, w)| (wt - t * t * w).abs() / w,
            );
        }
    }
    acc
}

fn energy_worked_values(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(0.0);
    let mut rng = ctx.rng("energy_worked_values", 0);
    for _ in 0..ctx.samples {
        let p = random_params(&mut rng, 2.0);
        let r = energy_3d(&Mat3::identity(), &Mat3::zero(), &p);
        acc.record(
            r,
            || format!("E=1, params={p:?}"),
            |w| rounding_excess(w, 4.5 * p.kappa),
        );
        let r = energy_3d(&skew_from_axial(Vec3::unit(2)), &Mat3::zero(), &p);
        acc.record(
            r,
            || format!("E=skew(e3), params={p:?}"),
            |w| rounding_excess(w, 2.0 * p.mu_c),
        );
    }
    let unit = EnergyParams::<f64>::unit();
    acc.record(
        energy_3d(&Mat3::identity(), &Mat3::zero(), &unit),
        || "E=1, unit params".into(),
        |w| (w - 4.5).abs(),
    );
    acc.record(
        energy_3d(&skew_from_axial(Vec3::unit(2)), &Mat3::zero(), &unit),
        || "E=skew(e3), unit params".into(),
        |w| (w - 2.0).abs(),
    );
    acc.record(
        energy_shell(&Mat3::zero(), &-Vec3::unit(0).outer(Vec3::unit(2)), &unit),
        || "D=-e1⊗e3, unit params".into(),
        |w| (w - 1.0).abs(),
    );
    acc
}

/// Absolute error beyond a few ulps of `exact`.
fn rounding_excess(w: f64, exact: f64) -> f64 {
    let err = (w - exact).abs();
    if err <= 4.0 * f64::EPSILON * exact.abs() {
        0.0
    } else {
        err
    }
}

fn energy_density_gradient(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-6);
    let mut rng = ctx.rng("energy_density_gradient", 0);
    for _ in 0..ctx.samples {
        for pexp in [2.0, 3.0] {
            let p = random_params(&mut rng, pexp);
            let (e, d) = (random_mat(&mut rng), random_mat(&mut rng));
            let (ge, gd) = energy_gradient(&e, &d, &p);
            let w = |e: &Mat3<f64>, d: &Mat3<f64>| energy_3d(e, d, &p).unwrap_or(f64::NAN);
            let h = 1e-6;
            let mut r: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let mut dp = Mat3::zero();
                    dp[(i, j)] = h;
                    let fe = (w(&(e + dp), &d) - w(&(e - dp), &d)) / (2.0 * h);
                    let fd = (w(&e, &(d + dp)) - w(&e, &(d - dp))) / (2.0 * h);
                    r = r.max((fe - ge[(i, j)]).abs() / 1f64.max(ge[(i, j)].abs()));
                    r = r.max((fd - gd[(i, j)]).abs() / 1f64.max(gd[(i, j)].abs()));
                }
            }
            acc.add(r, || format!("p={pexp}, E={e:?}, D={d:?}"));
        }
    }
    acc
}

fn energy_smooth_at_zero(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-8);
    let mut rng = ctx.rng("energy_smooth_at_zero", 0);
    for _ in 0..ctx.samples {
        let pexp = rng.gen_range(2.5..4.0);
        let p = random_params(&mut rng, pexp);
        let e = Mat3::zero();
        let dir = random_mat(&mut rng);
        let h = 1e-4;
        let w = |t: f64| energy_3d(&e, &dir.scale(t), &p).unwrap_or(f64::NAN);
        // the directional slope at D = 0 and the analytic gradient there both vanish
        let slope = (w(h) - w(-h)) / (2.0 * h);
        let (_, g0) = energy_gradient(&e, &Mat3::zero(), &p);
        acc.add(slope.abs().max(g0.max_abs()), || {
            format!("p={}, direction={dir:?}", p.p)
        });
    }
    acc
}

fn plate(
    n: usize,
    patch: Arc<dyn SurfacePatch<f64>>,
    seed: u64,
) -> Result<(DiscreteShell<f64>, crate::energy::ShellState<f64>)> {
    let shell = DiscreteShell::new(patch, n, n, EnergyParams::unit())?;
    let mut s = shell.reference_state();
    s.perturb_rotations(0.05, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for k in 0..s.m.len() {
        if !s.fixed_m[k] {
            s.m[k] += Vec3::new(
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.01..0.01),
            );
        }
    }
    Ok((shell, s))
}

fn energy_discrete_gradient(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-5);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let seed = ctx.rng("energy_discrete_gradient", c).gen::<u64>();
        let r = plate(4, patch.clone(), seed).and_then(|(shell, s)| {
            let (_, g) = shell.energy_and_gradient(&s)?;
            Ok((shell, s, g))
        });
        acc.record(
            r,
            || format!("patch={pn}, 4x4 grid, seed={seed}"),
            |(shell, s, g)| {
                let h = 1e-6;
                let e = |st: &crate::energy::ShellState<f64>| shell.total_energy(st).unwrap_or(f64::NAN);
                let gnorm = g.norm();
                let mut r: f64 = 0.0;
                for k in 0..s.m.len() {
                    for c in 0..3 {
                        if !s.fixed_m[k] {
                            let (mut a, mut b) = (s.clone(), s.clone());
                            a.m[k][c] += h;
                            b.m[k][c] -= h;
                            let fd = (e(&a) - e(&b)) / (2.0 * h);
                            r = r.max((fd - g.m[k][c]).abs() / gnorm.max(1e-12));
                        }
                        if !s.fixed_q[k] {
                            let t = Vec3::unit(c).scale(h);
                            let (mut a, mut b) = (s.clone(), s.clone());
                            a.q[k] = Quat::exp(t).mul(&s.q[k]);
                            b.q[k] = Quat::exp(-t).mul(&s.q[k]);
                            let fd = (e(&a) - e(&b)) / (2.0 * h);
                            r = r.max((fd - g.rot[k][c]).abs() / gnorm.max(1e-12));
                        }
                    }
                }
                r
            },
        );
    }
    acc
}

fn energy_frame_indifference(ctx: &Ctx) -> Acc {
    let mut acc = Acc::new(1e-12);
    for (c, (pn, patch)) in patches(ctx).iter().enumerate() {
        let mut rng = ctx.rng("energy_frame_indifference", c);
        let seed = rng.gen::<u64>();
        let r = plate(6, patch.clone(), seed);
        acc.record(
            r,
            || format!("patch={pn}, seed={seed}"),
            |(shell, s)| {
                let e0 = shell.total_energy(&s).unwrap_or(f64::NAN);
                let mut r: f64 = 0.0;
                for _ in 0..ctx.samples.min(10) {
                    let axis = Vec3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    let q = Quat::from_axis_angle(axis, rng.gen_range(-PI..PI));
                    let shift = Vec3::new(
                        rng.gen_range(-5.0..5.0),
                        rng.gen_range(-5.0..5.0),
                        rng.gen_range(-5.0..5.0),
                    );
                    let moved = s.rigid_motion(&q, shift);
                    let e1 = shell.total_energy(&moved).unwrap_or(f64::NAN);
                    r = r.max((e1 - e0).abs() / e0.abs());
                }
                if !(e0 > 0.0) {
                    r = f64::INFINITY;
                }
                r
            },
        );
    }
    acc
}

fn energy_descent(ctx: &Ctx) -> Acc {
    // residual: final / initial energy, failing also on a non-monotone trace
    let mut acc = Acc::new(1e-3);
    let patch = ctx.catalog.patches["plane"].build::<f64>("").unwrap();
    let seed = ctx.rng("energy_descent", 0).gen::<u64>();
    let r = plate(8, patch, seed).and_then(|(shell, s)| {
        let opts = MinimizeOptions {
            max_iter: 2000,
            grad_tol: 1e-8,
            seed,
        };
        minimize(&shell, &s, &opts)?.map_err(Error::from)
    });
    acc.record(
        r,
        || format!("plane, 8x8 grid, seed={seed}"),
        |rep| {
            if !rep.is_monotone() {
                f64::INFINITY
            } else {
                rep.final_energy() / rep.initial_energy()
            }
        },
    );
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes() {
        let r = run(Suite::All, 0, 1, None);
        assert!(r.passed);
        assert!(r.checks.is_empty());
    }

    #[test]
    fn names_are_unique_and_sorted() {
        let names = check_names(Suite::All);
        let mut dedup = names.clone();
        dedup.dedup();
        assert_eq!(names, dedup);
    }

    #[test]
    fn suites_parse() {
        for s in ["curl3d", "cosserat3d", "surface", "shell", "energy", "all"] {
            assert!(Suite::parse(s).is_some());
        }
        assert!(Suite::parse("everything").is_none());
        assert_eq!(Fault::parse("nye_trace"), Some(Fault::NyeTrace));
    }
}
