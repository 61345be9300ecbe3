//! Closed-form cases checked against finite differences taken here in the test.

use std::sync::Arc;

use cosserat_core::cosserat3d::Config3D;
use cosserat_core::curvilinear3d::{curl_vec, IdentityChart};
use cosserat_core::energy::{energy_shell, DiscreteShell, EnergyParams};
use cosserat_core::field::{jet, BoxDomain, ConstField, FnField};
use cosserat_core::shell::{default_initial_rotation, planar_split, ShellConfig};
use cosserat_core::surface::{surf_frames, Cylinder, Plane, Sphere, SurfacePatch};
use cosserat_core::tensor::{Mat3, Quat, Vec3};
use cosserat_core::{Deriv, Mat3d, Vec3d};

const H: f64 = 1e-5;

fn e(i: usize) -> Vec3d {
    Vec3::unit(i)
}

fn rot_z(t: f64) -> Mat3d {
    Quat::from_axis_angle(e(2), t).to_mat()
}

fn assert_close(a: &Mat3d, b: &Mat3d, tol: f64) {
    let d = (*a - *b).max_abs();
    assert!(d < tol, "{a:?} vs {b:?} (diff {d:e})");
}

/// Central difference of `f` in direction `i`.
fn fd<const D: usize, V>(f: impl Fn(&[f64; D]) -> V, x: &[f64; D], i: usize) -> V
where
    V: std::ops::Sub<Output = V> + Scale,
{
    let (mut p, mut m) = (*x, *x);
    p[i] += H;
    m[i] -= H;
    (f(&p) - f(&m)).scaled(0.5 / H)
}

trait Scale {
    fn scaled(self, s: f64) -> Self;
}

impl Scale for Vec3d {
    fn scaled(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Scale for Mat3d {
    fn scaled(self, s: f64) -> Self {
        self.scale(s)
    }
}

fn axl(w: &Mat3d) -> Vec3d {
    Vec3::new(
        0.5 * (w[(2, 1)] - w[(1, 2)]),
        0.5 * (w[(0, 2)] - w[(2, 0)]),
        0.5 * (w[(1, 0)] - w[(0, 1)]),
    )
}

fn identity_chart() -> Arc<IdentityChart<f64>> {
    Arc::new(IdentityChart::default())
}

fn twist_config() -> Config3D<f64> {
    let phi = Arc::new(FnField::new(|x: &[f64; 3]| Vec3::new(x[0], x[1], x[2])));
    let qe = Arc::new(FnField::new(|x: &[f64; 3]| rot_z(x[0])));
    Config3D::new(identity_chart(), phi, qe, Deriv::fd())
}

#[test]
fn rotation_field_curl_on_identity_chart() {
    let v = FnField::new(|x: &[f64; 3]| Vec3::new(-x[1], x[0], 0.0));
    let x = [0.4, 0.6, 0.5];
    // Cartesian curl from differences of the components
    let f = |x: &[f64; 3]| Vec3::new(-x[1], x[0], 0.0);
    let d: Vec<Vec3d> = (0..3).map(|i| fd(f, &x, i)).collect();
    let oracle = Vec3::new(d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]);
    assert!((oracle - Vec3::new(0.0, 0.0, 2.0)).max_abs() < 1e-8);
    let curl = curl_vec(&v, identity_chart().as_ref(), &x, Deriv::fd()).unwrap();
    assert!((curl - oracle).max_abs() < 1e-8, "{curl:?}");
}

#[test]
fn shear_deformation_gradient() {
    let shear = |x: &[f64; 3]| Vec3::new(x[0] + 0.3 * x[1], x[1], x[2]);
    let cfg = Config3D::new(
        identity_chart(),
        Arc::new(FnField::new(shear)),
        Arc::new(ConstField(Mat3::identity())),
        Deriv::fd(),
    );
    let x = [0.5, 0.5, 0.5];
    let cols: Vec<Vec3d> = (0..3).map(|i| fd(shear, &x, i)).collect();
    let oracle = Mat3::from_cols([cols[0], cols[1], cols[2]]);
    let expected = Mat3::identity() + e(0).outer(e(1)).scale(0.3);
    assert_close(&oracle, &expected, 1e-9);
    let p = cfg.point(&x).unwrap();
    assert_close(&p.deformation_gradient(), &oracle, 1e-8);
}

#[test]
fn twist_about_e3_wryness_dislocation_and_omega() {
    let x = [0.3, 0.4, 0.5];
    let q = |x: &[f64; 3]| rot_z(x[0]);
    let rates: Vec<Vec3d> = (0..3).map(|i| axl(&q(&x).tmul_mat(&fd(q, &x, i)))).collect();
    // Γ = axl(QᵀQ,ᵢ) ⊗ eᵢ on the identity chart
    let gamma_oracle = (0..3).fold(Mat3::zero(), |acc, i| acc + rates[i].outer(e(i)));
    assert_close(&gamma_oracle, &e(2).outer(e(0)), 1e-9);

    let p = twist_config().point(&x).unwrap();
    assert_close(&p.wryness(), &gamma_oracle, 1e-8);
    assert_close(&p.dislocation(), &-e(0).outer(e(2)), 1e-8);

    // Qₑ,₁ = ω₁ × Qₑ
    let w = p.omegas();
    let dq1 = fd(q, &x, 0);
    assert_close(&dq1, &w[0].cross_tensor(&q(&x)), 1e-8);
    assert!((w[0] - e(2)).max_abs() < 1e-8);
    assert!(w[1].max_abs() < 1e-8 && w[2].max_abs() < 1e-8);
}

#[test]
fn plane_surface_curl_of_rotation_field() {
    let plane = Plane::<f64>::default();
    let v = FnField::new(|x: &[f64; 2]| Vec3::new(-x[1], x[0], 0.0));
    let x = [0.3, 0.7];
    let f = surf_frames(&plane, &x, Deriv::fd()).unwrap();
    let j = jet(&v, &x, Deriv::fd()).unwrap();
    let oracle = Vec3::new(0.0, 0.0, j.d[0][1] - j.d[1][0]);
    assert!((f.curl_s_vec(&j) - oracle).max_abs() < 1e-9);
    assert!((oracle - e(2).scale(2.0)).max_abs() < 1e-9);
}

#[test]
fn cylinder_fundamental_forms_by_differences() {
    let cyl = Cylinder::<f64>::default();
    let x = [0.8, 0.5];
    let f = surf_frames(&cyl, &x, Deriv::Analytic).unwrap();
    let map = |x: &[f64; 2]| cyl.map(x);
    let a1 = fd(map, &x, 0);
    let a2 = fd(map, &x, 1);
    let normal = |x: &[f64; 2]| {
        let (u, v) = (fd(map, x, 0), fd(map, x, 1));
        let n = u.cross(v);
        n.scale(1.0 / n.norm())
    };
    let n = normal(&x);
    assert!((n.dot(cyl.map(&x)) - 2.0).abs() < 1e-6, "normal points outward");
    let b11 = -fd(normal, &x, 0).dot(a1);
    assert!((a1.dot(a1) - 4.0).abs() < 1e-8);
    assert!((a1.cross(a2).norm() - 2.0).abs() < 1e-8);
    assert!((b11 + 2.0).abs() < 1e-4);
    assert!((f.b_cov[0][0] - b11).abs() < 1e-4);
    assert!(f.b_cov[0][1].abs() < 1e-12 && f.b_cov[1][1].abs() < 1e-12);
}

#[test]
fn sphere_second_form_proportional_to_first() {
    let s = Sphere::<f64>::default();
    let f = surf_frames(&s, &[1.0, 0.4], Deriv::fd()).unwrap();
    let a = f.first_fundamental();
    let b = f.second_fundamental();
    // outward normal: b = −a / R
    assert_close(&b, &-a, 1e-6);
}

#[test]
fn surface_gradient_of_midsurface_is_first_fundamental_tensor() {
    let cyl: Arc<dyn SurfacePatch<f64>> = Arc::new(Cylinder::default());
    let c = cyl.clone();
    let y0 = FnField::new(move |x: &[f64; 2]| c.map(x));
    let x = [1.1, 0.3];
    let f = surf_frames(cyl.as_ref(), &x, Deriv::Analytic).unwrap();
    let j = jet(&y0, &x, Deriv::fd()).unwrap();
    assert_close(&f.grad_s(&j), &f.first_fundamental(), 1e-8);
}

#[test]
fn initial_rotation_on_cylinder_seam() {
    let cyl = Cylinder {
        radius: 2.0,
        domain: BoxDomain::new([-1.0, 0.0], [1.0, 1.0]),
    };
    let q0 = default_initial_rotation(&cyl, &[0.0, 0.5], Deriv::Analytic).unwrap();
    let q: Mat3d = *q0.mat();
    assert!((q * e(2) - e(0)).max_abs() < 1e-12);
    assert!(q.orthogonality_defect() < 1e-12);
    assert!((q.det() - 1.0).abs() < 1e-12);
}

#[test]
fn plane_twist_shell_measures_and_split() {
    let plane: Arc<dyn SurfacePatch<f64>> = Arc::new(Plane::default());
    let p2 = plane.clone();
    let m = Arc::new(FnField::new(move |x: &[f64; 2]| p2.map(x)));
    let qe = Arc::new(FnField::new(|x: &[f64; 2]| rot_z(x[0])));
    let cfg = ShellConfig::new(plane, m, qe, Deriv::fd());
    let x = [0.3, 0.3];
    let p = cfg.point(&x).unwrap();

    let q = |x: &[f64; 2]| rot_z(x[0]);
    let k_oracle = (0..2).fold(Mat3::zero(), |acc, a| {
        acc + axl(&q(&x).tmul_mat(&fd(q, &x, a))).outer(e(a))
    });
    assert_close(&k_oracle, &e(2).outer(e(0)), 1e-9);

    let ms = p.measures();
    assert_close(&ms.ke, &k_oracle, 1e-8);
    assert_close(&ms.de, &-e(0).outer(e(2)), 1e-8);

    let split = planar_split(&ms.de, &ms.ke, &p.frames).unwrap();
    assert!(split.d_planar.max_abs() < 1e-8);
    assert!((split.d_mixed[0] + 1.0).abs() < 1e-8);
    assert!((split.k_normal[0] - 1.0).abs() < 1e-8);
    assert!(split.d_trace_part.max_abs() < 1e-8);

    let w = energy_shell(&Mat3::zero(), &ms.de, &EnergyParams::unit()).unwrap();
    assert!((w - 1.0).abs() < 1e-7);
}

#[test]
fn discrete_energy_of_rigid_motions_and_perturbations() {
    let plane: Arc<dyn SurfacePatch<f64>> = Arc::new(Plane::default());
    let shell = DiscreteShell::new(plane, 8, 8, EnergyParams::unit()).unwrap();
    let s0 = shell.reference_state();
    let q = Quat::from_axis_angle(Vec3::new(1.0, -2.0, 0.5), 1.3);
    let moved = s0.rigid_motion(&q, Vec3::new(3.0, -1.0, 2.0));
    // squared strains of O(1e-16) give energies near 1e-30
    assert!(shell.total_energy(&moved).unwrap() < 1e-20);
    for seed in 0..10 {
        let mut s = shell.reference_state();
        s.perturb_rotations(0.05, seed);
        assert!(shell.total_energy(&s).unwrap() > 0.0);
    }
}
