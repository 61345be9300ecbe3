use std::sync::Arc;

use cosserat_core::catalog::{Catalog, RotationSpec};
use cosserat_core::cosserat3d::{nye_check, Config3D};
use cosserat_core::energy::{energy_3d, energy_shell, DiscreteShell, EnergyParams};
use cosserat_core::micro::{nye_from_wryness, wryness_from_nye};
use cosserat_core::shell::{shell_nye, PlanarTensor, ShellConfig};
use cosserat_core::surface::{surf_frames, Sphere};
use cosserat_core::tensor::{polar_factor, Mat3, Quat, Vec3};
use cosserat_core::{Deriv, Mat3d};
use proptest::prelude::*;

fn arb_mat() -> impl Strategy<Value = Mat3d> {
    prop::array::uniform3(prop::array::uniform3(-2.0..2.0f64)).prop_map(Mat3)
}

fn arb_axis() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("nonzero axis", |a| a.iter().map(|c| c * c).sum::<f64>() > 1e-2)
}

fn arb_params() -> impl Strategy<Value = EnergyParams<f64>> {
    (prop::array::uniform7(0.1..5.0f64), 2.0..4.0f64).prop_map(|(c, p)| EnergyParams {
        mu: c[0],
        kappa: c[1],
        mu_c: c[2],
        lc: c[3],
        a1: c[4],
        a2: c[5],
        a3: c[6],
        p,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nye_relation_is_an_involutive_pair(g in arb_mat()) {
        let d = nye_from_wryness(&g);
        prop_assert!((wryness_from_nye(&d) - g).max_abs() < 1e-13);
        let (r1, r2) = nye_check(&g, &d);
        prop_assert!(r1 < 1e-13 && r2 < 1e-13);
        prop_assert!((d.trace() - 2.0 * g.trace()).abs() < 1e-13);
    }

    #[test]
    fn polar_factor_is_a_rotation_with_spd_stretch(f in arb_mat()) {
        prop_assume!(f.det() > 1e-2);
        let r = polar_factor(&f).unwrap();
        let q = *r.mat();
        prop_assert!(q.orthogonality_defect() < 1e-12);
        let u = q.tmul_mat(&f);
        prop_assert!((u - u.transpose()).max_abs() < 1e-9);
        // symmetric positive definite via leading minors
        let m1 = u[(0, 0)];
        let m2 = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        prop_assert!(m1 > 0.0 && m2 > 0.0 && u.det() > 0.0);
    }

    #[test]
    fn energy_is_positive_off_zero(p in arb_params(), e in arb_mat(), d in arb_mat()) {
        prop_assume!(e.max_abs() > 1e-3 || d.max_abs() > 1e-3);
        prop_assert!(energy_3d(&e, &d, &p).unwrap() > 0.0);
        prop_assert_eq!(energy_3d(&Mat3::zero(), &Mat3::zero(), &p).unwrap(), 0.0);
    }

    #[test]
    fn shell_energy_is_quadratically_homogeneous(mut p in arb_params(), e in arb_mat(), d in arb_mat(), t in 0.1..3.0f64) {
        p.p = 2.0;
        let w = energy_shell(&e, &d, &p).unwrap();
        let wt = energy_shell(&e.scale(t), &d.scale(t), &p).unwrap();
        prop_assert!((wt - t * t * w).abs() <= 1e-12 * wt.max(1.0));
    }

    #[test]
    fn cofactor_map_on_sphere(s in prop::array::uniform2(prop::array::uniform2(-2.0..2.0f64)), u in 0.3..2.8f64, v in -0.9..0.9f64) {
        let f = surf_frames(&Sphere::default(), &[u, v], Deriv::Analytic).unwrap();
        let s = PlanarTensor::new(s, &f);
        let t = s.transform();
        prop_assert!((t.transform().to_tensor() - s.to_tensor()).max_abs() < 1e-10);
        prop_assert!((s.via_alternator() - t.to_tensor()).max_abs() < 1e-10);
        if s.det2().abs() > 1e-6 {
            let m = s.det_inverse_transpose().unwrap();
            prop_assert!((m - t.to_tensor()).max_abs() < 1e-8 * (1.0 + m.max_abs()));
        }
    }

    #[test]
    fn body_nye_holds_for_random_rotation_families(axis in arb_axis(), c in -2.0..2.0f64, coord in 0usize..3, angle in -3.0..3.0f64) {
        let cat = Catalog::builtin();
        let chart = cat.charts["perturbed"].build::<f64>("").unwrap();
        let phi = cat.vectors["swirl"].build3(&chart, "").unwrap();
        let spec = RotationSpec::composed(vec![
            RotationSpec::constant(axis, angle),
            RotationSpec::axis_angle([axis[1], axis[2], axis[0]], cosserat_core::catalog::AngleSpec::linear(c, coord)),
        ]);
        let cfg = Config3D::new(chart, phi, spec.build3::<f64>("").unwrap(), Deriv::Analytic);
        let p = cfg.point(&[0.4, 0.5, 0.6]).unwrap();
        let (r1, r2) = nye_check(&p.wryness(), &p.dislocation());
        prop_assert!(r1 < 1e-10 && r2 < 1e-10);
    }

    #[test]
    fn shell_nye_holds_for_random_rotation_families(axis in arb_axis(), c in -2.0..2.0f64, coord in 0usize..2) {
        let cat = Catalog::builtin();
        let patch = cat.patches["graph"].build::<f64>("").unwrap();
        let m = cat.shell_vector("stretch").unwrap().build2(&patch, "").unwrap();
        let spec = RotationSpec::axis_angle(axis, cosserat_core::catalog::AngleSpec::linear(c, coord));
        let cfg = ShellConfig::new(patch, m, spec.build2::<f64>("").unwrap(), Deriv::Analytic);
        let p = cfg.point(&[0.4, 0.6]).unwrap();
        let ms = p.measures();
        let rep = shell_nye(&ms.ke, &ms.de);
        prop_assert!(rep.residual < 1e-10 && rep.max_identity_residual() < 1e-10);
        prop_assert!(rep.max_bound_excess() <= 1e-9);
    }

    #[test]
    fn discrete_energy_is_frame_indifferent(axis in arb_axis(), angle in -3.0..3.0f64, shift in prop::array::uniform3(-5.0..5.0f64), seed in 0u64..1000) {
        let cat = Catalog::builtin();
        let patch = cat.patches["cylinder"].build::<f64>("").unwrap();
        let shell = DiscreteShell::new(patch, 5, 5, EnergyParams::unit()).unwrap();
        let mut s = shell.reference_state();
        s.perturb_rotations(0.1, seed);
        let e0 = shell.total_energy(&s).unwrap();
        let q = Quat::from_axis_angle(Vec3(axis), angle);
        let e1 = shell.total_energy(&s.rigid_motion(&q, Vec3(shift))).unwrap();
        prop_assert!(e0 > 0.0);
        prop_assert!((e1 - e0).abs() <= 1e-12 * e0);
    }
}

#[test]
fn shared_catalog_fields_are_thread_safe() {
    let cat = Catalog::builtin();
    let chart = cat.charts["cylindrical"].build::<f64>("").unwrap();
    let phi = cat.vectors["stretch"].build3(&chart, "").unwrap();
    let qe = cat.rotations["composed"].build3::<f64>("").unwrap();
    let cfg = Arc::new(Config3D::new(chart, phi, qe, Deriv::Analytic));
    let serial = cfg.point(&[1.5, 0.5, 0.5]).unwrap().wryness();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let cfg = cfg.clone();
            std::thread::spawn(move || cfg.point(&[1.5, 0.5, 0.5]).unwrap().wryness())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), serial);
    }
}
