//! The kernel instantiated at `f32` agrees with the `f64` build.

use cosserat_core::catalog::Catalog;
use cosserat_core::cosserat3d::{nye_check, Config3D};
use cosserat_core::energy::{energy_3d, EnergyParams};
use cosserat_core::shell::{shell_nye, ShellConfig};
use cosserat_core::tensor::{skew_from_axial, Mat3, Vec3};
use cosserat_core::{Deriv, Real};

fn body_wryness<T: Real>(x: [f64; 3]) -> (Mat3<T>, Mat3<T>) {
    let cat = Catalog::builtin();
    let chart = cat.charts["cylindrical"].build::<T>("").unwrap();
    let phi = cat.vectors["swirl"].build3(&chart, "").unwrap();
    let qe = cat.rotations["composed"].build3::<T>("").unwrap();
    let cfg = Config3D::new(chart, phi, qe, Deriv::Analytic);
    let p = cfg.point(&x.map(T::lit)).unwrap();
    (p.wryness(), p.dislocation())
}

fn shell_pair<T: Real>(x: [f64; 2]) -> (Mat3<T>, Mat3<T>) {
    let cat = Catalog::builtin();
    let patch = cat.patches["sphere"].build::<T>("").unwrap();
    let m = cat.shell_vector("stretch").unwrap().build2(&patch, "").unwrap();
    let qe = cat.shell_rotation("sine").unwrap().build2::<T>("").unwrap();
    let cfg = ShellConfig::new(patch, m, qe, Deriv::Analytic);
    let ms = cfg.point(&x.map(T::lit)).unwrap().measures();
    (ms.ke, ms.de)
}

fn widen(m: &Mat3<f32>) -> Mat3<f64> {
    Mat3(m.0.map(|r| r.map(f64::from)))
}

#[test]
fn body_measures_single_precision() {
    let x = [1.4, 0.7, 0.3];
    let (g32, d32) = body_wryness::<f32>(x);
    let (g64, d64) = body_wryness::<f64>(x);
    assert!((widen(&g32) - g64).max_abs() < 1e-5);
    assert!((widen(&d32) - d64).max_abs() < 1e-5);
    let (r1, r2) = nye_check(&g32, &d32);
    assert!(r1 < 1e-5 && r2 < 1e-5, "{r1} {r2}");
}

#[test]
fn shell_measures_single_precision() {
    let x = [1.2, 0.3];
    let (k32, d32) = shell_pair::<f32>(x);
    let (k64, d64) = shell_pair::<f64>(x);
    assert!((widen(&k32) - k64).max_abs() < 1e-5);
    assert!((widen(&d32) - d64).max_abs() < 1e-5);
    assert!(shell_nye(&k32, &d32).residual < 1e-5);
}

#[test]
fn energy_worked_values_single_precision() {
    let p = EnergyParams::<f32>::unit();
    assert_eq!(energy_3d(&Mat3::identity(), &Mat3::zero(), &p).unwrap(), 4.5f32);
    assert_eq!(
        energy_3d(&skew_from_axial(Vec3::<f32>::unit(2)), &Mat3::zero(), &p).unwrap(),
        2.0f32
    );
}
