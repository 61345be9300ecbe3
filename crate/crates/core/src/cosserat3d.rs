//! Cosserat strain, wryness and dislocation density of a three-dimensional body.

use std::sync::Arc;

use crate::curvilinear3d::{frames_at, Chart3, ChartFrames};
use crate::error::Result;
use crate::field::{check_rotation, jet, rotation_drift_tol, ConstField, Deriv, Jet, RotationField3, VectorField3};
use crate::micro::{self, MicroJet};
use crate::scalar::{eps3, Real};
use crate::tensor::{Mat3, Vec3};

/// A deformed Cosserat body: chart `Θ`, deformation `φ`, microrotations `Qₑ` and `Q₀`.
#[derive(Clone)]
pub struct Config3D<T: Real> {
    pub chart: Arc<dyn Chart3<T>>,
    pub phi: VectorField3<T>,
    pub qe: RotationField3<T>,
    pub q0: RotationField3<T>,
    pub deriv: Deriv<T>,
}

impl<T: Real> Config3D<T> {
    /// Configuration with `Q₀ = 1₃`.
    pub fn new(chart: Arc<dyn Chart3<T>>, phi: VectorField3<T>, qe: RotationField3<T>, deriv: Deriv<T>) -> Self {
        Config3D {
            chart,
            phi,
            qe,
            q0: Arc::new(ConstField(Mat3::identity())),
            deriv,
        }
    }

    pub fn with_initial_rotation(mut self, q0: RotationField3<T>) -> Self {
        self.q0 = q0;
        self
    }
}

/// Everything needed to evaluate the measures at one point.
#[derive(Clone, Copy, Debug)]
pub struct Point3<T> {
    pub frames: ChartFrames<T>,
    pub phi: Jet<Vec3<T>, 3>,
    pub micro: MicroJet<T, 3>,
}

impl<T: Real> Config3D<T> {
    pub fn point(&self, x: &[T; 3]) -> Result<Point3<T>> {
        let frames = frames_at(self.chart.as_ref(), x, self.deriv)?;
        let phi = jet(self.phi.as_ref(), x, self.deriv)?;
        let qe = jet(self.qe.as_ref(), x, self.deriv)?;
        let q0 = jet(self.q0.as_ref(), x, self.deriv)?;
        let tol = rotation_drift_tol::<T>();
        check_rotation(&qe.value, tol)?;
        check_rotation(&q0.value, tol)?;
        Ok(Point3 {
            frames,
            phi,
            micro: MicroJet { qe, q0 },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measures3D<T> {
    pub f: Mat3<T>,
    pub ue: Mat3<T>,
    pub ee: Mat3<T>,
    pub wryness: Mat3<T>,
    pub dislocation: Mat3<T>,
    pub omega: [Vec3<T>; 3],
}

impl<T: Real> Point3<T> {
    /// `F = φ,ᵢ ⊗ gⁱ`.
    pub fn deformation_gradient(&self) -> Mat3<T> {
        micro::assemble(&self.phi.d, &self.frames.contra)
    }

    /// `(Ūₑ, Ēₑ) = (QₑᵀF, QₑᵀF − 1₃)`.
    pub fn strain(&self) -> (Mat3<T>, Mat3<T>) {
        let ue = self.micro.qe.value.tmul_mat(&self.deformation_gradient());
        (ue, ue - Mat3::identity())
    }

    /// `Ēₑ = (φ,ⱼ·dᵢ − gⱼ·d⁰ᵢ) d⁰ᵢ ⊗ gʲ`.
    pub fn strain_via_directors(&self) -> Mat3<T> {
        let d = self.micro.directors();
        let d0 = self.micro.reference_directors();
        let mut out = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let c = self.phi.d[j].dot(d[i]) - self.frames.cov[j].dot(d0[i]);
                out += d0[i].outer(self.frames.contra[j]).scale(c);
            }
        }
        out
    }

    /// `Γ = axl(QₑᵀQₑ,ᵢ) ⊗ gⁱ`.
    pub fn wryness(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates(), &self.frames.contra)
    }

    /// `Γ = Q₀[axl(R̄ᵀR̄,ᵢ) − axl(Q₀ᵀQ₀,ᵢ)] ⊗ gⁱ`.
    pub fn wryness_via_total(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_total(), &self.frames.contra)
    }

    /// Director formula `½ e_{jks}(dⱼ,ᵢ·dₖ − d⁰ⱼ,ᵢ·d⁰ₖ) d⁰ₛ ⊗ gⁱ`.
    pub fn wryness_via_directors(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_directors(), &self.frames.contra)
    }

    /// `Γ = Qₑᵀωᵢ ⊗ gⁱ` with `ωᵢ` from the director formula.
    pub fn wryness_via_omegas(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_omegas(), &self.frames.contra)
    }

    /// `D̄ₑ = Qₑᵀ Curl Qₑ`.
    pub fn dislocation(&self) -> Mat3<T> {
        self.micro.qe.value.tmul_mat(&self.frames.curl_tensor(&self.micro.qe))
    }

    /// `D̄ₑ = −(QₑᵀQₑ,ₖ) × gᵏ`.
    pub fn dislocation_via_rates(&self) -> Mat3<T> {
        micro::dislocation_from_rates(&self.micro.rates(), &self.frames.contra)
    }

    /// Component form in the reference director frame.
    pub fn dislocation_via_directors(&self) -> Mat3<T> {
        micro::dislocation_via_directors(&self.micro, &self.frames.contra)
    }

    pub fn omegas(&self) -> [Vec3<T>; 3] {
        self.micro.omegas()
    }

    pub fn omegas_via_directors(&self) -> [Vec3<T>; 3] {
        self.micro.omegas_via_directors()
    }

    pub fn measures(&self) -> Measures3D<T> {
        let (ue, ee) = self.strain();
        Measures3D {
            f: self.deformation_gradient(),
            ue,
            ee,
            wryness: self.wryness(),
            dislocation: self.dislocation(),
            omega: self.omegas(),
        }
    }
}

pub fn deformation_gradient<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.deformation_gradient())
}

pub fn strain_measures<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<(Mat3<T>, Mat3<T>)> {
    Ok(cfg.point(x)?.strain())
}

pub fn wryness<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.wryness())
}

pub fn dislocation_density<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.dislocation())
}

pub fn omega_vectors<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<[Vec3<T>; 3]> {
    Ok(cfg.point(x)?.omegas())
}

pub fn measures<T: Real>(cfg: &Config3D<T>, x: &[T; 3]) -> Result<Measures3D<T>> {
    Ok(cfg.point(x)?.measures())
}

pub use crate::micro::{nye_from_wryness, wryness_from_nye};

/// `(‖D + Γᵀ − tr(Γ)1₃‖, ‖Γ + Dᵀ − ½tr(D)1₃‖)`.
pub fn nye_check<T: Real>(gamma: &Mat3<T>, d: &Mat3<T>) -> (T, T) {
    micro::nye_residuals(gamma, d)
}

/// Cartesian wryness `Γ = ½ e_{iks}(dₖ,ⱼ·dₛ) eᵢ ⊗ eⱼ`; partials along Cartesian axes, `d⁰ᵢ = eᵢ`.
pub fn wryness_cartesian<T: Real>(d: &[Vec3<T>; 3], dd: &[[Vec3<T>; 3]; 3]) -> Mat3<T> {
    let mut out = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for s in 0..3 {
                    let e = eps3::<T>(i, k, s);
                    if e != T::zero() {
                        out[(i, j)] += T::half() * e * dd[j][k].dot(d[s]);
                    }
                }
            }
        }
    }
    out
}

/// Cartesian dislocation density `D = e_{ijk}(dⱼ,ᵢ·dₛ) eₛ ⊗ eₖ`.
pub fn dislocation_cartesian<T: Real>(d: &[Vec3<T>; 3], dd: &[[Vec3<T>; 3]; 3]) -> Mat3<T> {
    let mut out = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = eps3::<T>(i, j, k);
                if e == T::zero() {
                    continue;
                }
                for s in 0..3 {
                    out[(s, k)] += e * dd[i][j].dot(d[s]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvilinear3d::IdentityChart;
    use crate::field::FnField;
    use crate::tensor::Rot3;

    fn rot_e3(angle: f64) -> Mat3<f64> {
        *Rot3::from_axis_angle(Vec3::unit(2), angle).mat()
    }

    fn twist_config(deriv: Deriv<f64>) -> Config3D<f64> {
        let phi = FnField::with_partial(|x: &[f64; 3]| Vec3(*x), |_x: &[f64; 3], i| Vec3::unit(i));
        let qe = FnField::with_partial(
            |x: &[f64; 3]| rot_e3(x[0]),
            |x: &[f64; 3], i| {
                if i == 0 {
                    Vec3::unit(2).cross_tensor(&rot_e3(x[0]))
                } else {
                    Mat3::zero()
                }
            },
        );
        Config3D::new(Arc::new(IdentityChart::default()), Arc::new(phi), Arc::new(qe), deriv)
    }

    #[test]
    fn twist_about_e3() {
        for deriv in [Deriv::Analytic, Deriv::fd()] {
            let cfg = twist_config(deriv);
            let x = [0.4, 0.5, 0.6];
            let p = cfg.point(&x).unwrap();
            let gamma = p.wryness();
            let expect = Vec3::unit(2).outer(Vec3::unit(0));
            assert!((gamma - expect).max_abs() < 1e-9);
            let d = p.dislocation();
            assert!((d + Vec3::unit(0).outer(Vec3::unit(2))).max_abs() < 1e-9);
            let om = p.omegas();
            assert!((om[0] - Vec3::unit(2)).max_abs() < 1e-9);
            assert!(om[1].max_abs() < 1e-9 && om[2].max_abs() < 1e-9);
            let (r1, r2) = nye_check(&gamma, &d);
            assert!(r1 < 1e-9 && r2 < 1e-9);
        }
    }

    #[test]
    fn identity_deformation_is_unstrained() {
        let cfg = twist_config(Deriv::Analytic);
        let p = cfg.point(&[0.0, 0.5, 0.5]).unwrap();
        assert_eq!(p.deformation_gradient(), Mat3::identity());
        let (ue, ee) = p.strain();
        assert_eq!(ue, Mat3::identity());
        assert!(ee.max_abs() < 1e-15);
    }
}
