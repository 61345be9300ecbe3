//! Microrotation kinematics shared by the body and the shell.
//!
//! A [`MicroJet`] holds the elastic microrotation `Qₑ`, the initial
//! microrotation `Q₀` and their partials along `D` parameters. Directors are
//! `dⱼ = QₑQ₀eⱼ` and `d⁰ⱼ = Q₀eⱼ`.

use crate::field::Jet;
use crate::scalar::{eps3, Real};
use crate::tensor::{axl_of_skew_part, Mat3, Vec3};

#[derive(Clone, Copy, Debug)]
pub struct MicroJet<T, const D: usize> {
    pub qe: Jet<Mat3<T>, D>,
    pub q0: Jet<Mat3<T>, D>,
}

impl<T: Real, const D: usize> MicroJet<T, D> {
    /// Total microrotation `R̄ = QₑQ₀`.
    pub fn total(&self) -> Mat3<T> {
        self.qe.value * self.q0.value
    }

    /// `R̄,ᵢ = Qₑ,ᵢQ₀ + QₑQ₀,ᵢ`.
    pub fn total_partial(&self, i: usize) -> Mat3<T> {
        self.qe.d[i] * self.q0.value + self.qe.value * self.q0.d[i]
    }

    pub fn directors(&self) -> [Vec3<T>; 3] {
        let r = self.total();
        std::array::from_fn(|j| r.col(j))
    }

    pub fn reference_directors(&self) -> [Vec3<T>; 3] {
        std::array::from_fn(|j| self.q0.value.col(j))
    }

    /// `[i][j] = dⱼ,ᵢ`.
    pub fn director_partials(&self) -> [[Vec3<T>; 3]; D] {
        std::array::from_fn(|i| {
            let dr = self.total_partial(i);
            std::array::from_fn(|j| dr.col(j))
        })
    }

    /// `[i][j] = d⁰ⱼ,ᵢ`.
    pub fn reference_director_partials(&self) -> [[Vec3<T>; 3]; D] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.q0.d[i].col(j)))
    }

    /// `QₑᵀQₑ,ᵢ` for each parameter.
    pub fn rates(&self) -> [Mat3<T>; D] {
        std::array::from_fn(|i| self.qe.value.tmul_mat(&self.qe.d[i]))
    }

    /// Largest symmetric part of `QₑᵀQₑ,ᵢ`; zero for an exact rotation field.
    pub fn rate_asymmetry(&self) -> T {
        self.rates().iter().fold(T::zero(), |m, r| m.max(r.sym().max_abs()))
    }

    /// `axl(QₑᵀQₑ,ᵢ)`.
    pub fn axial_rates(&self) -> [Vec3<T>; D] {
        self.rates().map(|r| axl_of_skew_part(&r))
    }

    /// `Q₀[axl(R̄ᵀR̄,ᵢ) − axl(Q₀ᵀQ₀,ᵢ)]`.
    pub fn axial_rates_via_total(&self) -> [Vec3<T>; D] {
        let r = self.total();
        std::array::from_fn(|i| {
            let a = axl_of_skew_part(&r.tmul_mat(&self.total_partial(i)));
            let b = axl_of_skew_part(&self.q0.value.tmul_mat(&self.q0.d[i]));
            self.q0.value * (a - b)
        })
    }

    /// `½ e_{jks}(dⱼ,ᵢ·dₖ − d⁰ⱼ,ᵢ·d⁰ₖ) d⁰ₛ`.
    pub fn axial_rates_via_directors(&self) -> [Vec3<T>; D] {
        let d = self.directors();
        let d0 = self.reference_directors();
        let dd = self.director_partials();
        let dd0 = self.reference_director_partials();
        std::array::from_fn(|i| {
            let mut out = Vec3::zero();
            for j in 0..3 {
                for k in 0..3 {
                    let c = dd[i][j].dot(d[k]) - dd0[i][j].dot(d0[k]);
                    for s in 0..3 {
                        let e = eps3::<T>(j, k, s);
                        if e != T::zero() {
                            out += d0[s].scale(T::half() * e * c);
                        }
                    }
                }
            }
            out
        })
    }

    /// `ωᵢ = axl(Qₑ,ᵢQₑᵀ)`.
    pub fn omegas(&self) -> [Vec3<T>; D] {
        let qt = self.qe.value.transpose();
        std::array::from_fn(|i| axl_of_skew_part(&(self.qe.d[i] * qt)))
    }

    /// `ωᵢ = ½[dⱼ × dⱼ,ᵢ − Qₑ(d⁰ⱼ × d⁰ⱼ,ᵢ)]`.
    pub fn omegas_via_directors(&self) -> [Vec3<T>; D] {
        let d = self.directors();
        let d0 = self.reference_directors();
        let dd = self.director_partials();
        let dd0 = self.reference_director_partials();
        std::array::from_fn(|i| {
            let mut a = Vec3::zero();
            let mut b = Vec3::zero();
            for j in 0..3 {
                a += d[j].cross(dd[i][j]);
                b += d0[j].cross(dd0[i][j]);
            }
            (a - self.qe.value * b).scale(T::half())
        })
    }

    /// `Qₑᵀωᵢ` with `ωᵢ` from the director formula.
    pub fn axial_rates_via_omegas(&self) -> [Vec3<T>; D] {
        self.omegas_via_directors().map(|w| self.qe.value.tmul(w))
    }

    /// Largest `|Qₑ,ᵢ − ωᵢ × Qₑ|`.
    pub fn omega_residual(&self, omegas: &[Vec3<T>; D]) -> T {
        (0..D).fold(T::zero(), |m, i| {
            m.max((self.qe.d[i] - omegas[i].cross_tensor(&self.qe.value)).max_abs())
        })
    }
}

/// `Σᵢ vᵢ ⊗ gⁱ`.
pub fn assemble<T: Real, const D: usize>(v: &[Vec3<T>; D], contra: &[Vec3<T>; D]) -> Mat3<T> {
    (0..D).fold(Mat3::zero(), |m, i| m + v[i].outer(contra[i]))
}

/// `D = −Σᵢ (QₑᵀQₑ,ᵢ) × gⁱ`.
pub fn dislocation_from_rates<T: Real, const D: usize>(rates: &[Mat3<T>; D], contra: &[Vec3<T>; D]) -> Mat3<T> {
    (0..D).fold(Mat3::zero(), |m, i| m - rates[i].cross_vec(contra[i]))
}

/// `D = e_{krs}(dⱼ,ᵢ·dₖ − d⁰ⱼ,ᵢ·d⁰ₖ)(gⁱ·d⁰ᵣ) d⁰ⱼ ⊗ d⁰ₛ`.
pub fn dislocation_via_directors<T: Real, const D: usize>(m: &MicroJet<T, D>, contra: &[Vec3<T>; D]) -> Mat3<T> {
    let d = m.directors();
    let d0 = m.reference_directors();
    let dd = m.director_partials();
    let dd0 = m.reference_director_partials();
    let mut out = Mat3::zero();
    for j in 0..3 {
        for s in 0..3 {
            let mut c = T::zero();
            for i in 0..D {
                for k in 0..3 {
                    let w = dd[i][j].dot(d[k]) - dd0[i][j].dot(d0[k]);
                    for r in 0..3 {
                        let e = eps3::<T>(k, r, s);
                        if e != T::zero() {
                            c += e * w * contra[i].dot(d0[r]);
                        }
                    }
                }
            }
            out += d0[j].outer(d0[s]).scale(c);
        }
    }
    out
}

/// Residual pair `(‖D + Γᵀ − tr(Γ)1₃‖, ‖Γ + Dᵀ − ½tr(D)1₃‖)` of the Nye relation.
pub fn nye_residuals<T: Real>(gamma: &Mat3<T>, d: &Mat3<T>) -> (T, T) {
    let one = Mat3::identity();
    let r1 = *d + gamma.transpose() - one.scale(gamma.trace());
    let r2 = *gamma + d.transpose() - one.scale(T::half() * d.trace());
    (r1.norm(), r2.norm())
}

/// `D = −Γᵀ + tr(Γ)1₃`.
pub fn nye_from_wryness<T: Real>(gamma: &Mat3<T>) -> Mat3<T> {
    Mat3::identity().scale(gamma.trace()) - gamma.transpose()
}

/// `Γ = −Dᵀ + ½tr(D)1₃`.
pub fn wryness_from_nye<T: Real>(d: &Mat3<T>) -> Mat3<T> {
    Mat3::identity().scale(T::half() * d.trace()) - d.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rot3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng) -> Mat3<f64> {
        Mat3(std::array::from_fn(|_| {
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
        }))
    }

    #[test]
    fn nye_inverse_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = rand_mat(&mut rng);
            let d = nye_from_wryness(&g);
            assert!((wryness_from_nye(&d) - g).max_abs() < 1e-14);
            let (a, b) = nye_residuals(&g, &d);
            assert!(a < 1e-14 && b < 1e-14);
            assert!((d.trace() - 2.0 * g.trace()).abs() < 1e-14);
        }
    }

    #[test]
    fn nye_of_identity() {
        let g = Mat3::<f64>::identity();
        assert_eq!(nye_from_wryness(&g), Mat3::identity().scale(2.0));
        assert_eq!(nye_residuals(&Mat3::<f64>::zero(), &Mat3::zero()), (0.0, 0.0));
    }

    #[test]
    fn routes_agree_for_exact_jet() {
        // Qₑ = exp([a]×) with Qₑ,ᵢ = [wᵢ]× Qₑ, Q₀ likewise
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = |rng: &mut ChaCha8Rng| Vec3(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        for _ in 0..20 {
            let qe = *Rot3::from_axis_angle(v(&mut rng), 0.8).mat();
            let q0 = *Rot3::from_axis_angle(v(&mut rng), 0.4).mat();
            let w: [Vec3<f64>; 3] = std::array::from_fn(|_| v(&mut rng));
            let w0: [Vec3<f64>; 3] = std::array::from_fn(|_| v(&mut rng));
            let m = MicroJet {
                qe: Jet {
                    value: qe,
                    d: std::array::from_fn(|i| w[i].cross_tensor(&qe)),
                },
                q0: Jet {
                    value: q0,
                    d: std::array::from_fn(|i| w0[i].cross_tensor(&q0)),
                },
            };
            let a = m.axial_rates();
            let b = m.axial_rates_via_directors();
            let c = m.axial_rates_via_omegas();
            let t = m.axial_rates_via_total();
            for i in 0..3 {
                assert!((a[i] - qe.tmul(w[i])).max_abs() < 1e-14);
                assert!((a[i] - b[i]).max_abs() < 1e-14);
                assert!((a[i] - c[i]).max_abs() < 1e-14);
                assert!((a[i] - t[i]).max_abs() < 1e-14);
            }
            let om = m.omegas();
            assert!(m.omega_residual(&om) < 1e-14);
            let contra: [Vec3<f64>; 3] = std::array::from_fn(|_| v(&mut rng));
            let gamma = assemble(&a, &contra);
            let d1 = dislocation_from_rates(&m.rates(), &contra);
            let d2 = dislocation_via_directors(&m, &contra);
            assert!((d1 - d2).max_abs() < 1e-13);
            assert!((d1 - nye_from_wryness(&gamma)).max_abs() < 1e-13);
        }
    }
}
