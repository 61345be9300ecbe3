//! Six-parameter shell kinematics: strain, bending-curvature and dislocation density.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{check_rotation, jet, rotation_drift_tol, Deriv, Jet, RotationField2, VectorField2};
use crate::micro::{self, MicroJet};
use crate::scalar::{eps3, Real};
use crate::surface::{surf_frames, SurfaceFrames, SurfacePatch};
use crate::tensor::{polar_factor, polar_factor_derivative, Mat3, Rot3, Vec3};

/// Residual above which the shell Nye relation is considered violated.
pub const NYE_TOL: f64 = 1e-6;

/// How the initial microrotation is obtained.
#[derive(Clone)]
pub enum InitialRotation<T: Real> {
    /// `Q₀ = polar(aᵢ ⊗ eᵢ)` with `a₃ = n₀`.
    Default,
    Field(RotationField2<T>),
}

#[derive(Clone)]
pub struct ShellConfig<T: Real> {
    pub patch: Arc<dyn SurfacePatch<T>>,
    pub m: VectorField2<T>,
    pub qe: RotationField2<T>,
    pub q0: InitialRotation<T>,
    pub deriv: Deriv<T>,
}

/// `Q₀ = polar(aᵢ ⊗ eᵢ)` and its partials, from the frames.
pub fn default_initial_rotation_jet<T: Real>(frames: &SurfaceFrames<T>) -> Result<Jet<Mat3<T>, 2>> {
    let f = Mat3::from_cols(frames.cov3());
    let r = polar_factor(&f)?;
    let mut d = [Mat3::zero(); 2];
    for (b, db) in d.iter_mut().enumerate() {
        let df = Mat3::from_cols([frames.dcov[0][b], frames.dcov[1][b], frames.dnormal[b]]);
        *db = polar_factor_derivative(&r, &f, &df)?;
    }
    Ok(Jet { value: r.into_mat(), d })
}

/// `Q₀ = polar(aᵢ ⊗ eᵢ)` at `x`.
pub fn default_initial_rotation<T: Real>(
    patch: &(impl SurfacePatch<T> + ?Sized),
    x: &[T; 2],
    deriv: Deriv<T>,
) -> Result<Rot3<T>> {
    let frames = surf_frames(patch, x, deriv)?;
    polar_factor(&Mat3::from_cols(frames.cov3()))
}

impl<T: Real> ShellConfig<T> {
    pub fn new(patch: Arc<dyn SurfacePatch<T>>, m: VectorField2<T>, qe: RotationField2<T>, deriv: Deriv<T>) -> Self {
        ShellConfig {
            patch,
            m,
            qe,
            q0: InitialRotation::Default,
            deriv,
        }
    }

    pub fn point(&self, x: &[T; 2]) -> Result<ShellPoint<T>> {
        let frames = surf_frames(self.patch.as_ref(), x, self.deriv)?;
        let m = jet(self.m.as_ref(), x, self.deriv)?;
        let qe = jet(self.qe.as_ref(), x, self.deriv)?;
        let q0 = match &self.q0 {
            InitialRotation::Default => default_initial_rotation_jet(&frames)?,
            InitialRotation::Field(f) => jet(f.as_ref(), x, self.deriv)?,
        };
        let tol = rotation_drift_tol::<T>();
        check_rotation(&qe.value, tol)?;
        check_rotation(&q0.value, tol)?;
        Ok(ShellPoint {
            frames,
            m,
            micro: MicroJet { qe, q0 },
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShellPoint<T> {
    pub frames: SurfaceFrames<T>,
    pub m: Jet<Vec3<T>, 2>,
    pub micro: MicroJet<T, 2>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellMeasures<T> {
    pub ee: Mat3<T>,
    pub ke: Mat3<T>,
    pub de: Mat3<T>,
}

impl<T: Real> ShellPoint<T> {
    /// `Eₑ = Qₑᵀ Grad_s m − 𝐚`.
    pub fn strain(&self) -> Mat3<T> {
        self.micro.qe.value.tmul_mat(&self.frames.grad_s(&self.m)) - self.frames.first_fundamental()
    }

    /// `Eₑ = (m,α·dᵢ − a_α·d⁰ᵢ) d⁰ᵢ ⊗ aᵅ`.
    pub fn strain_via_directors(&self) -> Mat3<T> {
        let d = self.micro.directors();
        let d0 = self.micro.reference_directors();
        let mut out = Mat3::zero();
        for i in 0..3 {
            for a in 0..2 {
                let c = self.m.d[a].dot(d[i]) - self.frames.cov[a].dot(d0[i]);
                out += d0[i].outer(self.frames.contra[a]).scale(c);
            }
        }
        out
    }

    /// `Kₑ = axl(QₑᵀQₑ,α) ⊗ aᵅ`.
    pub fn curvature(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates(), &self.frames.contra)
    }

    /// `Kₑ = Q₀[axl(R̄ᵀR̄,α) − axl(Q₀ᵀQ₀,α)] ⊗ aᵅ`.
    pub fn curvature_via_total(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_total(), &self.frames.contra)
    }

    /// `Kₑ = ½ e_{ijk}(dⱼ,α·dₖ − d⁰ⱼ,α·d⁰ₖ) d⁰ᵢ ⊗ aᵅ`.
    pub fn curvature_via_directors(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_directors(), &self.frames.contra)
    }

    /// Row-by-row director form, one cyclic triple `(i, j, k)` per row.
    pub fn curvature_rows(&self) -> Mat3<T> {
        let d = self.micro.directors();
        let d0 = self.micro.reference_directors();
        let dd = self.micro.director_partials();
        let dd0 = self.micro.reference_director_partials();
        let mut out = Mat3::zero();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            for a in 0..2 {
                let c = dd[a][j].dot(d[k]) - dd0[a][j].dot(d0[k]);
                out += d0[i].outer(self.frames.contra[a]).scale(c);
            }
        }
        out
    }

    /// `axl(QₑᵀQₑ,α) = −½ e_{ijk}(dⱼ·dₖ,α − d⁰ⱼ·d⁰ₖ,α) d⁰ᵢ`.
    pub fn axial_rates_alternate(&self) -> [Vec3<T>; 2] {
        let d = self.micro.directors();
        let d0 = self.micro.reference_directors();
        let dd = self.micro.director_partials();
        let dd0 = self.micro.reference_director_partials();
        std::array::from_fn(|a| {
            let mut out = Vec3::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let e = eps3::<T>(i, j, k);
                        if e != T::zero() {
                            let c = d[j].dot(dd[a][k]) - d0[j].dot(dd0[a][k]);
                            out -= d0[i].scale(T::half() * e * c);
                        }
                    }
                }
            }
            out
        })
    }

    /// `Kₑ = ½[Qₑᵀ(dᵢ × dᵢ,α) − d⁰ᵢ × d⁰ᵢ,α] ⊗ aᵅ`.
    pub fn curvature_via_cross(&self) -> Mat3<T> {
        micro::assemble(&self.micro.axial_rates_via_omegas(), &self.frames.contra)
    }

    /// `Kₑ = Qₑᵀ ω` with `ω = ω_α ⊗ aᵅ`, `ω_α = axl(Qₑ,αQₑᵀ)`.
    pub fn curvature_via_omega(&self) -> Mat3<T> {
        self.micro
            .qe
            .value
            .tmul_mat(&micro::assemble(&self.micro.omegas(), &self.frames.contra))
    }

    /// `Dₑ = Qₑᵀ Curl_s Qₑ`.
    pub fn dislocation(&self) -> Mat3<T> {
        self.micro.qe.value.tmul_mat(&self.frames.curl_s_tensor(&self.micro.qe))
    }

    /// `Dₑ = −(QₑᵀQₑ,α) × aᵅ`.
    pub fn dislocation_via_rates(&self) -> Mat3<T> {
        micro::dislocation_from_rates(&self.micro.rates(), &self.frames.contra)
    }

    /// Components in the basis `d⁰ᵢ ⊗ d⁰ⱼ`.
    pub fn dislocation_via_directors(&self) -> Mat3<T> {
        micro::dislocation_via_directors(&self.micro, &self.frames.contra)
    }

    /// `d₁·d₂,α − d⁰₁·d⁰₂,α` for each `α`.
    pub fn normal_mixed_components(&self) -> [T; 2] {
        let d = self.micro.directors();
        let d0 = self.micro.reference_directors();
        let dd = self.micro.director_partials();
        let dd0 = self.micro.reference_director_partials();
        std::array::from_fn(|a| d[0].dot(dd[a][1]) - d0[0].dot(dd0[a][1]))
    }

    pub fn measures(&self) -> ShellMeasures<T> {
        ShellMeasures {
            ee: self.strain(),
            ke: self.curvature(),
            de: self.dislocation(),
        }
    }
}

pub fn shell_strain<T: Real>(cfg: &ShellConfig<T>, x: &[T; 2]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.strain())
}

pub fn shell_bending_curvature<T: Real>(cfg: &ShellConfig<T>, x: &[T; 2]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.curvature())
}

pub fn shell_dislocation<T: Real>(cfg: &ShellConfig<T>, x: &[T; 2]) -> Result<Mat3<T>> {
    Ok(cfg.point(x)?.dislocation())
}

/// Shell Nye residuals and the identities that follow from them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellNyeReport<T> {
    /// `‖D + Kᵀ − tr(K)1₃‖`.
    pub residual: T,
    /// `‖K + Dᵀ − ½tr(D)1₃‖`.
    pub inverse_residual: T,
    /// `|tr D − 2 tr K|`.
    pub trace: T,
    /// `‖skew D − skew K‖`.
    pub skew: T,
    /// `‖dev₃sym D + dev₃sym K‖`.
    pub dev_sym: T,
    /// `|‖D‖² − ‖K‖² − (tr K)²|`.
    pub norm_d: T,
    /// `|‖K‖² − ‖D‖² + ¼(tr D)²|`.
    pub norm_k: T,
    /// `‖K‖ − ‖D‖`; non-positive when the lower bound holds.
    pub lower_bound_excess: T,
    /// `‖D‖ − 2‖K‖`; non-positive when the upper bound holds.
    pub upper_bound_excess: T,
}

impl<T: Real> ShellNyeReport<T> {
    /// Largest of the equality residuals.
    pub fn max_identity_residual(&self) -> T {
        [
            self.residual,
            self.inverse_residual,
            self.trace,
            self.skew,
            self.dev_sym,
            self.norm_d,
            self.norm_k,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }

    /// Largest violation of the two norm bounds.
    pub fn max_bound_excess(&self) -> T {
        self.lower_bound_excess.max(self.upper_bound_excess)
    }
}

pub fn shell_nye<T: Real>(k: &Mat3<T>, d: &Mat3<T>) -> ShellNyeReport<T> {
    let (residual, inverse_residual) = micro::nye_residuals(k, d);
    let dev_sym = |x: &Mat3<T>| x.sym().dev();
    let nk = k.norm();
    let nd = d.norm();
    let tk = k.trace();
    let td = d.trace();
    ShellNyeReport {
        residual,
        inverse_residual,
        trace: (td - T::two() * tk).abs(),
        skew: (d.skew() - k.skew()).norm(),
        dev_sym: (dev_sym(d) + dev_sym(k)).norm(),
        norm_d: (nd * nd - nk * nk - tk * tk).abs(),
        norm_k: (nk * nk - nd * nd + T::lit(0.25) * td * td).abs(),
        lower_bound_excess: nk - nd,
        upper_bound_excess: nd - T::two() * nk,
    }
}

/// A tensor of the tangent plane, stored by mixed components `Sᵅ·β` on `a_α ⊗ aᵝ`.
#[derive(Clone, Copy, Debug)]
pub struct PlanarTensor<T> {
    pub mixed: [[T; 2]; 2],
    pub cov: [Vec3<T>; 2],
    pub contra: [Vec3<T>; 2],
    pub normal: Vec3<T>,
}

pub const PLANAR_DET_MIN: f64 = 1e-12;

impl<T: Real> PlanarTensor<T> {
    pub fn new(mixed: [[T; 2]; 2], frames: &SurfaceFrames<T>) -> Self {
        PlanarTensor {
            mixed,
            cov: frames.cov,
            contra: frames.contra,
            normal: frames.normal,
        }
    }

    /// Mixed components `aᵅ · S a_β` of the planar part of `s`.
    pub fn from_tensor(s: &Mat3<T>, frames: &SurfaceFrames<T>) -> Self {
        let mixed = std::array::from_fn(|a| std::array::from_fn(|b| frames.contra[a].dot(*s * frames.cov[b])));
        Self::new(mixed, frames)
    }

    pub fn to_tensor(&self) -> Mat3<T> {
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.cov[a].outer(self.contra[b]).scale(self.mixed[a][b]);
            }
        }
        out
    }

    fn with_mixed(&self, mixed: [[T; 2]; 2]) -> Self {
        PlanarTensor { mixed, ..*self }
    }

    fn identity(&self) -> Mat3<T> {
        self.cov[0].outer(self.contra[0]) + self.cov[1].outer(self.contra[1])
    }

    fn alternator(&self) -> Mat3<T> {
        let e = self.cov[0].cross(self.cov[1]).dot(self.normal);
        (self.cov[0].outer(self.cov[1]) - self.cov[1].outer(self.cov[0])).scale(T::one() / e)
    }

    pub fn trace(&self) -> T {
        self.mixed[0][0] + self.mixed[1][1]
    }

    pub fn det2(&self) -> T {
        self.mixed[0][0] * self.mixed[1][1] - self.mixed[0][1] * self.mixed[1][0]
    }

    /// `T(S) = −Sᵀ + tr(S)𝐚`.
    pub fn transform(&self) -> Self {
        let t = self.identity().scale(self.trace()) - self.to_tensor().transpose();
        self.with_mixed(std::array::from_fn(|a| {
            std::array::from_fn(|b| self.contra[a].dot(t * self.cov[b]))
        }))
    }

    /// `−𝐜 S 𝐜`.
    pub fn via_alternator(&self) -> Mat3<T> {
        let c = self.alternator();
        -(c * self.to_tensor() * c)
    }

    /// `Cof(Sᵅ·β)` placed on the basis `aᵅ ⊗ a_β`.
    pub fn cofactor(&self) -> Mat3<T> {
        let m = &self.mixed;
        let cof = [[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]];
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.contra[a].outer(self.cov[b]).scale(cof[a][b]);
            }
        }
        out
    }

    /// `det₂(S) S⁻ᵀ` with the planar inverse; `None` when `|det₂| ≤ 1e−12`.
    pub fn det_inverse_transpose(&self) -> Option<Mat3<T>> {
        let det = self.det2();
        if det.abs() <= T::lit(PLANAR_DET_MIN) {
            return None;
        }
        let m = &self.mixed;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        // S⁻¹ = inv_{αβ} a_α ⊗ aᵝ, so S⁻ᵀ = inv_{αβ} aᵝ ⊗ a_α
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.contra[b].outer(self.cov[a]).scale(inv[a][b]);
            }
        }
        Some(out.scale(det))
    }
}

pub fn transform_t<T: Real>(s: &PlanarTensor<T>) -> PlanarTensor<T> {
    s.transform()
}

/// Decomposition of `Dₑ` into planar, mixed and normal parts.
#[derive(Clone, Copy, Debug)]
pub struct PlanarSplit<T> {
    pub d_planar: Mat3<T>,
    /// `D_{α3} = a_α · Dₑ n₀`.
    pub d_mixed: [T; 2],
    /// `½ tr(Dₑ) n₀ ⊗ n₀`.
    pub d_trace_part: Mat3<T>,
    pub k_planar: Mat3<T>,
    /// `K_{3α} = n₀ · Kₑ a_α`.
    pub k_normal: [T; 2],
    /// Reassembly residual of `Dₑ` from its parts.
    pub reassembly: T,
    /// `max_α |D_{α3} + K_{3α}|`.
    pub mixed_residual: T,
    /// `‖D∥ + K∥ᵀ − tr(Kₑ)𝐚‖`.
    pub planar_residual: T,
    /// `|n₀Dₑ − ½tr(Dₑ)n₀|`.
    pub normal_row_residual: T,
}

fn require_nye<T: Real>(k: &Mat3<T>, d: &Mat3<T>) -> Result<()> {
    let (r, _) = micro::nye_residuals(k, d);
    if r > T::lit(NYE_TOL) {
        return Err(Error::NyeViolated { residual: r.as_f64() });
    }
    Ok(())
}

pub fn planar_split<T: Real>(d: &Mat3<T>, k: &Mat3<T>, frames: &SurfaceFrames<T>) -> Result<PlanarSplit<T>> {
    require_nye(k, d)?;
    let a = frames.first_fundamental();
    let n = frames.normal;
    let d_planar = *d * a;
    let d_mixed: [T; 2] = std::array::from_fn(|al| frames.cov[al].dot(*d * n));
    let d_trace_part = n.outer(n).scale(T::half() * d.trace());
    let k_planar = a * *k;
    let k_normal: [T; 2] = std::array::from_fn(|al| n.dot(*k * frames.cov[al]));

    let rebuilt = (0..2).fold(d_planar + d_trace_part, |acc, al| {
        acc + frames.contra[al].outer(n).scale(d_mixed[al])
    });
    let mixed_residual = (0..2).fold(T::zero(), |m, al| m.max((d_mixed[al] + k_normal[al]).abs()));
    let planar_residual = (d_planar + k_planar.transpose() - a.scale(k.trace())).norm();
    let normal_row_residual = (d.tmul(n) - n.scale(T::half() * d.trace())).max_abs();
    Ok(PlanarSplit {
        d_planar,
        d_mixed,
        d_trace_part,
        k_planar,
        k_normal,
        reassembly: (*d - rebuilt).norm(),
        mixed_residual,
        planar_residual,
        normal_row_residual,
    })
}

/// Residuals of `D∥ = T(K∥)` and of the cofactor reassembly of `Dₑ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CofactorResiduals<T> {
    pub planar: T,
    pub reassembly: T,
}

pub fn planar_cofactor_check<T: Real>(
    k: &Mat3<T>,
    d: &Mat3<T>,
    frames: &SurfaceFrames<T>,
) -> Result<CofactorResiduals<T>> {
    let split = planar_split(d, k, frames)?;
    let kp = PlanarTensor::from_tensor(&split.k_planar, frames);
    let n = frames.normal;
    let planar = (split.d_planar - kp.transform().to_tensor()).norm();
    let rebuilt = (0..2).fold(kp.cofactor() + n.outer(n).scale(kp.trace()), |acc, al| {
        acc - frames.contra[al].outer(n).scale(split.k_normal[al])
    });
    Ok(CofactorResiduals {
        planar,
        reassembly: (*d - rebuilt).norm(),
    })
}
