//! Surface frames, fundamental tensors and surface differential operators.
//!
//! The normal is `n₀ = a₁ × a₂ / |a₁ × a₂|`; index 2 of three-component
//! arrays stands for the normal direction (`a₃ = a³ = n₀`).

use crate::error::{Error, Result};
use crate::field::{central_difference, second_step, BoxDomain, Deriv, Jet};
use crate::scalar::{eps2, Real};
use crate::tensor::{Mat3, Vec3};

/// A parametrisation `y₀: ω ⊂ ℝ² → ℝ³` of a surface.
pub trait SurfacePatch<T: Real>: Send + Sync {
    fn domain(&self) -> BoxDomain<T, 2>;

    fn map(&self, x: &[T; 2]) -> Vec3<T>;

    /// Analytic `y₀,α`.
    fn tangent(&self, _x: &[T; 2], _a: usize) -> Option<Vec3<T>> {
        None
    }

    /// Analytic `y₀,αβ`.
    fn second(&self, _x: &[T; 2], _a: usize, _b: usize) -> Option<Vec3<T>> {
        None
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SurfaceFrames<T> {
    pub point: [T; 2],
    pub cov: [Vec3<T>; 2],
    pub contra: [Vec3<T>; 2],
    pub normal: Vec3<T>,
    /// `a_{αβ}`.
    pub metric: [[T; 2]; 2],
    /// `a^{αβ}`.
    pub metric_inv: [[T; 2]; 2],
    /// `a = |a₁ × a₂|`.
    pub area: T,
    /// `christoffel[γ][α][β] = Γᵞ_{αβ} = a_α,β · aᵞ`.
    pub christoffel: [[[T; 2]; 2]; 2],
    /// `b_{αβ} = −n₀,β · a_α`.
    pub b_cov: [[T; 2]; 2],
    /// `b_mixed[α][β] = b^α_β = −n₀,β · aᵅ`.
    pub b_mixed: [[T; 2]; 2],
    /// `a_α,β · n₀`, the normal part of the second derivatives.
    pub b_normal_part: [[T; 2]; 2],
    /// `dcov[α][β] = a_α,β`.
    pub dcov: [[Vec3<T>; 2]; 2],
    /// `dcontra[α][β] = aᵅ,β`.
    pub dcontra: [[Vec3<T>; 2]; 2],
    /// `dnormal[β] = n₀,β`.
    pub dnormal: [Vec3<T>; 2],
}

const DEGENERATE_A: f64 = 1e-12;

/// Geometry of `patch` at `x`.
pub fn surf_frames<T: Real>(
    patch: &(impl SurfacePatch<T> + ?Sized),
    x: &[T; 2],
    deriv: Deriv<T>,
) -> Result<SurfaceFrames<T>> {
    patch.domain().check(x, &deriv.margin(x))?;
    let mut cov = [Vec3::zero(); 2];
    let mut dcov = [[Vec3::zero(); 2]; 2];
    match deriv {
        Deriv::Analytic => {
            for a in 0..2 {
                cov[a] = patch
                    .tangent(x, a)
                    .ok_or(Error::NoAnalyticDerivative { what: "patch tangent" })?;
                for b in 0..2 {
                    dcov[a][b] = patch.second(x, a, b).ok_or(Error::NoAnalyticDerivative {
                        what: "patch second derivative",
                    })?;
                }
            }
        }
        Deriv::CentralFd { .. } => {
            for (a, ca) in cov.iter_mut().enumerate() {
                *ca = central_difference(|y| patch.map(y), x, a, deriv.step(x[a]));
            }
            for a in 0..2 {
                for b in a..2 {
                    let d = second_difference(patch, x, a, b);
                    dcov[a][b] = d;
                    dcov[b][a] = d;
                }
            }
        }
    }
    assemble(*x, cov, dcov)
}

fn second_difference<T: Real>(patch: &(impl SurfacePatch<T> + ?Sized), x: &[T; 2], a: usize, b: usize) -> Vec3<T> {
    let ha = second_step(x[a]);
    let hb = second_step(x[b]);
    let at = |sa: T, sb: T| {
        let mut y = *x;
        y[a] += sa * ha;
        y[b] += sb * hb;
        patch.map(&y)
    };
    let one = T::one();
    let sum = at(one, one) - at(one, -one) - at(-one, one) + at(-one, -one);
    sum.scale(T::one() / (T::lit(4.0) * ha * hb))
}

fn assemble<T: Real>(point: [T; 2], cov: [Vec3<T>; 2], dcov: [[Vec3<T>; 2]; 2]) -> Result<SurfaceFrames<T>> {
    let c = cov[0].cross(cov[1]);
    let area = c.norm();
    if !(area > T::lit(DEGENERATE_A)) {
        return Err(Error::DegenerateSurface { a: area.as_f64() });
    }
    let normal = c.scale(T::one() / area);
    let metric: [[T; 2]; 2] = std::array::from_fn(|a| std::array::from_fn(|b| cov[a].dot(cov[b])));
    let det = metric[0][0] * metric[1][1] - metric[0][1] * metric[1][0];
    let metric_inv = [
        [metric[1][1] / det, -metric[0][1] / det],
        [-metric[1][0] / det, metric[0][0] / det],
    ];
    let contra: [Vec3<T>; 2] = std::array::from_fn(|a| cov[0].scale(metric_inv[a][0]) + cov[1].scale(metric_inv[a][1]));

    let christoffel =
        std::array::from_fn(|g| std::array::from_fn(|a| std::array::from_fn(|b| dcov[a][b].dot(contra[g]))));

    let dnormal: [Vec3<T>; 2] = std::array::from_fn(|b| {
        let dc = dcov[0][b].cross(cov[1]) + cov[0].cross(dcov[1][b]);
        (dc - normal.scale(normal.dot(dc))).scale(T::one() / area)
    });
    let b_cov = std::array::from_fn(|a| std::array::from_fn(|b| -dnormal[b].dot(cov[a])));
    let b_mixed = std::array::from_fn(|a| std::array::from_fn(|b| -dnormal[b].dot(contra[a])));
    let b_normal_part = std::array::from_fn(|a| std::array::from_fn(|b| dcov[a][b].dot(normal)));

    // aᵅ = a^{αμ} a_μ differentiated through a^{αμ},β = −a^{αρ} a_{ρσ},β a^{σμ}
    let dmetric: [[[T; 2]; 2]; 2] = std::array::from_fn(|b| {
        std::array::from_fn(|r| std::array::from_fn(|s| dcov[r][b].dot(cov[s]) + cov[r].dot(dcov[s][b])))
    });
    let dcontra = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut out = Vec3::zero();
            for m in 0..2 {
                let mut dinv = T::zero();
                for r in 0..2 {
                    for s in 0..2 {
                        dinv -= metric_inv[a][r] * dmetric[b][r][s] * metric_inv[s][m];
                    }
                }
                out += cov[m].scale(dinv) + dcov[m][b].scale(metric_inv[a][m]);
            }
            out
        })
    });

    Ok(SurfaceFrames {
        point,
        cov,
        contra,
        normal,
        metric,
        metric_inv,
        area,
        christoffel,
        b_cov,
        b_mixed,
        b_normal_part,
        dcov,
        dcontra,
        dnormal,
    })
}

impl<T: Real> SurfaceFrames<T> {
    /// `a_i` with `a₃ = n₀`.
    pub fn cov3(&self) -> [Vec3<T>; 3] {
        [self.cov[0], self.cov[1], self.normal]
    }

    /// `aⁱ` with `a³ = n₀`.
    pub fn contra3(&self) -> [Vec3<T>; 3] {
        [self.contra[0], self.contra[1], self.normal]
    }

    /// `ε^{αβ} = e_{αβ}/a`.
    pub fn eps_upper(&self, a: usize, b: usize) -> T {
        eps2::<T>(a, b) / self.area
    }

    /// `ε_{αβ} = a e_{αβ}`.
    pub fn eps_lower(&self, a: usize, b: usize) -> T {
        eps2::<T>(a, b) * self.area
    }

    /// First fundamental tensor `𝐚 = a_α ⊗ aᵅ`.
    pub fn first_fundamental(&self) -> Mat3<T> {
        self.cov[0].outer(self.contra[0]) + self.cov[1].outer(self.contra[1])
    }

    /// Second fundamental tensor `𝐛 = −n₀,α ⊗ aᵅ`.
    pub fn second_fundamental(&self) -> Mat3<T> {
        -(self.dnormal[0].outer(self.contra[0]) + self.dnormal[1].outer(self.contra[1]))
    }

    /// `𝐛 = b_{αβ} aᵅ ⊗ aᵝ` with `b_{αβ}` from the normal part of `a_α,β`.
    pub fn second_fundamental_from_normal_part(&self) -> Mat3<T> {
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.contra[a].outer(self.contra[b]).scale(self.b_normal_part[a][b]);
            }
        }
        out
    }

    /// Alternator `𝐜 = ε^{αβ} a_α ⊗ a_β`.
    pub fn alternator(&self) -> Mat3<T> {
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.cov[a].outer(self.cov[b]).scale(self.eps_upper(a, b));
            }
        }
        out
    }

    /// `𝐜 = ε_{αβ} aᵅ ⊗ aᵝ`.
    pub fn alternator_lower(&self) -> Mat3<T> {
        let mut out = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                out += self.contra[a].outer(self.contra[b]).scale(self.eps_lower(a, b));
            }
        }
        out
    }

    /// Largest deviation among the cross-product identities between the surface bases.
    pub fn cross_identity_residual(&self) -> T {
        let n = self.normal;
        let mut worst = T::zero();
        for a in 0..2 {
            let mut r2 = Vec3::zero();
            let mut r4 = Vec3::zero();
            for b in 0..2 {
                let r1 = self.contra[a].cross(self.contra[b]) - n.scale(self.eps_upper(a, b));
                let r3 = self.cov[a].cross(self.cov[b]) - n.scale(self.eps_lower(a, b));
                worst = worst.max(r1.max_abs()).max(r3.max_abs());
                r2 += self.cov[b].scale(self.eps_upper(a, b));
                r4 += self.contra[b].scale(self.eps_lower(a, b));
            }
            worst = worst
                .max((n.cross(self.contra[a]) - r2).max_abs())
                .max((n.cross(self.cov[a]) - r4).max_abs());
        }
        worst
    }

    /// `Grad_s v = v,α ⊗ aᵅ`.
    pub fn grad_s(&self, v: &Jet<Vec3<T>, 2>) -> Mat3<T> {
        v.d[0].outer(self.contra[0]) + v.d[1].outer(self.contra[1])
    }

    /// `Div_s v = v,α · aᵅ`.
    pub fn div_s(&self, v: &Jet<Vec3<T>, 2>) -> T {
        v.d[0].dot(self.contra[0]) + v.d[1].dot(self.contra[1])
    }

    /// Surface gradient of a scalar, `f,α aᵅ`.
    pub fn grad_s_scalar(&self, f: &Jet<T, 2>) -> Vec3<T> {
        self.contra[0].scale(f.d[0]) + self.contra[1].scale(f.d[1])
    }

    /// `curl_s v = −v,α × aᵅ`.
    pub fn curl_s_vec(&self, v: &Jet<Vec3<T>, 2>) -> Vec3<T> {
        -(v.d[0].cross(self.contra[0]) + v.d[1].cross(self.contra[1]))
    }

    /// `(curl_s v)·k = Div_s(v × k)` over the Cartesian basis `k`.
    pub fn curl_s_vec_definition(&self, v: &Jet<Vec3<T>, 2>) -> Vec3<T> {
        Vec3(std::array::from_fn(|c| {
            let k = Vec3::unit(c);
            let w = Jet {
                value: v.value.cross(k),
                d: [v.d[0].cross(k), v.d[1].cross(k)],
            };
            self.div_s(&w)
        }))
    }

    /// Components `v_i = v·a_i` and their partials `[α][i] = v_i,α`.
    fn vector_components(&self, v: &Jet<Vec3<T>, 2>) -> ([T; 3], [[T; 3]; 2]) {
        let a = self.cov3();
        let comp = std::array::from_fn(|i| v.value.dot(a[i]));
        let dcomp = std::array::from_fn(|al| {
            std::array::from_fn(|i| {
                let da = if i < 2 { self.dcov[i][al] } else { self.dnormal[al] };
                v.d[al].dot(a[i]) + v.value.dot(da)
            })
        });
        (comp, dcomp)
    }

    /// `curl_s v = ε^{αβ}[(v₃,β + bᵞ_β v_γ) a_α + v_{β|α} a₃]`.
    pub fn curl_s_vec_components(&self, v: &Jet<Vec3<T>, 2>) -> Vec3<T> {
        let (c, dc) = self.vector_components(v);
        let mut out = Vec3::zero();
        for a in 0..2 {
            for b in 0..2 {
                let e = self.eps_upper(a, b);
                if e == T::zero() {
                    continue;
                }
                let tang = dc[b][2] + (0..2).map(|g| self.b_mixed[g][b] * c[g]).sum::<T>();
                let cd = dc[a][b] - (0..2).map(|g| self.christoffel[g][a][b] * c[g]).sum::<T>();
                out += self.cov[a].scale(e * tang) + self.normal.scale(e * cd);
            }
        }
        out
    }

    /// `v,α = (v_{β|α} − b_{αβ} v₃) aᵝ + (v₃,α + bᵝ_α v_β) a³` for each `α`.
    pub fn vector_derivative_reassembled(&self, v: &Jet<Vec3<T>, 2>) -> [Vec3<T>; 2] {
        let (c, dc) = self.vector_components(v);
        std::array::from_fn(|a| {
            let mut out = Vec3::zero();
            for b in 0..2 {
                let cd = dc[a][b] - (0..2).map(|g| self.christoffel[g][a][b] * c[g]).sum::<T>();
                out += self.contra[b].scale(cd - self.b_cov[a][b] * c[2]);
            }
            let n = dc[a][2] + (0..2).map(|b| self.b_mixed[b][a] * c[b]).sum::<T>();
            out + self.normal.scale(n)
        })
    }

    /// `Curl_s T = −T,α × aᵅ`.
    pub fn curl_s_tensor(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        -(t.d[0].cross_vec(self.contra[0]) + t.d[1].cross_vec(self.contra[1]))
    }

    /// Row `c` of `Curl_s T` is `curl_s(Tᵀ e_c)`, evaluated by the divergence definition.
    pub fn curl_s_tensor_definition(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        Mat3::from_rows(std::array::from_fn(|c| {
            let e = Vec3::unit(c);
            let row = Jet {
                value: t.value.tmul(e),
                d: [t.d[0].tmul(e), t.d[1].tmul(e)],
            };
            self.curl_s_vec_definition(&row)
        }))
    }

    /// Covariant components `T_{ij} = a_i·T a_j` and partials `[γ][i][j]`.
    fn covariant_components(&self, t: &Jet<Mat3<T>, 2>) -> ([[T; 3]; 3], [[[T; 3]; 3]; 2]) {
        let a = self.cov3();
        let da = |i: usize, g: usize| if i < 2 { self.dcov[i][g] } else { self.dnormal[g] };
        let comp = std::array::from_fn(|i| std::array::from_fn(|j| a[i].dot(t.value * a[j])));
        let dcomp = std::array::from_fn(|g| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    da(i, g).dot(t.value * a[j]) + a[i].dot(t.d[g] * a[j]) + a[i].dot(t.value * da(j, g))
                })
            })
        });
        (comp, dcomp)
    }

    /// Mixed components `Tⁱ·ⱼ = aⁱ·T a_j` and partials `[γ][i][j]`.
    fn mixed_components(&self, t: &Jet<Mat3<T>, 2>) -> ([[T; 3]; 3], [[[T; 3]; 3]; 2]) {
        let a = self.cov3();
        let au = self.contra3();
        let da = |i: usize, g: usize| if i < 2 { self.dcov[i][g] } else { self.dnormal[g] };
        let dau = |i: usize, g: usize| if i < 2 { self.dcontra[i][g] } else { self.dnormal[g] };
        let comp = std::array::from_fn(|i| std::array::from_fn(|j| au[i].dot(t.value * a[j])));
        let dcomp = std::array::from_fn(|g| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    dau(i, g).dot(t.value * a[j]) + au[i].dot(t.d[g] * a[j]) + au[i].dot(t.value * da(j, g))
                })
            })
        });
        (comp, dcomp)
    }

    /// Coefficients `C[γ][i][j]` with `T,γ = C_{ij} aⁱ ⊗ aʲ`, built from covariant derivatives.
    pub fn covariant_derivative_blocks(&self, t: &Jet<Mat3<T>, 2>) -> [[[T; 3]; 3]; 2] {
        let (c, dc) = self.covariant_components(t);
        let gam = &self.christoffel;
        let b = &self.b_cov;
        let bm = &self.b_mixed;
        std::array::from_fn(|g| {
            let mut out = [[T::zero(); 3]; 3];
            for al in 0..2 {
                for be in 0..2 {
                    let cd = dc[g][al][be]
                        - (0..2)
                            .map(|d| gam[d][be][g] * c[al][d] + gam[d][al][g] * c[d][be])
                            .sum::<T>();
                    out[al][be] = cd - b[al][g] * c[2][be] - b[be][g] * c[al][2];
                }
                let cd_a3 = dc[g][al][2] - (0..2).map(|be| gam[be][al][g] * c[be][2]).sum::<T>();
                out[al][2] = cd_a3 + (0..2).map(|be| bm[be][g] * c[al][be]).sum::<T>() - b[al][g] * c[2][2];
                let cd_3a = dc[g][2][al] - (0..2).map(|be| gam[be][al][g] * c[2][be]).sum::<T>();
                out[2][al] = cd_3a + (0..2).map(|be| bm[be][g] * c[be][al]).sum::<T>() - b[al][g] * c[2][2];
            }
            out[2][2] = dc[g][2][2] + (0..2).map(|al| bm[al][g] * (c[al][2] + c[2][al])).sum::<T>();
            out
        })
    }

    /// `T,γ` reassembled from [`covariant_derivative_blocks`](Self::covariant_derivative_blocks).
    pub fn tensor_derivative_reassembled(&self, t: &Jet<Mat3<T>, 2>) -> [Mat3<T>; 2] {
        let blocks = self.covariant_derivative_blocks(t);
        let au = self.contra3();
        blocks.map(|c| {
            let mut out = Mat3::zero();
            for i in 0..3 {
                for j in 0..3 {
                    out += au[i].outer(au[j]).scale(c[i][j]);
                }
            }
            out
        })
    }

    /// `Curl_s T` from covariant components and surface covariant derivatives.
    pub fn curl_s_tensor_covariant(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        let (c, dc) = self.covariant_components(t);
        let gam = &self.christoffel;
        let b = &self.b_cov;
        let bm = &self.b_mixed;
        let n = self.normal;
        // T_{αβ|γ}, T_{α3|γ}, T_{3α|γ}
        let cd_ab = |al: usize, be: usize, g: usize| {
            dc[g][al][be]
                - (0..2)
                    .map(|d| gam[d][be][g] * c[al][d] + gam[d][al][g] * c[d][be])
                    .sum::<T>()
        };
        let cd_a3 = |al: usize, g: usize| dc[g][al][2] - (0..2).map(|be| gam[be][al][g] * c[be][2]).sum::<T>();
        let cd_3a = |al: usize, g: usize| dc[g][2][al] - (0..2).map(|be| gam[be][al][g] * c[2][be]).sum::<T>();

        let mut out = Mat3::zero();
        for be in 0..2 {
            for g in 0..2 {
                let e_bg = self.eps_upper(be, g);
                let e_gb = -e_bg;
                if e_bg == T::zero() {
                    continue;
                }
                for al in 0..2 {
                    let k1 = cd_a3(al, g) + (0..2).map(|s| bm[s][g] * c[al][s]).sum::<T>() - b[al][g] * c[2][2];
                    out += self.contra[al].outer(self.cov[be]).scale(e_bg * k1);
                    let k2 = cd_ab(al, be, g) - b[al][g] * c[2][be];
                    out += self.contra[al].outer(n).scale(e_gb * k2);
                }
                let k3 = dc[g][2][2] + (0..2).map(|al| bm[al][g] * (c[al][2] + c[2][al])).sum::<T>();
                out += n.outer(self.cov[be]).scale(e_bg * k3);
                let k4 = cd_3a(be, g) + (0..2).map(|al| bm[al][g] * c[al][be]).sum::<T>();
                out += n.outer(n).scale(e_gb * k4);
            }
        }
        out
    }

    /// `Curl_s T` from mixed components `Tⁱ·ⱼ`.
    pub fn curl_s_tensor_mixed(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        let (c, dc) = self.mixed_components(t);
        let gam = &self.christoffel;
        let b = &self.b_cov;
        let bm = &self.b_mixed;
        let n = self.normal;
        // Tᵅ·β|γ, Tᵅ·₃|γ, T³·β|γ
        let cd_ab = |al: usize, be: usize, g: usize| {
            dc[g][al][be]
                + (0..2)
                    .map(|s| gam[al][g][s] * c[s][be] - gam[s][be][g] * c[al][s])
                    .sum::<T>()
        };
        let cd_a3 = |al: usize, g: usize| dc[g][al][2] + (0..2).map(|s| gam[al][g][s] * c[s][2]).sum::<T>();
        let cd_3b = |be: usize, g: usize| dc[g][2][be] - (0..2).map(|s| gam[s][be][g] * c[2][s]).sum::<T>();

        let mut out = Mat3::zero();
        for be in 0..2 {
            for g in 0..2 {
                let e_bg = self.eps_upper(be, g);
                let e_gb = -e_bg;
                if e_bg == T::zero() {
                    continue;
                }
                for al in 0..2 {
                    let k1 = cd_a3(al, g) + (0..2).map(|s| bm[s][g] * c[al][s]).sum::<T>() - bm[al][g] * c[2][2];
                    out += self.cov[al].outer(self.cov[be]).scale(e_bg * k1);
                    let k2 = cd_ab(al, be, g) - bm[al][g] * c[2][be];
                    out += self.cov[al].outer(n).scale(e_gb * k2);
                }
                let k3 = dc[g][2][2] + (0..2).map(|al| b[al][g] * c[al][2] + bm[al][g] * c[2][al]).sum::<T>();
                out += n.outer(self.cov[be]).scale(e_bg * k3);
                let k4 = cd_3b(be, g) + (0..2).map(|al| b[al][g] * c[al][be]).sum::<T>();
                out += n.outer(n).scale(e_gb * k4);
            }
        }
        out
    }

    /// `Curl_s T = −[aᵅ ⊗ (T_{α|γ} − b_{αγ}T₃) + a³ ⊗ (T₃,γ + bᵅ_γ T_α)] × aᵞ`, rows `T_i = Tᵀa_i`.
    pub fn curl_s_rowwise_covariant(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        let a = self.cov3();
        let rows: [Vec3<T>; 3] = std::array::from_fn(|i| t.value.tmul(a[i]));
        let mut out = Mat3::zero();
        for g in 0..2 {
            let drow = |i: usize| {
                let da = if i < 2 { self.dcov[i][g] } else { self.dnormal[g] };
                t.d[g].tmul(a[i]) + t.value.tmul(da)
            };
            let mut bracket = Mat3::zero();
            for al in 0..2 {
                let cd = (0..2).fold(drow(al), |acc, be| acc - rows[be].scale(self.christoffel[be][al][g]));
                bracket += self.contra[al].outer(cd - rows[2].scale(self.b_cov[al][g]));
            }
            let r3 = (0..2).fold(drow(2), |acc, al| acc + rows[al].scale(self.b_mixed[al][g]));
            bracket += self.normal.outer(r3);
            out -= bracket.cross_vec(self.contra[g]);
        }
        out
    }

    /// `Curl_s T = −[a_α ⊗ (Tᵅ|γ − bᵅ_γ T³) + a₃ ⊗ (T³,γ + b_{αγ} Tᵅ)] × aᵞ`, rows `Tⁱ = Tᵀaⁱ`.
    pub fn curl_s_rowwise_contravariant(&self, t: &Jet<Mat3<T>, 2>) -> Mat3<T> {
        let au = self.contra3();
        let rows: [Vec3<T>; 3] = std::array::from_fn(|i| t.value.tmul(au[i]));
        let mut out = Mat3::zero();
        for g in 0..2 {
            let drow = |i: usize| {
                let da = if i < 2 { self.dcontra[i][g] } else { self.dnormal[g] };
                t.d[g].tmul(au[i]) + t.value.tmul(da)
            };
            let mut bracket = Mat3::zero();
            for al in 0..2 {
                let cd = (0..2).fold(drow(al), |acc, be| acc + rows[be].scale(self.christoffel[al][be][g]));
                bracket += self.cov[al].outer(cd - rows[2].scale(self.b_mixed[al][g]));
            }
            let r3 = (0..2).fold(drow(2), |acc, al| acc + rows[al].scale(self.b_cov[al][g]));
            bracket += self.normal.outer(r3);
            out -= bracket.cross_vec(self.contra[g]);
        }
        out
    }

    /// `curl_s(Grad_s f) = ε^{αβ} bᵞ_β f,γ a_α`, tangential and zero on planes.
    pub fn curl_s_of_gradient(&self, df: &[T; 2]) -> Vec3<T> {
        let mut out = Vec3::zero();
        for a in 0..2 {
            for b in 0..2 {
                let e = self.eps_upper(a, b);
                if e != T::zero() {
                    let s = (0..2).map(|g| self.b_mixed[g][b] * df[g]).sum::<T>();
                    out += self.cov[a].scale(e * s);
                }
            }
        }
        out
    }
}

/// Plane `y₀ = (x₁, x₂, 0)`; normal `e₃`.
#[derive(Clone, Copy, Debug)]
pub struct Plane<T> {
    pub domain: BoxDomain<T, 2>,
}

impl<T: Real> Default for Plane<T> {
    fn default() -> Self {
        Plane {
            domain: BoxDomain::unit(),
        }
    }
}

impl<T: Real> SurfacePatch<T> for Plane<T> {
    fn domain(&self) -> BoxDomain<T, 2> {
        self.domain
    }
    fn map(&self, x: &[T; 2]) -> Vec3<T> {
        Vec3([x[0], x[1], T::zero()])
    }
    fn tangent(&self, _x: &[T; 2], a: usize) -> Option<Vec3<T>> {
        Some(Vec3::unit(a))
    }
    fn second(&self, _x: &[T; 2], _a: usize, _b: usize) -> Option<Vec3<T>> {
        Some(Vec3::zero())
    }
}

/// Oblique plane `y₀ = x₁u + x₂v` with constant, non-orthogonal `u`, `v`.
#[derive(Clone, Copy, Debug)]
pub struct TiltedPlane<T> {
    pub u: Vec3<T>,
    pub v: Vec3<T>,
    pub domain: BoxDomain<T, 2>,
}

impl<T: Real> Default for TiltedPlane<T> {
    fn default() -> Self {
        TiltedPlane {
            u: Vec3::new(T::one(), T::zero(), T::lit(0.3)),
            v: Vec3::new(T::lit(0.2), T::one(), T::lit(0.5)),
            domain: BoxDomain::unit(),
        }
    }
}

impl<T: Real> SurfacePatch<T> for TiltedPlane<T> {
    fn domain(&self) -> BoxDomain<T, 2> {
        self.domain
    }
    fn map(&self, x: &[T; 2]) -> Vec3<T> {
        self.u.scale(x[0]) + self.v.scale(x[1])
    }
    fn tangent(&self, _x: &[T; 2], a: usize) -> Option<Vec3<T>> {
        Some(if a == 0 { self.u } else { self.v })
    }
    fn second(&self, _x: &[T; 2], _a: usize, _b: usize) -> Option<Vec3<T>> {
        Some(Vec3::zero())
    }
}

/// Cylinder `y₀ = (R cos x₁, R sin x₁, x₂)`; outward normal `(cos x₁, sin x₁, 0)`.
#[derive(Clone, Copy, Debug)]
pub struct Cylinder<T> {
    pub radius: T,
    pub domain: BoxDomain<T, 2>,
}

impl<T: Real> Default for Cylinder<T> {
    fn default() -> Self {
        Cylinder {
            radius: T::two(),
            domain: BoxDomain::new([T::zero(), T::zero()], [T::PI(), T::one()]),
        }
    }
}

impl<T: Real> SurfacePatch<T> for Cylinder<T> {
    fn domain(&self) -> BoxDomain<T, 2> {
        self.domain
    }
    fn map(&self, x: &[T; 2]) -> Vec3<T> {
        let (s, c) = x[0].sin_cos();
        Vec3([self.radius * c, self.radius * s, x[1]])
    }
    fn tangent(&self, x: &[T; 2], a: usize) -> Option<Vec3<T>> {
        let (s, c) = x[0].sin_cos();
        Some(if a == 0 {
            Vec3([-self.radius * s, self.radius * c, T::zero()])
        } else {
            Vec3::unit(2)
        })
    }
    fn second(&self, x: &[T; 2], a: usize, b: usize) -> Option<Vec3<T>> {
        let (s, c) = x[0].sin_cos();
        Some(if a == 0 && b == 0 {
            Vec3([-self.radius * c, -self.radius * s, T::zero()])
        } else {
            Vec3::zero()
        })
    }
}

/// Sphere patch `y₀ = R(cos x₁ cos x₂, sin x₁ cos x₂, sin x₂)` away from the poles; outward normal.
#[derive(Clone, Copy, Debug)]
pub struct Sphere<T> {
    pub radius: T,
    pub domain: BoxDomain<T, 2>,
}

impl<T: Real> Default for Sphere<T> {
    fn default() -> Self {
        Sphere {
            radius: T::one(),
            domain: BoxDomain::new([T::zero(), -T::one()], [T::PI(), T::one()]),
        }
    }
}

impl<T: Real> SurfacePatch<T> for Sphere<T> {
    fn domain(&self) -> BoxDomain<T, 2> {
        self.domain
    }
    fn map(&self, x: &[T; 2]) -> Vec3<T> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        Vec3([c1 * c2, s1 * c2, s2]).scale(self.radius)
    }
    fn tangent(&self, x: &[T; 2], a: usize) -> Option<Vec3<T>> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        Some(
            if a == 0 {
                Vec3([-s1 * c2, c1 * c2, T::zero()])
            } else {
                Vec3([-c1 * s2, -s1 * s2, c2])
            }
            .scale(self.radius),
        )
    }
    fn second(&self, x: &[T; 2], a: usize, b: usize) -> Option<Vec3<T>> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        Some(
            match (a.min(b), a.max(b)) {
                (0, 0) => Vec3([-c1 * c2, -s1 * c2, T::zero()]),
                (0, 1) => Vec3([s1 * s2, -c1 * s2, T::zero()]),
                _ => Vec3([-c1 * c2, -s1 * c2, -s2]),
            }
            .scale(self.radius),
        )
    }
}

/// Graph `y₀ = (x₁, x₂, A sin x₁ sin x₂)`.
#[derive(Clone, Copy, Debug)]
pub struct Graph<T> {
    pub amplitude: T,
    pub domain: BoxDomain<T, 2>,
}

impl<T: Real> Default for Graph<T> {
    fn default() -> Self {
        Graph {
            amplitude: T::lit(0.2),
            domain: BoxDomain::new([T::zero(), T::zero()], [T::two(), T::two()]),
        }
    }
}

impl<T: Real> SurfacePatch<T> for Graph<T> {
    fn domain(&self) -> BoxDomain<T, 2> {
        self.domain
    }
    fn map(&self, x: &[T; 2]) -> Vec3<T> {
        Vec3([x[0], x[1], self.amplitude * x[0].sin() * x[1].sin()])
    }
    fn tangent(&self, x: &[T; 2], a: usize) -> Option<Vec3<T>> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        let h = if a == 0 { c1 * s2 } else { s1 * c2 };
        Some(Vec3::unit(a) + Vec3::unit(2).scale(self.amplitude * h))
    }
    fn second(&self, x: &[T; 2], a: usize, b: usize) -> Option<Vec3<T>> {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        let h = if a == b { -s1 * s2 } else { c1 * c2 };
        Some(Vec3::unit(2).scale(self.amplitude * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_frames() {
        let f = surf_frames(&Plane::<f64>::default(), &[0.3, 0.7], Deriv::Analytic).unwrap();
        assert_eq!(f.normal, Vec3::unit(2));
        assert_eq!(f.area, 1.0);
        assert_eq!(f.second_fundamental(), Mat3::zero());
        assert!(f.christoffel.iter().flatten().flatten().all(|c| *c == 0.0));
    }

    #[test]
    fn cylinder_fundamental_forms() {
        let cyl = Cylinder::<f64>::default();
        let x = [0.9, 0.4];
        for deriv in [Deriv::Analytic, Deriv::fd()] {
            let f = surf_frames(&cyl, &x, deriv).unwrap();
            assert!((f.metric[0][0] - 4.0).abs() < 1e-9);
            assert!((f.area - 2.0).abs() < 1e-9);
            assert!((f.b_cov[0][0] + 2.0).abs() < 1e-7);
            assert!(f.b_cov[0][1].abs() < 1e-7 && f.b_cov[1][0].abs() < 1e-7 && f.b_cov[1][1].abs() < 1e-7);
            let outward = Vec3([x[0].cos(), x[0].sin(), 0.0]);
            assert!((f.normal - outward).max_abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_second_form_is_multiple_of_first() {
        let s = Sphere::<f64>::default();
        let f = surf_frames(&s, &[1.1, 0.3], Deriv::Analytic).unwrap();
        let b = f.second_fundamental();
        let a = f.first_fundamental();
        // outward normal: 𝐛 = −𝐚/R
        assert!((b + a).max_abs() < 1e-12);
        let fd = surf_frames(&s, &[1.1, 0.3], Deriv::fd()).unwrap();
        assert!((fd.second_fundamental() + a).max_abs() < 1e-6);
    }

    #[test]
    fn fundamental_tensor_identities() {
        let g = Graph::<f64>::default();
        let f = surf_frames(&g, &[0.7, 1.2], Deriv::Analytic).unwrap();
        let a = f.first_fundamental();
        let b = f.second_fundamental();
        let c = f.alternator();
        assert!((a - a.transpose()).max_abs() < 1e-14);
        assert!((b - b.transpose()).max_abs() < 1e-14);
        assert!((c + c.transpose()).max_abs() < 1e-14);
        assert!((c * c + a).max_abs() < 1e-14);
        assert!((c - f.alternator_lower()).max_abs() < 1e-14);
        assert!((c + f.normal.cross_tensor(&a)).max_abs() < 1e-14);
        assert!((c + a.cross_vec(f.normal)).max_abs() < 1e-14);
        assert!((a * f.normal).max_abs() < 1e-14 && (b * f.normal).max_abs() < 1e-14);
        assert!((b - f.second_fundamental_from_normal_part()).max_abs() < 1e-14);
        assert!(f.cross_identity_residual() < 1e-14);
    }

    fn smooth_jet(x: &[f64; 2]) -> Jet<Mat3<f64>, 2> {
        let m = |x: &[f64; 2]| {
            Mat3(std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    ((i + 2 * j) as f64 * 0.3 + x[0] * (1 + i) as f64 - x[1] * x[0] * j as f64).sin()
                })
            }))
        };
        Jet {
            value: m(x),
            d: std::array::from_fn(|a| central_difference(m, x, a, 1e-6)),
        }
    }

    #[test]
    fn tensor_curl_routes_agree_on_curved_patches() {
        let x = [0.8, 0.6];
        let t = smooth_jet(&x);
        let patches: Vec<Box<dyn SurfacePatch<f64>>> = vec![
            Box::new(Cylinder::default()),
            Box::new(Sphere::default()),
            Box::new(Graph::default()),
            Box::new(TiltedPlane::default()),
        ];
        for p in &patches {
            let f = surf_frames(p.as_ref(), &x, Deriv::Analytic).unwrap();
            let direct = f.curl_s_tensor(&t);
            assert!((direct - f.curl_s_tensor_definition(&t)).max_abs() < 1e-12);
            assert!((direct - f.curl_s_tensor_covariant(&t)).max_abs() < 1e-12);
            assert!((direct - f.curl_s_tensor_mixed(&t)).max_abs() < 1e-12);
            assert!((direct - f.curl_s_rowwise_covariant(&t)).max_abs() < 1e-12);
            assert!((direct - f.curl_s_rowwise_contravariant(&t)).max_abs() < 1e-12);
            let re = f.tensor_derivative_reassembled(&t);
            for g in 0..2 {
                assert!((re[g] - t.d[g]).max_abs() < 1e-12);
            }
            let v = Jet {
                value: t.value.row(0),
                d: [t.d[0].row(0), t.d[1].row(0)],
            };
            assert!((f.curl_s_vec(&v) - f.curl_s_vec_components(&v)).max_abs() < 1e-12);
            let rv = f.vector_derivative_reassembled(&v);
            for g in 0..2 {
                assert!((rv[g] - v.d[g]).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_rotation_field_curl() {
        let f = surf_frames(&Plane::<f64>::default(), &[0.3, 0.6], Deriv::Analytic).unwrap();
        let v = Jet {
            value: Vec3([-0.6, 0.3, 0.0]),
            d: [Vec3([0.0, 1.0, 0.0]), Vec3([-1.0, 0.0, 0.0])],
        };
        let e = Vec3([0.0, 0.0, 2.0]);
        assert!((f.curl_s_vec(&v) - e).max_abs() < 1e-15);
        assert!((f.curl_s_vec_components(&v) - e).max_abs() < 1e-15);
        assert!((f.curl_s_vec_definition(&v) - e).max_abs() < 1e-15);
    }
}
