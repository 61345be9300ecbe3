//! Curvilinear charts in three dimensions and the Curl operator.
//!
//! The Curl of a tensor field is taken row-wise: `(Curl T)ᵀc = curl(Tᵀc)` for
//! every constant `c`. The transposed convention is only available through
//! [`transposed_convention`].

use crate::error::{Error, Result};
use crate::field::{central_difference, jet, second_step, BoxDomain, Deriv, Field, Jet};
use crate::scalar::{eps3, Real};
use crate::tensor::{Mat3, Tensor3, Vec3};

/// A parametrisation `Θ: Ω ⊂ ℝ³ → ℝ³` of a reference domain.
pub trait Chart3<T: Real>: Send + Sync {
    fn domain(&self) -> BoxDomain<T, 3>;

    fn map(&self, x: &[T; 3]) -> Vec3<T>;

    /// Analytic `Θ,ᵢ`.
    fn tangent(&self, _x: &[T; 3], _i: usize) -> Option<Vec3<T>> {
        None
    }

    /// Analytic `Θ,ᵢⱼ`.
    fn second(&self, _x: &[T; 3], _i: usize, _j: usize) -> Option<Vec3<T>> {
        None
    }
}

/// Pointwise geometry of a chart.
#[derive(Clone, Copy, Debug)]
pub struct ChartFrames<T> {
    pub point: [T; 3],
    /// Covariant basis `gᵢ = Θ,ᵢ`.
    pub cov: [Vec3<T>; 3],
    /// Contravariant basis `gʲ` with `gʲ·gᵢ = δʲᵢ`.
    pub contra: [Vec3<T>; 3],
    /// Metric components `gᵢⱼ`.
    pub metric: [[T; 3]; 3],
    /// `g = det(gᵢⱼ)`.
    pub det_g: T,
    /// `christoffel[r][i][j] = Γʳᵢⱼ = gᵢ,ⱼ · gʳ`.
    pub christoffel: [[[T; 3]; 3]; 3],
    /// `dcov[i][j] = gᵢ,ⱼ`.
    pub dcov: [[Vec3<T>; 3]; 3],
    /// `dcontra[i][j] = gⁱ,ⱼ`.
    pub dcontra: [[Vec3<T>; 3]; 3],
}

const DEGENERATE_G: f64 = 1e-12;

/// Geometry of `chart` at `x`.
pub fn frames_at<T: Real>(chart: &(impl Chart3<T> + ?Sized), x: &[T; 3], deriv: Deriv<T>) -> Result<ChartFrames<T>> {
    chart.domain().check(x, &deriv.margin(x))?;

    let mut cov = [Vec3::zero(); 3];
    let mut dcov = [[Vec3::zero(); 3]; 3];
    match deriv {
        Deriv::Analytic => {
            for i in 0..3 {
                cov[i] = chart
                    .tangent(x, i)
                    .ok_or(Error::NoAnalyticDerivative { what: "chart tangent" })?;
                for j in 0..3 {
                    dcov[i][j] = chart.second(x, i, j).ok_or(Error::NoAnalyticDerivative {
                        what: "chart second derivative",
                    })?;
                }
            }
        }
        Deriv::CentralFd { .. } => {
            for (i, gi) in cov.iter_mut().enumerate() {
                *gi = central_difference(|y| chart.map(y), x, i, deriv.step(x[i]));
            }
            for i in 0..3 {
                for j in i..3 {
                    let d = second_difference(chart, x, i, j);
                    dcov[i][j] = d;
                    dcov[j][i] = d;
                }
            }
        }
    }
    assemble_frames(*x, cov, dcov)
}

/// `Θ,ᵢⱼ` by the four-point formula with step `ε^(1/4)`.
fn second_difference<T: Real>(chart: &(impl Chart3<T> + ?Sized), x: &[T; 3], i: usize, j: usize) -> Vec3<T> {
    let hi = second_step(x[i]);
    let hj = second_step(x[j]);
    let at = |si: T, sj: T| {
        let mut y = *x;
        y[i] += si * hi;
        y[j] += sj * hj;
        chart.map(&y)
    };
    let one = T::one();
    let sum = at(one, one) - at(one, -one) - at(-one, one) + at(-one, -one);
    sum.scale(T::one() / (T::lit(4.0) * hi * hj))
}

fn assemble_frames<T: Real>(point: [T; 3], cov: [Vec3<T>; 3], dcov: [[Vec3<T>; 3]; 3]) -> Result<ChartFrames<T>> {
    let mut metric = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            metric[i][j] = cov[i].dot(cov[j]);
        }
    }
    let jac = Mat3::from_cols(cov);
    let det_j = jac.det();
    let det_g = det_j * det_j;
    if !(det_j > T::zero() && det_g > T::lit(DEGENERATE_G)) {
        return Err(Error::DegenerateChart { g: det_g.as_f64() });
    }
    let inv = jac.inverse().ok_or(Error::DegenerateChart { g: det_g.as_f64() })?;
    let contra = [inv.row(0), inv.row(1), inv.row(2)];

    let mut christoffel = [[[T::zero(); 3]; 3]; 3];
    for (r, cr) in christoffel.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                cr[i][j] = dcov[i][j].dot(contra[r]);
            }
        }
    }
    // gⁱ,ⱼ from d(J⁻¹) = −J⁻¹ dJ J⁻¹
    let mut dcontra = [[Vec3::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Vec3::zero();
            for r in 0..3 {
                acc -= contra[r].scale(contra[i].dot(dcov[r][j]));
            }
            dcontra[i][j] = acc;
        }
    }
    Ok(ChartFrames {
        point,
        cov,
        contra,
        metric,
        det_g,
        christoffel,
        dcov,
        dcontra,
    })
}

impl<T: Real> ChartFrames<T> {
    pub fn sqrt_g(&self) -> T {
        self.det_g.sqrt()
    }

    /// `ε_{ijk} = √g e_{ijk}`.
    pub fn eps_lower(&self, i: usize, j: usize, k: usize) -> T {
        self.sqrt_g() * eps3(i, j, k)
    }

    /// `εⁱʲᵏ = e_{ijk}/√g`.
    pub fn eps_upper(&self, i: usize, j: usize, k: usize) -> T {
        eps3::<T>(i, j, k) / self.sqrt_g()
    }

    /// `1₃ = gᵢ ⊗ gⁱ`.
    pub fn identity(&self) -> Mat3<T> {
        (0..3).fold(Mat3::zero(), |m, i| m + self.cov[i].outer(self.contra[i]))
    }

    /// Alternator assembled as `εⁱʲᵏ gᵢ ⊗ gⱼ ⊗ gₖ`.
    pub fn alternator(&self) -> Tensor3<T> {
        let mut b = Tensor3::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e = self.eps_upper(i, j, k);
                    if e != T::zero() {
                        b.add_scaled(e, &Tensor3::triad(self.cov[i], self.cov[j], self.cov[k]));
                    }
                }
            }
        }
        b
    }

    /// `curl v = −v,ᵢ × gⁱ`.
    pub fn curl_vec(&self, v: &Jet<Vec3<T>, 3>) -> Vec3<T> {
        (0..3).fold(Vec3::zero(), |acc, i| acc - v.d[i].cross(self.contra[i]))
    }

    /// `curl v = εⁱʲᵏ v_{j|i} gₖ` from covariant components.
    pub fn curl_vec_components(&self, v: &Jet<Vec3<T>, 3>) -> Vec3<T> {
        let comp: [T; 3] = std::array::from_fn(|k| v.value.dot(self.cov[k]));
        // dcomp[i][k] = v_{k,i}
        let dcomp: [[T; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|k| v.d[i].dot(self.cov[k]) + v.value.dot(self.dcov[k][i])));
        let mut out = Vec3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let cd = dcomp[i][j] - (0..3).map(|r| self.christoffel[r][i][j] * comp[r]).sum::<T>();
                for k in 0..3 {
                    let e = self.eps_upper(i, j, k);
                    if e != T::zero() {
                        out += self.cov[k].scale(e * cd);
                    }
                }
            }
        }
        out
    }

    /// `(curl v)·c = div(v × c)` for the Cartesian basis `c`, with `div w = w,ᵢ·gⁱ`.
    pub fn curl_vec_definition(&self, v: &Jet<Vec3<T>, 3>) -> Vec3<T> {
        Vec3(std::array::from_fn(|c| {
            let e = Vec3::unit(c);
            (0..3).map(|i| v.d[i].cross(e).dot(self.contra[i])).sum()
        }))
    }

    /// `Curl T = −T,ᵢ × gⁱ`.
    pub fn curl_tensor(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        (0..3).fold(Mat3::zero(), |acc, i| acc - t.d[i].cross_vec(self.contra[i]))
    }

    /// Row-wise definition: row `c` of `Curl T` is `curl(Tᵀ e_c)`.
    pub fn curl_tensor_definition(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        let rows = std::array::from_fn(|c| {
            let e = Vec3::unit(c);
            let row = Jet {
                value: t.value.tmul(e),
                d: std::array::from_fn(|i| t.d[i].tmul(e)),
            };
            self.curl_vec_definition(&row)
        });
        Mat3::from_rows(rows)
    }

    /// `Curl T = εⁱʲᵏ T_{sj|i} gˢ ⊗ gₖ` from covariant components.
    pub fn curl_tensor_covariant(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        let g = &self.cov;
        let tg: [Vec3<T>; 3] = std::array::from_fn(|j| t.value * g[j]);
        let comp: [[T; 3]; 3] = std::array::from_fn(|s| std::array::from_fn(|j| g[s].dot(tg[j])));
        let mut out = Mat3::zero();
        for i in 0..3 {
            for s in 0..3 {
                for j in 0..3 {
                    let d = self.dcov[s][i].dot(tg[j]) + g[s].dot(t.d[i] * g[j]) + g[s].dot(t.value * self.dcov[j][i]);
                    let cd = d
                        - (0..3)
                            .map(|r| self.christoffel[r][i][s] * comp[r][j] + self.christoffel[r][i][j] * comp[s][r])
                            .sum::<T>();
                    for k in 0..3 {
                        let e = self.eps_upper(i, j, k);
                        if e != T::zero() {
                            out += self.contra[s].outer(g[k]).scale(e * cd);
                        }
                    }
                }
            }
        }
        out
    }

    /// `Curl T = εⁱʲᵏ Tˢ·ⱼ|ᵢ gₛ ⊗ gₖ` from mixed components.
    pub fn curl_tensor_mixed(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        let g = &self.cov;
        let gu = &self.contra;
        let tg: [Vec3<T>; 3] = std::array::from_fn(|j| t.value * g[j]);
        let comp: [[T; 3]; 3] = std::array::from_fn(|s| std::array::from_fn(|j| gu[s].dot(tg[j])));
        let mut out = Mat3::zero();
        for i in 0..3 {
            for s in 0..3 {
                for j in 0..3 {
                    let d =
                        self.dcontra[s][i].dot(tg[j]) + gu[s].dot(t.d[i] * g[j]) + gu[s].dot(t.value * self.dcov[j][i]);
                    let cd = d
                        + (0..3)
                            .map(|r| self.christoffel[s][i][r] * comp[r][j] - self.christoffel[r][i][j] * comp[s][r])
                            .sum::<T>();
                    for k in 0..3 {
                        let e = self.eps_upper(i, j, k);
                        if e != T::zero() {
                            out += g[s].outer(g[k]).scale(e * cd);
                        }
                    }
                }
            }
        }
        out
    }

    /// `Curl T = gⁱ ⊗ curl_cov(Tᵢ)` with rows `Tᵢ = Tᵀgᵢ`.
    pub fn curl_rowwise_covariant(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        let rows: [Vec3<T>; 3] = std::array::from_fn(|i| t.value.tmul(self.cov[i]));
        let mut out = Mat3::zero();
        for i in 0..3 {
            let mut curl = Vec3::zero();
            for j in 0..3 {
                let d = t.d[j].tmul(self.cov[i]) + t.value.tmul(self.dcov[i][j]);
                let cd = (0..3).fold(d, |acc, r| acc - rows[r].scale(self.christoffel[r][j][i]));
                curl -= cd.cross(self.contra[j]);
            }
            out += self.contra[i].outer(curl);
        }
        out
    }

    /// `Curl T = gᵢ ⊗ curl_cov(Tⁱ)` with rows `Tⁱ = Tᵀgⁱ`.
    pub fn curl_rowwise_contravariant(&self, t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
        let rows: [Vec3<T>; 3] = std::array::from_fn(|i| t.value.tmul(self.contra[i]));
        let mut out = Mat3::zero();
        for i in 0..3 {
            let mut curl = Vec3::zero();
            for j in 0..3 {
                let d = t.d[j].tmul(self.contra[i]) + t.value.tmul(self.dcontra[i][j]);
                let cd = (0..3).fold(d, |acc, r| acc + rows[r].scale(self.christoffel[i][r][j]));
                curl -= cd.cross(self.contra[j]);
            }
            out += self.cov[i].outer(curl);
        }
        out
    }
}

/// Cartesian `curl v = e_{ijk} v_{j,i} eₖ`; partials taken along Cartesian axes.
pub fn curl_vec_cartesian<T: Real>(v: &Jet<Vec3<T>, 3>) -> Vec3<T> {
    let mut out = Vec3::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[k] += eps3::<T>(i, j, k) * v.d[i][j];
            }
        }
    }
    out
}

/// Cartesian `Curl T = e_{ijk} T_{sj,i} eₛ ⊗ eₖ`.
pub fn curl_tensor_cartesian<T: Real>(t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
    let mut out = Mat3::zero();
    for s in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[(s, k)] += eps3::<T>(i, j, k) * t.d[i][(s, j)];
                }
            }
        }
    }
    out
}

/// Cartesian row-wise form: row `i` of `Curl T` is `curl` of row `i` of `T`.
pub fn curl_tensor_cartesian_rows<T: Real>(t: &Jet<Mat3<T>, 3>) -> Mat3<T> {
    let rows = std::array::from_fn(|i| {
        let row = Jet {
            value: t.value.row(i),
            d: std::array::from_fn(|a| t.d[a].row(i)),
        };
        curl_vec_cartesian(&row)
    });
    Mat3::from_rows(rows)
}

/// The transposed Curl convention used by some authors.
pub fn transposed_convention<T: Real>(curl: &Mat3<T>) -> Mat3<T> {
    curl.transpose()
}

/// `curl v` of a vector field at `x`.
pub fn curl_vec<T, F>(v: &F, chart: &(impl Chart3<T> + ?Sized), x: &[T; 3], deriv: Deriv<T>) -> Result<Vec3<T>>
where
    T: Real,
    F: Field<T, 3, Value = Vec3<T>> + ?Sized,
{
    let frames = frames_at(chart, x, deriv)?;
    Ok(frames.curl_vec(&jet(v, x, deriv)?))
}

/// `Curl T` of a tensor field at `x`.
pub fn curl_tensor<T, F>(t: &F, chart: &(impl Chart3<T> + ?Sized), x: &[T; 3], deriv: Deriv<T>) -> Result<Mat3<T>>
where
    T: Real,
    F: Field<T, 3, Value = Mat3<T>> + ?Sized,
{
    let frames = frames_at(chart, x, deriv)?;
    Ok(frames.curl_tensor(&jet(t, x, deriv)?))
}

/// Which components the component formula works from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Components {
    Covariant,
    Mixed,
}

/// `Curl T` via the covariant-derivative component formula.
pub fn curl_tensor_components<T, F>(
    t: &F,
    chart: &(impl Chart3<T> + ?Sized),
    x: &[T; 3],
    deriv: Deriv<T>,
    which: Components,
) -> Result<Mat3<T>>
where
    T: Real,
    F: Field<T, 3, Value = Mat3<T>> + ?Sized,
{
    let frames = frames_at(chart, x, deriv)?;
    let j = jet(t, x, deriv)?;
    Ok(match which {
        Components::Covariant => frames.curl_tensor_covariant(&j),
        Components::Mixed => frames.curl_tensor_mixed(&j),
    })
}

/// Both row-wise forms `(gⁱ ⊗ curl_cov Tᵢ, gᵢ ⊗ curl_cov Tⁱ)`.
pub fn curl_rowwise<T, F>(
    t: &F,
    chart: &(impl Chart3<T> + ?Sized),
    x: &[T; 3],
    deriv: Deriv<T>,
) -> Result<(Mat3<T>, Mat3<T>)>
where
    T: Real,
    F: Field<T, 3, Value = Mat3<T>> + ?Sized,
{
    let frames = frames_at(chart, x, deriv)?;
    let j = jet(t, x, deriv)?;
    Ok((frames.curl_rowwise_covariant(&j), frames.curl_rowwise_contravariant(&j)))
}

/// Identity chart `Θ(x) = x`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityChart<T> {
    pub domain: BoxDomain<T, 3>,
}

impl<T: Real> Default for IdentityChart<T> {
    fn default() -> Self {
        IdentityChart {
            domain: BoxDomain::unit(),
        }
    }
}

impl<T: Real> Chart3<T> for IdentityChart<T> {
    fn domain(&self) -> BoxDomain<T, 3> {
        self.domain
    }
    fn map(&self, x: &[T; 3]) -> Vec3<T> {
        Vec3(*x)
    }
    fn tangent(&self, _x: &[T; 3], i: usize) -> Option<Vec3<T>> {
        Some(Vec3::unit(i))
    }
    fn second(&self, _x: &[T; 3], _i: usize, _j: usize) -> Option<Vec3<T>> {
        Some(Vec3::zero())
    }
}

/// Diagonal affine chart `Θ(x) = (d₁x₁, d₂x₂, d₃x₃)`.
#[derive(Clone, Copy, Debug)]
pub struct AffineChart<T> {
    pub scale: [T; 3],
    pub domain: BoxDomain<T, 3>,
}

impl<T: Real> Chart3<T> for AffineChart<T> {
    fn domain(&self) -> BoxDomain<T, 3> {
        self.domain
    }
    fn map(&self, x: &[T; 3]) -> Vec3<T> {
        Vec3(std::array::from_fn(|i| self.scale[i] * x[i]))
    }
    fn tangent(&self, _x: &[T; 3], i: usize) -> Option<Vec3<T>> {
        Some(Vec3::unit(i).scale(self.scale[i]))
    }
    fn second(&self, _x: &[T; 3], _i: usize, _j: usize) -> Option<Vec3<T>> {
        Some(Vec3::zero())
    }
}

/// Cylindrical-type chart `Θ(x) = (x₁ cos x₂, x₁ sin x₂, x₃)`; requires `x₁ > 0`.
#[derive(Clone, Copy, Debug)]
pub struct CylindricalChart<T> {
    pub domain: BoxDomain<T, 3>,
}

impl<T: Real> Default for CylindricalChart<T> {
    fn default() -> Self {
        CylindricalChart {
            domain: BoxDomain::new(
                [T::lit(0.5), T::zero(), T::zero()],
                [T::lit(1.5), T::FRAC_PI_2(), T::one()],
            ),
        }
    }
}

impl<T: Real> Chart3<T> for CylindricalChart<T> {
    fn domain(&self) -> BoxDomain<T, 3> {
        self.domain
    }
    fn map(&self, x: &[T; 3]) -> Vec3<T> {
        Vec3([x[0] * x[1].cos(), x[0] * x[1].sin(), x[2]])
    }
    fn tangent(&self, x: &[T; 3], i: usize) -> Option<Vec3<T>> {
        let (s, c) = x[1].sin_cos();
        let z = T::zero();
        Some(match i {
            0 => Vec3([c, s, z]),
            1 => Vec3([-x[0] * s, x[0] * c, z]),
            _ => Vec3::unit(2),
        })
    }
    fn second(&self, x: &[T; 3], i: usize, j: usize) -> Option<Vec3<T>> {
        let (s, c) = x[1].sin_cos();
        let z = T::zero();
        Some(match (i.min(j), i.max(j)) {
            (0, 1) => Vec3([-s, c, z]),
            (1, 1) => Vec3([-x[0] * c, -x[0] * s, z]),
            _ => Vec3::zero(),
        })
    }
}

/// Non-orthogonal chart `Θ(x) = x + a (sin x₂, sin x₃, sin x₁)`.
#[derive(Clone, Copy, Debug)]
pub struct PerturbedChart<T> {
    pub amplitude: T,
    pub domain: BoxDomain<T, 3>,
}

impl<T: Real> Chart3<T> for PerturbedChart<T> {
    fn domain(&self) -> BoxDomain<T, 3> {
        self.domain
    }
    fn map(&self, x: &[T; 3]) -> Vec3<T> {
        let a = self.amplitude;
        Vec3([x[0] + a * x[1].sin(), x[1] + a * x[2].sin(), x[2] + a * x[0].sin()])
    }
    fn tangent(&self, x: &[T; 3], i: usize) -> Option<Vec3<T>> {
        let a = self.amplitude;
        // component k depends on x_{(k+1) mod 3}
        let k = (i + 2) % 3;
        Some(Vec3::unit(i) + Vec3::unit(k).scale(a * x[i].cos()))
    }
    fn second(&self, x: &[T; 3], i: usize, j: usize) -> Option<Vec3<T>> {
        if i != j {
            return Some(Vec3::zero());
        }
        let k = (i + 2) % 3;
        Some(Vec3::unit(k).scale(-self.amplitude * x[i].sin()))
    }
}
