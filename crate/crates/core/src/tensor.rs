//! Small fixed-size tensor algebra: vectors, second-order tensors, the
//! alternator, rotations and unit quaternions.
//!
//! `Mat3` acts on column vectors from the left and the dyad `u ⊗ v` maps
//! `w ↦ u (v · w)`. Components are stored row-major, so row `i` is the output
//! direction and column `j` the input direction.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::{eps3, Real};

/// Skew tolerance for [`axl`].
pub const SKEW_TOL: f64 = 1e-12;
/// Orthogonality tolerance for [`Rot3`].
pub const ROT_TOL: f64 = 1e-12;
/// Determinant floor for [`polar_factor`].
pub const POLAR_DET_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    /// Cartesian unit vector `e_i` (0-based).
    #[inline]
    pub fn unit(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = T::one();
        v
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3(v.map(T::lit))
    }

    pub fn to_f64(self) -> [f64; 3] {
        self.0.map(T::as_f64)
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Vec3(self.0.map(|c| c * s))
    }

    /// Dyadic product `self ⊗ o`.
    #[inline]
    pub fn outer(self, o: Self) -> Mat3<T> {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[i] * o.0[j];
            }
        }
        Mat3(m)
    }

    /// `self × T`, i.e. `[self]× T`, acting on the first slot of the tensor.
    #[inline]
    pub fn cross_tensor(self, t: &Mat3<T>) -> Mat3<T> {
        skew_from_axial(self) * *t
    }

    pub fn max_abs(self) -> T {
        self.0.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl<T: Real> Mat3<T> {
    #[inline]
    pub fn zero() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    #[inline]
    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    #[inline]
    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Mat3([[a, z, z], [z, b, z], [z, z, c]])
    }

    #[inline]
    pub fn from_rows(r: [Vec3<T>; 3]) -> Self {
        Mat3([r[0].0, r[1].0, r[2].0])
    }

    #[inline]
    pub fn from_cols(c: [Vec3<T>; 3]) -> Self {
        Self::from_rows(c).transpose()
    }

    pub fn from_f64(m: [[f64; 3]; 3]) -> Self {
        Mat3(m.map(|r| r.map(T::lit)))
    }

    pub fn to_f64(self) -> [[f64; 3]; 3] {
        self.0.map(|r| r.map(T::as_f64))
    }

    #[inline]
    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3(self.0[i])
    }

    #[inline]
    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor matrix, so that `A⁻¹ = cof(A)ᵀ / det A`.
    pub fn cofactor(&self) -> Self {
        let r0 = self.row(0);
        let r1 = self.row(1);
        let r2 = self.row(2);
        Self::from_rows([r1.cross(r2), r2.cross(r0), r0.cross(r1)])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose().scale(T::one() / d))
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Mat3(self.0.map(|r| r.map(|c| c * s)))
    }

    /// Frobenius inner product `A : B = tr(AᵀB)`.
    #[inline]
    pub fn inner(&self, o: &Self) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * o.0[i][j];
            }
        }
        s
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.inner(self)
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.is_finite())
    }

    #[inline]
    pub fn sym(&self) -> Self {
        (*self + self.transpose()).scale(T::half())
    }

    #[inline]
    pub fn skew(&self) -> Self {
        (*self - self.transpose()).scale(T::half())
    }

    /// Deviatoric part `X − (tr X / 3) 1₃`.
    #[inline]
    pub fn dev(&self) -> Self {
        *self - Self::identity().scale(self.trace() / T::three())
    }

    /// `T × w`, acting on the second slot: `(u ⊗ v) × w = u ⊗ (v × w)`.
    #[inline]
    pub fn cross_vec(&self, w: Vec3<T>) -> Self {
        Self::from_rows([self.row(0).cross(w), self.row(1).cross(w), self.row(2).cross(w)])
    }

    /// Applies the transpose: `Aᵀ v`.
    #[inline]
    pub fn tmul(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        let mut r = [T::zero(); 3];
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = m[0][j] * v.0[0] + m[1][j] * v.0[1] + m[2][j] * v.0[2];
        }
        Vec3(r)
    }

    /// `AᵀB` without forming the transpose.
    #[inline]
    pub fn tmul_mat(&self, b: &Self) -> Self {
        let mut r = [[T::zero(); 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[0][i] * b.0[0][j] + self.0[1][i] * b.0[1][j] + self.0[2][i] * b.0[2][j];
            }
        }
        Mat3(r)
    }

    /// `|AᵀA − 1₃|`, the distance of an orthogonal candidate from O(3).
    pub fn orthogonality_defect(&self) -> T {
        (self.tmul_mat(self) - Self::identity()).norm()
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3(self.0.map(|c| -c))
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut r = self.0;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += o.0[i][j];
            }
        }
        Mat3(r)
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut r = self.0;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] -= o.0[i][j];
            }
        }
        Mat3(r)
    }
}

impl<T: Real> Neg for Mat3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> AddAssign for Mat3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Mat3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Mat3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    #[inline]
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut r = [[T::zero(); 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        Mat3(r)
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

/// Skew tensor `a × 1₃`, i.e. `[a]×` with `[a]× v = a × v`.
#[inline]
pub fn skew_from_axial<T: Real>(a: Vec3<T>) -> Mat3<T> {
    let z = T::zero();
    let [x, y, w] = a.0;
    Mat3([[z, -w, y], [w, z, -x], [-y, x, z]])
}

/// Axial vector of a skew tensor: `A v = axl(A) × v`.
pub fn axl<T: Real>(a: &Mat3<T>) -> Result<Vec3<T>> {
    let residual = (*a + a.transpose()).norm();
    if !(residual <= T::lit(SKEW_TOL)) {
        return Err(Error::NotSkew {
            residual: residual.as_f64(),
        });
    }
    Ok(axl_of_skew_part(a))
}

/// Axial vector of `skew(A)`, no precondition.
#[inline]
pub fn axl_of_skew_part<T: Real>(a: &Mat3<T>) -> Vec3<T> {
    let m = &a.0;
    Vec3([
        (m[2][1] - m[1][2]) * T::half(),
        (m[0][2] - m[2][0]) * T::half(),
        (m[1][0] - m[0][1]) * T::half(),
    ])
}

/// Additive split of a second-order tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split<T> {
    pub sym: Mat3<T>,
    pub skew: Mat3<T>,
    pub dev3sym: Mat3<T>,
    pub trace: T,
}

pub fn split<T: Real>(x: &Mat3<T>) -> Split<T> {
    let sym = x.sym();
    Split {
        sym,
        skew: x.skew(),
        dev3sym: sym.dev(),
        trace: x.trace(),
    }
}

/// `T × w` with the dyad rule `(u ⊗ v) × w = u ⊗ (v × w)`.
#[inline]
pub fn tensor_cross_vector<T: Real>(t: &Mat3<T>, w: Vec3<T>) -> Mat3<T> {
    t.cross_vec(w)
}

/// Third-order tensor with Cartesian components `B_{ijk}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor3<T>(pub [[[T; 3]; 3]; 3]);

impl<T: Real> Tensor3<T> {
    pub fn zero() -> Self {
        Tensor3([[[T::zero(); 3]; 3]; 3])
    }

    /// The alternating tensor `ε = −1₃ × 1₃` with components `e_{ijk}`.
    pub fn alternator() -> Self {
        let mut b = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    b.0[i][j][k] = eps3(i, j, k);
                }
            }
        }
        b
    }

    /// `u ⊗ v ⊗ w`.
    pub fn triad(u: Vec3<T>, v: Vec3<T>, w: Vec3<T>) -> Self {
        let mut b = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    b.0[i][j][k] = u[i] * v[j] * w[k];
                }
            }
        }
        b
    }

    pub fn add_scaled(&mut self, s: T, o: &Self) {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    self.0[i][j][k] += s * o.0[i][j][k];
                }
            }
        }
    }

    /// `B : T = B_{ijk} T_{jk} e_i`, contraction over the last two slots.
    pub fn double_dot(&self, t: &Mat3<T>) -> Vec3<T> {
        let mut r = Vec3::zero();
        for i in 0..3 {
            let mut s = T::zero();
            for j in 0..3 {
                for k in 0..3 {
                    s += self.0[i][j][k] * t.0[j][k];
                }
            }
            r.0[i] = s;
        }
        r
    }

    /// `B v`, contraction of the last slot with a vector.
    pub fn dot_vec(&self, v: Vec3<T>) -> Mat3<T> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][j][k] * v[k]).sum();
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().flatten().fold(T::zero(), |m, c| m.max(c.abs()))
    }
}

/// `ε : A` for the Cartesian alternator.
pub fn double_dot<T: Real>(b: &Tensor3<T>, t: &Mat3<T>) -> Vec3<T> {
    b.double_dot(t)
}

/// A tensor in SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot3<T>(Mat3<T>);

/// `tol` at `f64`, widened to `1000 ε` for coarser scalars.
pub fn precision_tol<T: Real>(tol: f64) -> T {
    T::lit(tol).max(T::epsilon() * T::lit(1000.0))
}

impl<T: Real> Rot3<T> {
    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    /// Checks `|RᵀR − 1₃| ≤ tol` and `det R > 0`.
    pub fn new_with_tol(m: Mat3<T>, tol: T) -> Result<Self> {
        let drift = m.orthogonality_defect();
        if !(drift <= tol) || m.det() <= T::zero() {
            return Err(Error::NotARotation { drift: drift.as_f64() });
        }
        Ok(Rot3(m))
    }

    pub fn new(m: Mat3<T>) -> Result<Self> {
        Self::new_with_tol(m, precision_tol(ROT_TOL))
    }

    /// Rotation by `angle` about the unit vector `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        Rot3(Quat::from_axis_angle(axis, angle).to_mat())
    }

    #[inline]
    pub fn mat(&self) -> &Mat3<T> {
        &self.0
    }

    #[inline]
    pub fn into_mat(self) -> Mat3<T> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rot3(self.0.transpose())
    }
}

/// Unit quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<T> {
    pub w: T,
    pub v: Vec3<T>,
}

impl<T: Real> Quat<T> {
    pub fn identity() -> Self {
        Quat {
            w: T::one(),
            v: Vec3::zero(),
        }
    }

    /// `axis` need not be normalized; a zero axis gives the identity.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let n = axis.norm();
        if n == T::zero() {
            return Self::identity();
        }
        let h = angle * T::half();
        Quat {
            w: h.cos(),
            v: axis.scale(h.sin() / n),
        }
    }

    /// Exponential of a rotation vector: rotation by `|θ|` about `θ/|θ|`.
    pub fn exp(theta: Vec3<T>) -> Self {
        let angle = theta.norm();
        if angle < T::epsilon() {
            let q = Quat {
                w: T::one(),
                v: theta.scale(T::half()),
            };
            return q.normalized();
        }
        Self::from_axis_angle(theta, angle)
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.v.norm_squared()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Quat {
            w: self.w / n,
            v: self.v.scale(T::one() / n),
        }
    }

    /// Hamilton product.
    pub fn mul(&self, o: &Self) -> Self {
        Quat {
            w: self.w * o.w - self.v.dot(o.v),
            v: o.v.scale(self.w) + self.v.scale(o.w) + self.v.cross(o.v),
        }
    }

    pub fn to_mat(&self) -> Mat3<T> {
        let q = self.normalized();
        let (w, [x, y, z]) = (q.w, q.v.0);
        let one = T::one();
        let two = T::two();
        Mat3([
            [
                one - two * (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                one - two * (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                one - two * (x * x + y * y),
            ],
        ])
    }
}

const POLAR_MAX_ITER: usize = 100;

/// Orthogonal factor `R` of the polar decomposition `F = R U`.
///
/// Scaled Newton iteration `X ← ½(ζX + ζ⁻¹X⁻ᵀ)` with determinant scaling,
/// stopped at `|Xₖ₊₁ − Xₖ| < 1e−14` or after 100 steps.
pub fn polar_factor<T: Real>(f: &Mat3<T>) -> Result<Rot3<T>> {
    let det = f.det();
    if !(det > T::lit(POLAR_DET_MIN)) {
        return Err(Error::Degenerate { det: det.as_f64() });
    }
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(16.0));
    let mut x = *f;
    for _ in 0..POLAR_MAX_ITER {
        let inv = match x.inverse() {
            Some(i) => i,
            None => return Err(Error::Degenerate { det: x.det().as_f64() }),
        };
        let d = x.det().abs();
        let diff_scale = (x - inv.transpose()).norm();
        // determinant scaling only while far from convergence
        let zeta = if diff_scale > T::lit(1e-2) {
            d.powf(-T::one() / T::three())
        } else {
            T::one()
        };
        let next = (x.scale(zeta) + inv.transpose().scale(T::one() / zeta)).scale(T::half());
        let step = (next - x).norm();
        x = next;
        if step < tol {
            break;
        }
    }
    Rot3::new_with_tol(x, precision_tol(1e-10))
}

/// Derivative of the polar factor `R = polar(F)` along `dF`.
///
/// With `U = RᵀF` and `RᵀdR = [w]×`, the skew part of `RᵀdF` gives
/// `(tr U 1₃ − U) w = 2 axl(skew(RᵀdF))`.
pub fn polar_factor_derivative<T: Real>(r: &Rot3<T>, f: &Mat3<T>, df: &Mat3<T>) -> Result<Mat3<T>> {
    let u = r.mat().tmul_mat(f).sym();
    let k = Mat3::identity().scale(u.trace()) - u;
    let rhs = axl_of_skew_part(&r.mat().tmul_mat(df)).scale(T::two());
    let kinv = k.inverse().ok_or(Error::Degenerate { det: k.det().as_f64() })?;
    let w = kinv * rhs;
    Ok(*r.mat() * skew_from_axial(w))
}
