//! Evaluatable fields over a parameter box and their partial derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{Mat3, Vec3};

/// Values a field may take: anything that forms a real vector space.
pub trait Linear<T: Real>: Copy + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn scale(self, s: T) -> Self;
    fn max_abs(&self) -> T;

    fn sub(self, o: Self) -> Self {
        self.add(o.scale(-T::one()))
    }
}

impl<T: Real> Linear<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn max_abs(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Linear<T> for Vec3<T> {
    fn zero() -> Self {
        Vec3::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: T) -> Self {
        Vec3::scale(self, s)
    }
    fn max_abs(&self) -> T {
        Vec3::max_abs(*self)
    }
}

impl<T: Real> Linear<T> for Mat3<T> {
    fn zero() -> Self {
        Mat3::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: T) -> Self {
        Mat3::scale(&self, s)
    }
    fn max_abs(&self) -> T {
        Mat3::max_abs(self)
    }
}

/// Axis-aligned parameter box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain<T, const D: usize> {
    pub lo: [T; D],
    pub hi: [T; D],
}

impl<T: Real, const D: usize> BoxDomain<T, D> {
    pub fn new(lo: [T; D], hi: [T; D]) -> Self {
        BoxDomain { lo, hi }
    }

    pub fn unit() -> Self {
        BoxDomain {
            lo: [T::zero(); D],
            hi: [T::one(); D],
        }
    }

    /// True if `x` lies in the box shrunk by `margin[i]` along each axis.
    pub fn contains_with_margin(&self, x: &[T; D], margin: &[T; D]) -> bool {
        (0..D).all(|i| x[i] >= self.lo[i] + margin[i] && x[i] <= self.hi[i] - margin[i])
    }

    pub fn check(&self, x: &[T; D], margin: &[T; D]) -> Result<()> {
        if self.contains_with_margin(x, margin) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                point: x.iter().map(|c| c.as_f64()).collect(),
            })
        }
    }

    /// Maps `u ∈ [0,1]^D` affinely into the box shrunk by `inset` (a fraction of each side).
    pub fn lerp(&self, u: &[T; D], inset: T) -> [T; D] {
        let mut x = [T::zero(); D];
        for i in 0..D {
            let w = self.hi[i] - self.lo[i];
            let lo = self.lo[i] + w * inset;
            let span = w * (T::one() - T::two() * inset);
            x[i] = lo + span * u[i];
        }
        x
    }
}

/// A smooth field over a `D`-dimensional parameter box.
///
/// Implementations may supply analytic partial derivatives; when they do not,
/// [`Deriv::CentralFd`] is the only usable strategy.
pub trait Field<T: Real, const D: usize>: Send + Sync {
    type Value: Linear<T>;

    fn value(&self, x: &[T; D]) -> Self::Value;

    /// Analytic `∂ᵢ` at `x`, if known.
    fn partial(&self, _x: &[T; D], _i: usize) -> Option<Self::Value> {
        None
    }
}

pub type DynField<T, const D: usize, V> = Arc<dyn Field<T, D, Value = V>>;

/// Scalar, vector, tensor and rotation fields over three parameters.
pub type ScalarField3<T> = DynField<T, 3, T>;
pub type VectorField3<T> = DynField<T, 3, Vec3<T>>;
pub type TensorField3<T> = DynField<T, 3, Mat3<T>>;
/// Rotation-valued fields are tensor fields whose values lie on SO(3).
pub type RotationField3<T> = DynField<T, 3, Mat3<T>>;

pub type ScalarField2<T> = DynField<T, 2, T>;
pub type VectorField2<T> = DynField<T, 2, Vec3<T>>;
pub type TensorField2<T> = DynField<T, 2, Mat3<T>>;
pub type RotationField2<T> = DynField<T, 2, Mat3<T>>;

/// Derivative strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Deriv<T> {
    /// Use the field's analytic partials; fail if absent.
    Analytic,
    /// Second-order central differences. `None` selects `h = ε^(1/3)·max(1,|xᵢ|)`.
    CentralFd { step: Option<T> },
}

impl<T: Real> Deriv<T> {
    pub fn fd() -> Self {
        Deriv::CentralFd { step: None }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Deriv::Analytic)
    }

    /// First-derivative step at coordinate value `xi`.
    pub fn step(&self, xi: T) -> T {
        match self {
            Deriv::CentralFd { step: Some(h) } => *h,
            _ => first_step(xi),
        }
    }

    /// Margin the evaluation point must keep from the domain boundary.
    pub fn margin<const D: usize>(&self, x: &[T; D]) -> [T; D] {
        match self {
            Deriv::Analytic => [T::zero(); D],
            Deriv::CentralFd { .. } => {
                let mut m = [T::zero(); D];
                for i in 0..D {
                    m[i] = T::two() * self.step(x[i]).max(second_step(x[i]));
                }
                m
            }
        }
    }
}

/// `ε^(1/3)·max(1,|x|)`, the balanced step for first-order central differences.
#[inline]
pub fn first_step<T: Real>(xi: T) -> T {
    T::epsilon().cbrt() * T::one().max(xi.abs())
}

/// `ε^(1/4)·max(1,|x|)`, the balanced step for second derivatives by nested differences.
#[inline]
pub fn second_step<T: Real>(xi: T) -> T {
    T::epsilon().sqrt().sqrt() * T::one().max(xi.abs())
}

/// Central difference of `f` along axis `i` with step `h`.
pub fn central_difference<T: Real, V: Linear<T>, const D: usize>(
    f: impl Fn(&[T; D]) -> V,
    x: &[T; D],
    i: usize,
    h: T,
) -> V {
    let mut xp = *x;
    let mut xm = *x;
    xp[i] += h;
    xm[i] -= h;
    // the realised step can differ from h by rounding
    let dh = xp[i] - xm[i];
    f(&xp).sub(f(&xm)).scale(T::one() / dh)
}

/// Value and first partials of a field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<V, const D: usize> {
    pub value: V,
    pub d: [V; D],
}

impl<V: Copy, const D: usize> Jet<V, D> {
    pub fn constant<T: Real>(value: V) -> Self
    where
        V: Linear<T>,
    {
        Jet {
            value,
            d: [V::zero(); D],
        }
    }
}

/// `∂ᵢ f(x)` under the given strategy.
pub fn partial<T, F, const D: usize>(f: &F, x: &[T; D], i: usize, deriv: Deriv<T>) -> Result<F::Value>
where
    T: Real,
    F: Field<T, D> + ?Sized,
{
    match deriv {
        Deriv::Analytic => f.partial(x, i).ok_or(Error::NoAnalyticDerivative { what: "field" }),
        Deriv::CentralFd { .. } => Ok(central_difference(|y| f.value(y), x, i, deriv.step(x[i]))),
    }
}

/// Value and all first partials of `f` at `x`.
pub fn jet<T, F, const D: usize>(f: &F, x: &[T; D], deriv: Deriv<T>) -> Result<Jet<F::Value, D>>
where
    T: Real,
    F: Field<T, D> + ?Sized,
{
    let value = f.value(x);
    let mut d = [<F::Value as Linear<T>>::zero(); D];
    for (i, di) in d.iter_mut().enumerate() {
        *di = partial(f, x, i, deriv)?;
    }
    Ok(Jet { value, d })
}

/// Field defined by closures; the partial closure is optional.
pub struct FnField<T, const D: usize, V, F, G = fn(&[T; D], usize) -> V>
where
    T: Real,
{
    value: F,
    partial: Option<G>,
    _marker: std::marker::PhantomData<fn(T) -> V>,
}

impl<T, const D: usize, V, F> FnField<T, D, V, F>
where
    T: Real,
    V: Linear<T>,
    F: Fn(&[T; D]) -> V + Send + Sync,
{
    pub fn new(value: F) -> Self {
        FnField {
            value,
            partial: None,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T, const D: usize, V, F, G> FnField<T, D, V, F, G>
where
    T: Real,
    V: Linear<T>,
    F: Fn(&[T; D]) -> V + Send + Sync,
    G: Fn(&[T; D], usize) -> V + Send + Sync,
{
    pub fn with_partial(value: F, partial: G) -> Self {
        FnField {
            value,
            partial: Some(partial),
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T, const D: usize, V, F, G> Field<T, D> for FnField<T, D, V, F, G>
where
    T: Real,
    V: Linear<T>,
    F: Fn(&[T; D]) -> V + Send + Sync,
    G: Fn(&[T; D], usize) -> V + Send + Sync,
{
    type Value = V;

    fn value(&self, x: &[T; D]) -> V {
        (self.value)(x)
    }

    fn partial(&self, x: &[T; D], i: usize) -> Option<V> {
        self.partial.as_ref().map(|p| p(x, i))
    }
}

/// Constant field.
#[derive(Clone, Copy, Debug)]
pub struct ConstField<V>(pub V);

impl<T: Real, const D: usize, V: Linear<T>> Field<T, D> for ConstField<V> {
    type Value = V;

    fn value(&self, _x: &[T; D]) -> V {
        self.0
    }

    fn partial(&self, _x: &[T; D], _i: usize) -> Option<V> {
        Some(V::zero())
    }
}

/// Checks that a sampled rotation value is within `tol` of SO(3).
pub fn check_rotation<T: Real>(q: &Mat3<T>, tol: T) -> Result<()> {
    let drift = q.orthogonality_defect();
    if drift <= tol && q.det() > T::zero() {
        Ok(())
    } else {
        Err(Error::NotARotation { drift: drift.as_f64() })
    }
}

/// Drift tolerance before a rotation field is rejected, at `f64`.
pub const ROTATION_DRIFT_TOL: f64 = 1e-8;

/// [`ROTATION_DRIFT_TOL`], widened to `1000 ε` for coarser scalars.
pub fn rotation_drift_tol<T: Real>() -> T {
    crate::tensor::precision_tol(ROTATION_DRIFT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_matches_analytic_on_polynomial() {
        let f = FnField::with_partial(
            |x: &[f64; 3]| x[0] * x[1] * x[1] + x[2].powi(3),
            |x: &[f64; 3], i| match i {
                0 => x[1] * x[1],
                1 => 2.0 * x[0] * x[1],
                _ => 3.0 * x[2] * x[2],
            },
        );
        let x = [0.3, -0.7, 1.1];
        let a = jet(&f, &x, Deriv::Analytic).unwrap();
        let n = jet(&f, &x, Deriv::fd()).unwrap();
        for i in 0..3 {
            assert!((a.d[i] - n.d[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn analytic_strategy_requires_partials() {
        let f = FnField::new(|x: &[f64; 2]| x[0]);
        assert!(matches!(
            jet(&f, &[0.5, 0.5], Deriv::Analytic),
            Err(Error::NoAnalyticDerivative { .. })
        ));
        assert!(jet(&f, &[0.5, 0.5], Deriv::fd()).is_ok());
    }

    #[test]
    fn domain_margin_check() {
        let b = BoxDomain::<f64, 2>::unit();
        assert!(b.check(&[0.5, 0.5], &[0.1, 0.1]).is_ok());
        assert!(matches!(
            b.check(&[0.05, 0.5], &[0.1, 0.1]),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
