//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar the kernel is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    #[inline]
    fn three() -> Self {
        Self::lit(3.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Levi-Civita symbol e_{ijk} for 0-based indices.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> i8 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// Levi-Civita symbol as a scalar.
#[inline]
pub fn eps3<T: Real>(i: usize, j: usize, k: usize) -> T {
    match levi_civita(i, j, k) {
        1 => T::one(),
        -1 => -T::one(),
        _ => T::zero(),
    }
}

/// Two-dimensional alternator e_{αβ}: e₁₂ = −e₂₁ = 1.
#[inline]
pub fn eps2<T: Real>(a: usize, b: usize) -> T {
    match (a, b) {
        (0, 1) => T::one(),
        (1, 0) => -T::one(),
        _ => T::zero(),
    }
}

#[inline]
pub fn kronecker<T: Real>(i: usize, j: usize) -> T {
    if i == j {
        T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternator_contraction_identity_exhaustive() {
        // Σⱼ e_{jsi} e_{jkr} = δ_{ks}δ_{ri} − δ_{rs}δ_{ki}
        for s in 0..3 {
            for i in 0..3 {
                for k in 0..3 {
                    for r in 0..3 {
                        let lhs: i32 = (0..3)
                            .map(|j| levi_civita(j, s, i) as i32 * levi_civita(j, k, r) as i32)
                            .sum();
                        let d = |a: usize, b: usize| (a == b) as i32;
                        let rhs = d(k, s) * d(r, i) - d(r, s) * d(k, i);
                        assert_eq!(lhs, rhs, "s={s} i={i} k={k} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn levi_civita_total_antisymmetry() {
        assert_eq!(levi_civita(0, 1, 2), 1);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    assert_eq!(e, -levi_civita(j, i, k));
                    assert_eq!(e, -levi_civita(i, k, j));
                    assert_eq!(e, -levi_civita(k, j, i));
                }
            }
        }
    }
}
