//! Coefficient arithmetic shared by the conformal-block formulas.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{PvError, Result};
use crate::scalar::{cabs, Real};

/// Relative size below which a float denominator counts as zero.
pub const POLE_THRESHOLD: f64 = 1e-10;

/// A commutative field-like coefficient type: complex doubles, exact
/// rationals, or Laurent series over either.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Rough size, used for pole detection and diagnostics.
    fn magnitude(&self) -> f64;
    /// True when `self` should be treated as zero relative to `scale`.
    fn is_negligible(&self, scale: f64) -> bool;
    fn try_inv(&self) -> Result<Self>;
    /// True for exact arithmetic.
    fn is_exact() -> bool;
    /// Unit roundoff; zero for exact arithmetic.
    fn epsilon() -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
    fn try_div(&self, other: &Self) -> Result<Self> {
        Ok(self.clone() * other.try_inv()?)
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl<T: Real> Coefficient for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn one() -> Self {
        Complex::new(T::one(), T::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(T::from_ratio(num as i128, den as i128), T::zero())
    }
    fn magnitude(&self) -> f64 {
        cabs(*self).to_f64()
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.magnitude() <= POLE_THRESHOLD * scale
    }
    fn try_inv(&self) -> Result<Self> {
        if self.re == T::zero() && self.im == T::zero() {
            return Err(PvError::NonInvertible { reason: "division by complex zero".into() });
        }
        Ok(self.inv())
    }
    fn is_exact() -> bool {
        false
    }
    fn epsilon() -> f64 {
        T::epsilon()
    }
}

impl Coefficient for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn try_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(PvError::NonInvertible { reason: "division by rational zero".into() });
        }
        Ok(self.recip())
    }
    fn is_exact() -> bool {
        true
    }
    fn epsilon() -> f64 {
        0.0
    }
}

/// Rational as a complex double.
pub fn rational_to_c64(q: &BigRational) -> Complex64 {
    Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
}

/// Generalized binomial `x(x-1)...(x-k+1)/k!`.
pub fn gen_binomial<F: Coefficient>(x: &F, k: usize) -> F {
    let mut acc = F::one();
    for j in 0..k {
        acc = acc * (x.clone() - F::from_int(j as i64)) * F::from_ratio(1, j as i64 + 1);
    }
    acc
}

/// Rising factorial `a(a+1)...(a+n-1)`.
pub fn pochhammer<F: Coefficient>(a: &F, n: usize) -> F {
    let mut acc = F::one();
    for j in 0..n {
        acc = acc * (a.clone() + F::from_int(j as i64));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binomial(&q(5, 1), 2), q(10, 1));
        assert_eq!(gen_binomial(&q(-1, 1), 3), q(-1, 1));
        assert_eq!(gen_binomial(&q(1, 2), 2), q(-1, 8));
        assert_eq!(gen_binomial(&q(7, 3), 0), q(1, 1));
        let c = gen_binomial(&Complex64::new(0.5, 0.0), 2);
        assert!((c - Complex64::new(-0.125, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pochhammer_products() {
        assert_eq!(pochhammer(&q(3, 1), 0), q(1, 1));
        assert_eq!(pochhammer(&q(1, 1), 5), q(120, 1));
        assert_eq!(pochhammer(&q(-2, 1), 3), q(0, 1));
    }

    #[test]
    fn inverses() {
        assert!(BigRational::from_ratio(0, 1).try_inv().is_err());
        assert_eq!(q(2, 3).try_inv().unwrap(), q(3, 2));
        assert!(Complex64::new(0.0, 0.0).try_inv().is_err());
    }
}
