//! Real scalar types and the complex elementary functions built on them.
//!
//! [`Real`] is implemented for `f64` and for [`DoubleDouble`], an unevaluated
//! sum of two doubles carrying roughly 32 significant digits. Everything that
//! needs an extended-precision cross-check is written against `Real`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Num, NumAssign, One, Zero};

use crate::error::{PvError, Result};

/// Working precision of the special-function layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl FromStr for Precision {
    type Err = PvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" | "f64" => Ok(Precision::Double),
            "extended" | "dd" | "double-double" => Ok(Precision::Extended),
            other => Err(PvError::Config(format!("unknown precision '{other}'"))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => write!(f, "double"),
            Precision::Extended => write!(f, "extended"),
        }
    }
}

pub trait Real:
    Copy
    + fmt::Debug
    + PartialOrd
    + Num
    + NumAssign
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_i128(n: i128) -> Self;
    fn pi() -> Self;
    fn zeta_prime_m1() -> Self;
    /// Unit roundoff.
    fn epsilon() -> f64;
    /// Minimum |z| at which the Stirling-type series are used.
    fn asymptotic_radius() -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn floor(self) -> Self;

    fn from_ratio(num: i128, den: i128) -> Self {
        Self::from_i128(num) / Self::from_i128(den)
    }
    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
    fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_i128(n: i128) -> Self {
        n as f64
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn zeta_prime_m1() -> Self {
        -0.165_421_143_700_450_93
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn asymptotic_radius() -> f64 {
        10.0
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const DD_PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const DD_LN2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
const DD_ZETA_PRIME_M1: DoubleDouble =
    DoubleDouble { hi: -0.16542114370045094, lo: 1.0747835010305763e-17 };

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    fn mul_pow2(self, s: f64) -> Self {
        DoubleDouble { hi: self.hi * s, lo: self.lo * s }
    }

    fn sqr(self) -> Self {
        self * self
    }

    fn exp_dd(self) -> Self {
        if self.hi > 709.0 {
            return DoubleDouble::new(f64::INFINITY, 0.0);
        }
        if self.hi < -745.0 {
            return DoubleDouble::zero();
        }
        let k = (self.hi / DD_LN2.hi).round();
        let r = (self - DD_LN2 * DoubleDouble::from_f64(k)).mul_pow2(1.0 / 1024.0);
        // e^r - 1 by Taylor series, then undo the 2^-10 scaling by squaring.
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * r / DoubleDouble::from_f64(n);
            s += term;
            if term.hi == 0.0 || term.hi.abs() < 1e-36 * s.hi.abs() {
                break;
            }
        }
        for _ in 0..10 {
            s = s.mul_pow2(2.0) + s.sqr();
        }
        let e = s + DoubleDouble::one();
        // k lies in [-1075, 1023]; split to keep the scale factor finite.
        let k = k as i32;
        let half = k / 2;
        e.mul_pow2(2f64.powi(half)).mul_pow2(2f64.powi(k - half))
    }

    fn ln_dd(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::new(f64::NAN, 0.0);
        }
        let y = DoubleDouble::from_f64(self.hi.ln());
        // One Newton step on exp(y) = x doubles the number of correct digits.
        y + self * (-y).exp_dd() - DoubleDouble::one()
    }

    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r.sqr();
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            term = -term * r2 / DoubleDouble::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        let mut term = DoubleDouble::one();
        let mut c = DoubleDouble::one();
        let mut n = 0.0;
        loop {
            term = -term * r2 / DoubleDouble::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            c += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        (s, c)
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (DoubleDouble::new(f64::NAN, 0.0), DoubleDouble::new(f64::NAN, 0.0));
        }
        let half_pi = DD_PI.mul_pow2(0.5);
        let k = (self.hi / half_pi.hi).round();
        let r = self - half_pi * DoubleDouble::from_f64(k);
        let (s, c) = Self::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        DoubleDouble::from_parts(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        DoubleDouble::from_parts(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * DoubleDouble::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DoubleDouble::from_f64(q2);
        let q3 = r.hi / b.hi;
        DoubleDouble::from_parts(q1, q2) + DoubleDouble::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = self / b;
        let n = if q.hi < 0.0 { -(-q).floor() } else { q.floor() };
        self - b * n
    }
}

impl RemAssign for DoubleDouble {
    fn rem_assign(&mut self, b: Self) {
        *self = *self % b;
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, b: Self) {
        *self = *self / b;
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble { hi: 1.0, lo: 0.0 }
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DoubleDouble::from_f64)
    }
}

impl Real for DoubleDouble {
    fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn from_i128(n: i128) -> Self {
        let hi = n as f64;
        let rest = n - hi as i128;
        DoubleDouble::from_parts(hi, rest as f64)
    }
    fn pi() -> Self {
        DD_PI
    }
    fn zeta_prime_m1() -> Self {
        DD_ZETA_PRIME_M1
    }
    fn epsilon() -> f64 {
        1e-32
    }
    fn asymptotic_radius() -> f64 {
        13.0
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { DoubleDouble::zero() } else { DoubleDouble::new(f64::NAN, 0.0) };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = DoubleDouble::from_f64(ax);
        let corr = (self - ax_dd.sqr()).hi * (x * 0.5);
        let (s, e) = two_sum(ax, corr);
        DoubleDouble::from_parts(s, e)
    }
    fn exp(self) -> Self {
        self.exp_dd()
    }
    fn ln(self) -> Self {
        self.ln_dd()
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn sinh(self) -> Self {
        if self.hi.abs() < 0.1 {
            let x2 = self.sqr();
            let mut term = self;
            let mut s = self;
            let mut n = 1.0;
            loop {
                term = term * x2 / DoubleDouble::from_f64((n + 1.0) * (n + 2.0));
                n += 2.0;
                s += term;
                if term.hi == 0.0 || term.hi.abs() < 1e-36 * s.hi.abs() {
                    break;
                }
            }
            s
        } else {
            let e = self.exp_dd();
            (e - DoubleDouble::one() / e).mul_pow2(0.5)
        }
    }
    fn cosh(self) -> Self {
        let e = self.exp_dd();
        (e + DoubleDouble::one() / e).mul_pow2(0.5)
    }
    fn atan2(self, x: Self) -> Self {
        let th = DoubleDouble::from_f64(self.hi.atan2(x.hi));
        let (s, c) = th.sin_cos();
        // tan(alpha - th) is cubic-accurate for the residual angle.
        let num = self * c - x * s;
        let den = x * c + self * s;
        th + num / den
    }
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            DoubleDouble::from_parts(hi, self.lo.floor())
        } else {
            DoubleDouble { hi, lo: 0.0 }
        }
    }
}

/// Complex number over a [`Real`].
pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

pub fn to_c64<T: Real>(z: Cx<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<T: Real>(z: Complex<f64>) -> Cx<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

pub fn cabs<T: Real>(z: Cx<T>) -> T {
    let a = z.re.abs();
    let b = z.im.abs();
    let (m, n) = if a > b { (a, b) } else { (b, a) };
    if m.is_zero() {
        return m;
    }
    let r = n / m;
    m * (T::one() + r * r).sqrt()
}

pub fn cexp<T: Real>(z: Cx<T>) -> Cx<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// Principal logarithm, imaginary part in (-pi, pi].
pub fn cln<T: Real>(z: Cx<T>) -> Cx<T> {
    Complex::new(cabs(z).ln(), z.im.atan2(z.re))
}

/// Principal power `w^a = exp(a log w)`.
pub fn cpow<T: Real>(w: Cx<T>, a: Cx<T>) -> Cx<T> {
    cexp(a * cln(w))
}

pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    let r = cabs(z);
    if r.is_zero() {
        return z;
    }
    let half = T::from_f64(0.5);
    let re = ((r + z.re) * half).sqrt();
    let im = ((r - z.re) * half).sqrt();
    if z.im < T::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

pub fn csin<T: Real>(z: Cx<T>) -> Cx<T> {
    Complex::new(z.re.sin() * z.im.cosh(), z.re.cos() * z.im.sinh())
}

pub fn ccos<T: Real>(z: Cx<T>) -> Cx<T> {
    Complex::new(z.re.cos() * z.im.cosh(), -(z.re.sin() * z.im.sinh()))
}

/// `sin(pi z)` with the argument reduced modulo 2 first, so that it is exact
/// at integers.
pub fn csin_pi<T: Real>(z: Cx<T>) -> Cx<T> {
    let two = T::from_f64(2.0);
    let n = (z.re / two).floor() * two;
    let w = Complex::new(z.re - n, z.im);
    if w.im.is_zero() && (w.re.is_zero() || w.re == T::one()) {
        return Complex::new(T::zero(), T::zero());
    }
    csin(w * T::pi())
}

pub fn ccos_pi<T: Real>(z: Cx<T>) -> Cx<T> {
    let two = T::from_f64(2.0);
    let n = (z.re / two).floor() * two;
    let w = Complex::new(z.re - n, z.im);
    ccos(w * T::pi())
}

/// `exp(i pi z)`.
pub fn cexp_ipi<T: Real>(z: Cx<T>) -> Cx<T> {
    cexp(Complex::new(-z.im, z.re) * T::pi())
}

/// Relative distance `|a-b| / max(|a|,|b|)` in double precision.
pub fn rel_diff(a: Complex<f64>, b: Complex<f64>) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Reduce the imaginary part of a logarithm difference into (-pi, pi].
pub fn wrap_log(z: Complex<f64>) -> Complex<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = ((z.im + std::f64::consts::PI) / two_pi).floor();
    let mut im = z.im - k * two_pi;
    if im <= -std::f64::consts::PI {
        im += two_pi;
    }
    Complex::new(z.re, im)
}
