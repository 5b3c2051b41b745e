//! log Γ, log Barnes G, Ĝ and friends on the principal branch.
//!
//! Both logarithms use an upward shift of the argument into the region
//! `Re z >= R` followed by the Stirling-type asymptotic series. Because the
//! shift subtracts principal logarithms of `z + j`, the result is the
//! analytic continuation from the positive real axis with the cut on the
//! negative real axis (for G: on `(-inf, -1]`).

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{PvError, Result};
use crate::scalar::{cexp, cln, csin_pi, Cx, Real};

pub use crate::ring::{gen_binomial, pochhammer};

const MAX_BERNOULLI: usize = 90;

/// Even-index Bernoulli numbers `B_0, B_2, ...` split into double pairs.
fn bernoulli_even() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut b: Vec<BigRational> = Vec::with_capacity(MAX_BERNOULLI + 1);
        b.push(BigRational::one());
        for m in 1..=MAX_BERNOULLI {
            // sum_{k<=m} C(m+1,k) B_k = 0
            let mut acc = BigRational::zero();
            let mut binom = BigInt::one();
            for (k, bk) in b.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * bk;
                binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        b.iter()
            .step_by(2)
            .map(|q| {
                let hi = q.to_f64().unwrap_or(f64::NAN);
                let rest = q - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
                (hi, rest.to_f64().unwrap_or(0.0))
            })
            .collect()
    })
}

fn bernoulli<T: Real>(two_k: usize) -> T {
    let (hi, lo) = bernoulli_even()[two_k / 2];
    T::from_f64(hi) + T::from_f64(lo)
}

fn is_nonpositive_integer<T: Real>(z: Cx<T>) -> bool {
    z.im.is_zero() && z.re <= T::zero() && z.re.floor() == z.re
}

fn is_integer<T: Real>(z: Cx<T>) -> bool {
    z.im.is_zero() && z.re.floor() == z.re
}

fn fmt_c<T: Real>(z: Cx<T>) -> String {
    format!("{}{:+}i", z.re.to_f64(), z.im.to_f64())
}

fn half_ln_two_pi<T: Real>() -> T {
    (T::pi() * T::from_f64(2.0)).ln() * T::from_f64(0.5)
}

/// Number of unit shifts needed to bring `Re z` up to the asymptotic radius.
fn shift_count<T: Real>(z: Cx<T>) -> usize {
    let r = T::asymptotic_radius();
    let re = z.re.to_f64();
    if re >= r {
        0
    } else {
        (r - re).ceil() as usize
    }
}

/// `sum_{j<n} log(z+j)` with principal logs, via chunked products.
fn log_rising<T: Real>(z: Cx<T>, n: usize) -> Cx<T> {
    let two_pi = std::f64::consts::TAU;
    let mut total = Complex::new(T::zero(), T::zero());
    let mut j = 0;
    while j < n {
        let end = (j + 8).min(n);
        let mut prod = Complex::new(T::one(), T::zero());
        let mut arg_sum = 0.0;
        for i in j..end {
            let f = z + T::from_f64(i as f64);
            arg_sum += f.im.to_f64().atan2(f.re.to_f64());
            prod *= f;
        }
        let l = cln(prod);
        let k = ((arg_sum - l.im.to_f64()) / two_pi).round();
        total = total + l + Complex::new(T::zero(), T::from_f64(k) * T::pi() * T::from_f64(2.0));
        j = end;
    }
    total
}

/// Stirling series for log Γ(w), valid for large `Re w`.
fn stirling_log_gamma<T: Real>(w: Cx<T>) -> Cx<T> {
    let half = T::from_f64(0.5);
    let mut s = (w - half) * cln(w) - w + half_ln_two_pi::<T>();
    let winv = w.inv();
    let w2inv = winv * winv;
    let mut pw = winv;
    let tol = T::epsilon() * 1e-2;
    for k in 1..(MAX_BERNOULLI / 2) {
        let c = bernoulli::<T>(2 * k) / T::from_f64((2 * k * (2 * k - 1)) as f64);
        let term = pw * c;
        s += term;
        if crate::scalar::cabs(term).to_f64() < tol * crate::scalar::cabs(s).to_f64().max(1.0) {
            break;
        }
        pw *= w2inv;
    }
    s
}

/// Principal log Γ(z).
pub fn log_gamma<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    if is_nonpositive_integer(z) {
        return Err(PvError::Pole { func: "Gamma", at: fmt_c(z) });
    }
    let n = shift_count(z);
    let w = z + T::from_f64(n as f64);
    Ok(stirling_log_gamma(w) - log_rising(z, n))
}

pub fn gamma<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    Ok(cexp(log_gamma(z)?))
}

/// Asymptotic series for log G(1+w), large `Re w`.
fn asymptotic_log_barnes<T: Real>(w: Cx<T>) -> Cx<T> {
    let lw = cln(w);
    let w2 = w * w;
    let half = T::from_f64(0.5);
    let mut s = w2 * half * lw - w2 * T::from_f64(0.75) + w * half_ln_two_pi::<T>()
        - lw / T::from_f64(12.0)
        + T::zeta_prime_m1();
    let w2inv = w2.inv();
    let mut pw = w2inv;
    let tol = T::epsilon() * 1e-2;
    for k in 1..(MAX_BERNOULLI / 2 - 1) {
        let c = bernoulli::<T>(2 * k + 2) / T::from_f64((4 * k * (k + 1)) as f64);
        let term = pw * c;
        s += term;
        if crate::scalar::cabs(term).to_f64() < tol * crate::scalar::cabs(s).to_f64().max(1.0) {
            break;
        }
        pw *= w2inv;
    }
    s
}

/// Principal log G(1+z).
pub fn log_barnes_g<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    if is_integer(z) && z.re <= -T::one() {
        return Err(PvError::GZero { at: fmt_c(z) });
    }
    let n = shift_count(z);
    if n == 0 {
        return Ok(asymptotic_log_barnes(z));
    }
    let w = z + T::from_f64(n as f64);
    // log G(1+z) = log G(1+w) - sum_{j=1..n} log Γ(z+j), walking log Γ downward.
    let mut lg = log_gamma(w)?;
    let mut acc = lg;
    for j in (1..n).rev() {
        lg -= cln(z + T::from_f64(j as f64));
        acc += lg;
    }
    Ok(asymptotic_log_barnes(w) - acc)
}

pub fn barnes_g1p<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    Ok(cexp(log_barnes_g(z)?))
}

/// log Ĝ(z) = log G(1+z) - log G(1-z).
pub fn log_g_hat<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    if is_integer(z) && !z.re.is_zero() {
        return Err(PvError::IntegerSingularity { at: fmt_c(z) });
    }
    Ok(log_barnes_g(z)? - log_barnes_g(-z)?)
}

/// Ĝ(z) = G(1+z)/G(1-z).
pub fn g_hat<T: Real>(z: Cx<T>) -> Result<Cx<T>> {
    Ok(cexp(log_g_hat(z)?))
}

/// `sin(pi z)`; exact zero at integers.
pub fn sin_pi<T: Real>(z: Cx<T>) -> Cx<T> {
    csin_pi(z)
}
