//! Truncated Laurent series in 1/Λ with tracked accuracy floor.
//!
//! A series stores the coefficients of Λ^top, Λ^(top-1), ... and a floor:
//! every power `>= floor` is known exactly (up to the coefficient ring's own
//! rounding), everything below is unknown. Polynomials built from exact
//! inputs carry no floor at all. Products and reciprocals propagate the
//! floor, so the caller can tell whether a given power is determined.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{PvError, Result};
use crate::ring::Coefficient;

/// Floor value of an exact polynomial.
pub const EXACT: i64 = i64::MIN / 4;

#[derive(Clone, PartialEq)]
pub struct LaurentSeries<F> {
    top: i64,
    coeffs: Vec<F>,
    floor: i64,
    depth: usize,
}

impl<F: Coefficient> LaurentSeries<F> {
    pub fn zero_with_depth(depth: usize) -> Self {
        LaurentSeries { top: 0, coeffs: Vec::new(), floor: EXACT, depth }
    }

    pub fn constant(c: F, depth: usize) -> Self {
        LaurentSeries { top: 0, coeffs: vec![c], floor: EXACT, depth }
    }

    /// `c Λ^power`.
    pub fn monomial(c: F, power: i64, depth: usize) -> Self {
        LaurentSeries { top: power, coeffs: vec![c], floor: EXACT, depth }
    }

    /// `a Λ + b`.
    pub fn linear(a: F, b: F, depth: usize) -> Self {
        if a.is_negligible(0.0) {
            Self::constant(b, depth)
        } else {
            LaurentSeries { top: 1, coeffs: vec![a, b], floor: EXACT, depth }
        }
    }

    /// Build from explicit `(power, coefficient)` terms known down to `floor`.
    pub fn from_terms(terms: &[(i64, F)], floor: i64, depth: usize) -> Self {
        let mut s = Self::zero_with_depth(depth);
        for (p, c) in terms {
            s = s + Self::monomial(c.clone(), *p, depth);
        }
        s.floor = floor;
        s.trim_below_floor();
        s
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn is_exact_polynomial(&self) -> bool {
        self.floor == EXACT
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    fn lowest_stored(&self) -> i64 {
        self.top - self.coeffs.len() as i64 + 1
    }

    /// Coefficient of Λ^power; `None` when that power lies below the floor.
    pub fn coeff(&self, power: i64) -> Option<F> {
        if power < self.floor {
            return None;
        }
        Some(self.coeff_or_zero(power))
    }

    fn coeff_or_zero(&self, power: i64) -> F {
        if power > self.top || power < self.lowest_stored() {
            F::zero()
        } else {
            self.coeffs[(self.top - power) as usize].clone()
        }
    }

    /// `(power, coefficient)` for every stored term, highest power first.
    pub fn terms(&self) -> Vec<(i64, F)> {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.top - i as i64, c.clone())).collect()
    }

    fn trim_below_floor(&mut self) {
        if self.floor == EXACT {
            return;
        }
        let keep = (self.top - self.floor + 1).max(0) as usize;
        self.coeffs.truncate(keep);
    }

    pub fn scale(&self, c: &F) -> Self {
        LaurentSeries {
            top: self.top,
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
            floor: self.floor,
            depth: self.depth,
        }
    }

    /// Multiply by Λ^k.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            top: self.top + k,
            coeffs: self.coeffs.clone(),
            floor: if self.floor == EXACT { EXACT } else { self.floor + k },
            depth: self.depth,
        }
    }

    fn leading(&self) -> Option<(i64, usize)> {
        self.coeffs.iter().position(|c| !c.is_negligible(0.0)).map(|i| (self.top - i as i64, i))
    }

    /// Reciprocal; needs a nonzero leading coefficient.
    pub fn reciprocal(&self) -> Result<Self> {
        let (t, i0) = self.leading().ok_or_else(|| PvError::NonInvertible {
            reason: "Laurent series has no nonzero coefficient".into(),
        })?;
        if t < self.floor {
            return Err(PvError::NonInvertible { reason: "leading coefficient lies below the accuracy floor".into() });
        }
        let c: Vec<F> = self.coeffs[i0..].to_vec();
        let known = if self.floor == EXACT { usize::MAX } else { (t - self.floor) as usize };
        let m = self.depth.min(known);
        let c0_inv = c[0].try_inv()?;
        let mut r: Vec<F> = Vec::with_capacity(m + 1);
        r.push(c0_inv.clone());
        for j in 1..=m {
            let mut acc = F::zero();
            for i in 1..=j.min(c.len() - 1) {
                acc = acc + c[i].clone() * r[j - i].clone();
            }
            r.push(-(acc * c0_inv.clone()));
        }
        // A monomial inverts exactly.
        let exact = self.floor == EXACT && c.len() == 1;
        Ok(LaurentSeries {
            top: -t,
            coeffs: if exact { vec![c0_inv] } else { r },
            floor: if exact { EXACT } else { -t - m as i64 },
            depth: self.depth,
        })
    }

    /// Evaluate at a numeric Λ (ignoring the unknown tail).
    pub fn evaluate(&self, lambda: &F) -> Result<F> {
        let inv = lambda.try_inv()?;
        let mut acc = F::zero();
        for (p, c) in self.terms() {
            let w = if p >= 0 { lambda.powi(p as u32) } else { inv.powi((-p) as u32) };
            acc = acc + c * w;
        }
        Ok(acc)
    }

    pub fn map<G: Coefficient>(&self, f: impl Fn(&F) -> G) -> LaurentSeries<G> {
        LaurentSeries { top: self.top, coeffs: self.coeffs.iter().map(f).collect(), floor: self.floor, depth: self.depth }
    }
}

impl<F: Coefficient + fmt::Debug> fmt::Debug for LaurentSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent[")?;
        for (p, c) in self.terms() {
            write!(f, " ({c:?})L^{p}")?;
        }
        if self.floor == EXACT {
            write!(f, " ; exact]")
        } else {
            write!(f, " ; floor {}]", self.floor)
        }
    }
}

impl<F: Coefficient> Add for LaurentSeries<F> {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let depth = self.depth.max(b.depth);
        if self.coeffs.is_empty() && self.floor == EXACT {
            return b.with_depth(depth);
        }
        if b.coeffs.is_empty() && b.floor == EXACT {
            return self.with_depth(depth);
        }
        let top = self.top.max(b.top);
        let floor = self.floor.max(b.floor);
        let low = self.lowest_stored().min(b.lowest_stored()).max(if floor == EXACT { i64::MIN } else { floor });
        let coeffs = (0..=(top - low)).map(|i| self.coeff_or_zero(top - i) + b.coeff_or_zero(top - i)).collect();
        LaurentSeries { top, coeffs, floor, depth }
    }
}

impl<F: Coefficient> Neg for LaurentSeries<F> {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentSeries { top: self.top, coeffs: self.coeffs.into_iter().map(|c| -c).collect(), floor: self.floor, depth: self.depth }
    }
}

impl<F: Coefficient> Sub for LaurentSeries<F> {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl<F: Coefficient> Mul for LaurentSeries<F> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let depth = self.depth.max(b.depth);
        if (self.coeffs.is_empty() && self.floor == EXACT) || (b.coeffs.is_empty() && b.floor == EXACT) {
            return Self::zero_with_depth(depth);
        }
        let top = self.top + b.top;
        let floor = match (self.floor == EXACT, b.floor == EXACT) {
            (true, true) => EXACT,
            (true, false) => self.top + b.floor,
            (false, true) => b.top + self.floor,
            (false, false) => (self.top + b.floor).min(b.top + self.floor),
        };
        // Inexact products are cut at the relative depth.
        let floor = if floor == EXACT { EXACT } else { floor.max(top - depth as i64) };
        let full = self.coeffs.len() + b.coeffs.len() - 1;
        let len = if floor == EXACT { full } else { full.min((top - floor + 1).max(0) as usize) };
        let mut coeffs = vec![F::zero(); len];
        for (i, x) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].clone() + x.clone() * y.clone();
            }
        }
        LaurentSeries { top, coeffs, floor, depth }
    }
}

impl<F: Coefficient> Coefficient for LaurentSeries<F> {
    fn zero() -> Self {
        Self::zero_with_depth(0)
    }
    fn one() -> Self {
        Self::constant(F::one(), 0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(F::from_ratio(num, den), 0)
    }
    fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(scale))
    }
    fn try_inv(&self) -> Result<Self> {
        self.reciprocal()
    }
    fn is_exact() -> bool {
        F::is_exact()
    }
    fn epsilon() -> f64 {
        F::epsilon()
    }
}
