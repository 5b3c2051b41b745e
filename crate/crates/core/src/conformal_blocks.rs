//! Regular four-point conformal blocks and confluent blocks of the first kind
//! as truncated series.
//!
//! The combinatorial coefficients use the Nekrasov product with deformation
//! parameter `b = 1/β`, i.e. each box contributes `β(a+½) + β⁻¹(l+½) ± θ`,
//! while `Q = β − β⁻¹` and `c = 1 − 6Q²`. With this pairing the level-one
//! and level-two coefficients reproduce the Virasoro Gram-matrix values (see
//! the tests below).

use num_complex::Complex64;

use crate::error::{PvError, Result};
use crate::partitions::{enumerate_pairs, nekrasov_factors, nekrasov_z_in, Partition};
use crate::ring::Coefficient;

pub const MAX_CB_ORDER: usize = 10;
pub const DEFAULT_CB_ORDER: usize = 8;

/// External momenta, intermediate momentum and β of a regular block.
#[derive(Clone, Debug, PartialEq)]
pub struct CBParams<F> {
    pub theta0: F,
    pub thetat: F,
    pub theta1: F,
    pub thetainf: F,
    pub sigma: F,
    pub beta: F,
}

/// Parameters of the confluent block B(θ_*; σ; θ_t, θ₀; t).
#[derive(Clone, Debug, PartialEq)]
pub struct Cb1Params<F> {
    pub theta_star: F,
    pub sigma: F,
    pub thetat: F,
    pub theta0: F,
    pub beta: F,
}

struct Deformation<F> {
    b: F,
    b_inv: F,
    half_q: F,
}

fn deformation<F: Coefficient>(beta: &F) -> Result<Deformation<F>> {
    let beta_inv = beta.try_inv()?;
    let half_q = (beta.clone() - beta_inv.clone()) * F::from_ratio(1, 2);
    Ok(Deformation { b: beta_inv, b_inv: beta.clone(), half_q })
}

fn z<F: Coefficient>(d: &Deformation<F>, l: &Partition, m: &Partition, theta: F) -> F {
    nekrasov_z_in(l, m, &theta, &d.b, &d.b_inv)
}

/// Product of the four denominator Z-factors, with pole detection.
fn denominator<F: Coefficient>(d: &Deformation<F>, l: &Partition, m: &Partition, sigma: &F) -> Result<F> {
    let two_sigma = sigma.clone() + sigma.clone();
    let blocks = [
        (l, l, d.half_q.clone()),
        (m, m, d.half_q.clone()),
        (l, m, d.half_q.clone() + two_sigma.clone()),
        (m, l, d.half_q.clone() - two_sigma),
    ];
    let mut acc = F::one();
    for (a, b, th) in blocks {
        for f in nekrasov_factors(a, b, &th, &d.b, &d.b_inv) {
            if f.value.is_negligible(f.scale.max(1.0)) {
                return Err(PvError::CoefficientPole { factor: format!("Z_{{{a},{b}}} has a vanishing factor") });
            }
            acc = acc * f.value;
        }
    }
    Ok(acc)
}

/// Delta(θ) = (c−1)/24 + θ² = θ² − Q²/4.
pub fn conformal_dimension<F: Coefficient>(theta: &F, beta: &F) -> Result<F> {
    let d = deformation(beta)?;
    Ok(theta.clone() * theta.clone() - d.half_q.clone() * d.half_q)
}

/// Coefficient F_{λ,μ} of the regular block.
pub fn regular_cb_coeff<F: Coefficient>(l: &Partition, m: &Partition, p: &CBParams<F>) -> Result<F> {
    let d = deformation(&p.beta)?;
    let e = Partition::empty();
    let (s, t0, tt, t1, ti) = (&p.sigma, &p.theta0, &p.thetat, &p.theta1, &p.thetainf);
    let mut num = F::one();
    for eps in [1i64, -1] {
        let e0 = t0.clone() * F::from_int(eps);
        let ei = ti.clone() * F::from_int(eps);
        num = num
            * z(&d, &e, l, e0.clone() - tt.clone() - s.clone())
            * z(&d, &e, m, e0 - tt.clone() + s.clone())
            * z(&d, l, &e, ei.clone() + t1.clone() + s.clone())
            * z(&d, m, &e, ei + t1.clone() - s.clone());
    }
    num.try_div(&denominator(&d, l, m, s)?)
}

/// Coefficient B_{λ,μ} of the confluent block of the first kind.
pub fn confluent_cb1_coeff<F: Coefficient>(l: &Partition, m: &Partition, p: &Cb1Params<F>) -> Result<F> {
    let d = deformation(&p.beta)?;
    let e = Partition::empty();
    let (s, t0, tt, ts) = (&p.sigma, &p.theta0, &p.thetat, &p.theta_star);
    let mut num = z(&d, l, &e, ts.clone() + s.clone()) * z(&d, m, &e, ts.clone() - s.clone());
    for eps in [1i64, -1] {
        let e0 = t0.clone() * F::from_int(eps);
        num = num * z(&d, &e, l, e0.clone() - tt.clone() - s.clone()) * z(&d, &e, m, e0 - tt.clone() + s.clone());
    }
    num.try_div(&denominator(&d, l, m, s)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Regular,
    Confluent1,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockParams {
    Regular(CBParams<Complex64>),
    Confluent1(Cb1Params<Complex64>),
}

impl BlockParams {
    pub fn kind(&self) -> BlockKind {
        match self {
            BlockParams::Regular(_) => BlockKind::Regular,
            BlockParams::Confluent1(_) => BlockKind::Confluent1,
        }
    }
}

/// `t^exponent (1−t)^one_minus_t_exponent e^{exp_rate t} Σ_k coeffs[k] t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPowerSeries {
    pub coeffs: Vec<Complex64>,
    pub exponent: Complex64,
    pub one_minus_t_exponent: Complex64,
    pub exp_rate: Complex64,
}

impl TruncatedPowerSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The bracketed power series alone.
    pub fn bracket(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    /// Logarithm of the prefactor (principal branch).
    pub fn log_prefactor(&self, t: Complex64) -> Complex64 {
        let mut l = self.exponent * t.ln() + self.exp_rate * t;
        if self.one_minus_t_exponent != Complex64::new(0.0, 0.0) {
            l += self.one_minus_t_exponent * (1.0 - t).ln();
        }
        l
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.log_prefactor(t).exp() * self.bracket(t)
    }

    /// Taylor coefficients of `(1−t)^a e^{rt} Σ c_k t^k` through the stored order.
    pub fn expanded_coeffs(&self) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let mut pre = vec![Complex64::new(0.0, 0.0); n];
        // e^{rt}
        let mut term = Complex64::new(1.0, 0.0);
        for (k, slot) in pre.iter_mut().enumerate() {
            if k > 0 {
                term = term * self.exp_rate / k as f64;
            }
            *slot = term;
        }
        if self.one_minus_t_exponent != Complex64::new(0.0, 0.0) {
            let a = self.one_minus_t_exponent;
            let mut binom = vec![Complex64::new(0.0, 0.0); n];
            let mut b = Complex64::new(1.0, 0.0);
            for (k, slot) in binom.iter_mut().enumerate() {
                if k > 0 {
                    b = -b * (a - (k as f64 - 1.0)) / k as f64;
                }
                *slot = b;
            }
            pre = convolve(&pre, &binom, n);
        }
        convolve(&pre, &self.coeffs, n)
    }
}

fn convolve(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Per-order coefficient sums `Σ_{|λ|+|μ|=k} coeff(λ, μ)`.
pub fn order_sums<F: Coefficient>(
    order: usize,
    coeff: impl Fn(&Partition, &Partition) -> Result<F>,
) -> Result<Vec<F>> {
    (0..=order)
        .map(|k| {
            enumerate_pairs(k as u32).iter().try_fold(F::zero(), |acc, (l, m)| Ok(acc + coeff(l, m)?))
        })
        .collect()
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_CB_ORDER {
        return Err(PvError::OrderTooLarge { requested: order, max: MAX_CB_ORDER });
    }
    Ok(())
}

pub fn regular_series(p: &CBParams<Complex64>, order: usize) -> Result<TruncatedPowerSeries> {
    check_order(order)?;
    let coeffs = order_sums(order, |l, m| regular_cb_coeff(l, m, p))?;
    let hq = (p.beta - p.beta.inv()) * 0.5;
    let dim = |th: Complex64| th * th - hq * hq;
    Ok(TruncatedPowerSeries {
        coeffs,
        exponent: dim(p.sigma) - dim(p.theta0) - dim(p.thetat),
        one_minus_t_exponent: 2.0 * (p.thetat + hq) * (p.theta1 + hq),
        exp_rate: Complex64::new(0.0, 0.0),
    })
}

pub fn confluent1_series(p: &Cb1Params<Complex64>, order: usize) -> Result<TruncatedPowerSeries> {
    check_order(order)?;
    let coeffs = order_sums(order, |l, m| confluent_cb1_coeff(l, m, p))?;
    let hq = (p.beta - p.beta.inv()) * 0.5;
    let dim = |th: Complex64| th * th - hq * hq;
    Ok(TruncatedPowerSeries {
        coeffs,
        exponent: dim(p.sigma) - dim(p.theta0) - dim(p.thetat),
        one_minus_t_exponent: Complex64::new(0.0, 0.0),
        exp_rate: -(p.thetat + hq),
    })
}

pub fn block_series(params: &BlockParams, order: usize) -> Result<TruncatedPowerSeries> {
    match params {
        BlockParams::Regular(p) => regular_series(p, order),
        BlockParams::Confluent1(p) => confluent1_series(p, order),
    }
}

/// Value of the truncated block at `t` together with its per-order coefficients.
pub fn cb_series(params: &BlockParams, t: Complex64, order: usize) -> Result<(Complex64, Vec<Complex64>)> {
    let s = block_series(params, order)?;
    Ok((s.eval(t), s.coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Coefficient>::from_ratio(n, d)
    }

    fn rparams() -> CBParams<BigRational> {
        CBParams { theta0: q(1, 5), thetat: q(2, 7), theta1: q(-3, 11), thetainf: q(5, 13), sigma: q(4, 17), beta: q(3, 2) }
    }

    /// Level-1 and level-2 Virasoro block coefficients from the Gram matrix.
    fn gram_coefficients(p: &CBParams<BigRational>) -> (BigRational, BigRational) {
        let dim = |th: &BigRational| conformal_dimension(th, &p.beta).unwrap();
        let (d, d0, dt, d1, di) = (dim(&p.sigma), dim(&p.theta0), dim(&p.thetat), dim(&p.theta1), dim(&p.thetainf));
        let qq = p.beta.clone() - p.beta.recip();
        let cc = q(1, 1) - q(6, 1) * qq.clone() * qq;
        let one = q(1, 1);
        let level1 = (d.clone() + dt.clone() - d0.clone()) * (d.clone() + d1.clone() - di.clone()) / (q(2, 1) * d.clone());
        // Gram matrix of {L_-1^2, L_-2}|Δ>
        let g11 = q(4, 1) * d.clone() * (q(2, 1) * d.clone() + one.clone());
        let g12 = q(6, 1) * d.clone();
        let g22 = q(4, 1) * d.clone() + cc / q(2, 1);
        let v = |a: &BigRational, b: &BigRational| {
            let x = d.clone() + a.clone() - b.clone();
            (x.clone() * (x + one.clone()), d.clone() + q(2, 1) * a.clone() - b.clone())
        };
        let (u1, u2) = v(&dt, &d0);
        let (w1, w2) = v(&d1, &di);
        let det = g11.clone() * g22.clone() - g12.clone() * g12.clone();
        let level2 = (u1.clone() * (g22 * w1.clone() - g12.clone() * w2.clone()) + u2 * (g11 * w2 - g12 * w1)) / det;
        (level1, level2)
    }

    #[test]
    fn virasoro_gram_levels_one_and_two() {
        let p = rparams();
        let sums = order_sums(2, |l, m| regular_cb_coeff(l, m, &p)).unwrap();
        let (l1, l2) = gram_coefficients(&p);
        // The (1−t) prefactor shifts the bracket relative to the Virasoro series.
        let hq = (p.beta.clone() - p.beta.recip()) / q(2, 1);
        let a = q(2, 1) * (p.thetat.clone() + hq.clone()) * (p.theta1.clone() + hq);
        let b1 = sums[1].clone() - a.clone();
        let b2 = sums[2].clone() - a.clone() * sums[1].clone() + a.clone() * (a - q(1, 1)) / q(2, 1);
        assert_eq!(b1, l1);
        assert_eq!(b2, l2);
    }

    #[test]
    fn empty_pair_is_one() {
        let e = Partition::empty();
        assert_eq!(regular_cb_coeff(&e, &e, &rparams()).unwrap(), q(1, 1));
        let p = Cb1Params { theta_star: c(0.3, 0.0), sigma: c(0.2, 0.1), thetat: c(0.1, 0.0), theta0: c(0.4, 0.0), beta: c(1.0, 0.0) };
        assert_eq!(confluent_cb1_coeff(&e, &e, &p).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn one_box_hand_expansion_at_c1() {
        // β = 1: Z_{∅,(1)}(x) = −x, Z_{(1),∅}(x) = x, Z_{(1),(1)}(0) = 1.
        let (t0, tt, t1, ti, s) = (c(0.21, 0.0), c(0.33, 0.0), c(0.14, 0.05), c(0.4, 0.0), c(0.27, 0.0));
        let p = CBParams { theta0: t0, thetat: tt, theta1: t1, thetainf: ti, sigma: s, beta: c(1.0, 0.0) };
        let one = Partition::new(vec![1]).unwrap();
        let got = regular_cb_coeff(&one, &Partition::empty(), &p).unwrap();
        let num = (-(t0 - tt - s)) * (-(-t0 - tt - s)) * (ti + t1 + s) * (-ti + t1 + s);
        let want = num / (4.0 * s * s);
        assert!((got - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn lambda_mu_sigma_symmetry() {
        let mut p = CBParams { theta0: c(0.21, 0.0), thetat: c(0.33, 0.1), theta1: c(0.14, 0.05), thetainf: c(0.4, 0.0), sigma: c(0.27, 0.0), beta: c(1.2, 0.1) };
        let one = Partition::new(vec![1]).unwrap();
        let e = Partition::empty();
        let a = regular_cb_coeff(&one, &e, &p).unwrap();
        p.sigma = -p.sigma;
        let b = regular_cb_coeff(&e, &one, &p).unwrap();
        assert!((a - b).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn pole_is_reported() {
        let p = Cb1Params { theta_star: c(0.3, 0.0), sigma: c(1e-13, 0.0), thetat: c(0.1, 0.0), theta0: c(0.4, 0.0), beta: c(1.0, 0.0) };
        let one = Partition::new(vec![1]).unwrap();
        let r = confluent_cb1_coeff(&Partition::empty(), &one, &p);
        assert!(matches!(r, Err(PvError::CoefficientPole { .. })));
    }

    #[test]
    fn order_zero_is_prefactor() {
        let p = Cb1Params { theta_star: c(0.3, 0.0), sigma: c(0.2, 0.1), thetat: c(0.1, 0.0), theta0: c(0.4, 0.0), beta: c(1.0, 0.0) };
        let t = c(0.1, 0.02);
        let (v, cs) = cb_series(&BlockParams::Confluent1(p.clone()), t, 0).unwrap();
        assert_eq!(cs, vec![c(1.0, 0.0)]);
        let want = (t.ln() * (p.sigma * p.sigma - p.theta0 * p.theta0 - p.thetat * p.thetat) - p.thetat * t).exp();
        assert!((v - want).norm() < 1e-15);
        assert!(cb_series(&BlockParams::Confluent1(p), t, 11).is_err());
    }

    fn cb1(ts: Complex64, s: Complex64, tt: Complex64, t0: Complex64, beta: Complex64) -> Cb1Params<Complex64> {
        Cb1Params { theta_star: ts, sigma: s, thetat: tt, theta0: t0, beta }
    }

    /// Taylor coefficients of e^{rt} B(t) t^{-exponent}, compared order by order.
    fn assert_same_block(a: &TruncatedPowerSeries, b: &TruncatedPowerSeries, extra_rate: Complex64, tol: f64) {
        assert!((a.exponent - b.exponent).norm() < 1e-13);
        let mut b2 = b.clone();
        b2.exp_rate += extra_rate;
        let (x, y) = (a.expanded_coeffs(), b2.expanded_coeffs());
        for (k, (u, v)) in x.iter().zip(&y).enumerate() {
            assert!((u - v).norm() <= tol * u.norm().max(1.0), "order {k}: {u} vs {v}");
        }
    }

    #[test]
    fn confluent_symmetries_c1() {
        let one = c(1.0, 0.0);
        let (ts, s, tt, t0) = (c(0.31, 0.02), c(0.23, -0.04), c(0.17, 0.0), c(0.42, 0.03));
        let base = confluent1_series(&cb1(ts, s, tt, t0, one), 5).unwrap();
        let flip0 = confluent1_series(&cb1(ts, s, tt, -t0, one), 5).unwrap();
        assert_same_block(&base, &flip0, c(0.0, 0.0), 1e-9);
        let flips = confluent1_series(&cb1(ts, -s, tt, t0, one), 5).unwrap();
        assert_same_block(&base, &flips, c(0.0, 0.0), 1e-9);
        let flipt = confluent1_series(&cb1(ts, s, -tt, t0, one), 5).unwrap();
        assert_same_block(&base, &flipt, c(0.0, 0.0), 1e-9);
        let exch = confluent1_series(&cb1(-ts, s, t0, tt, one), 5).unwrap();
        assert_same_block(&base, &exch, ts, 1e-9);
        let d = (t0 + tt + ts) * 0.5;
        let mut ro = confluent1_series(&cb1(ts - 2.0 * d, s, tt - d, t0 - d, one), 5).unwrap();
        ro.exponent += (ts * ts - (t0 + tt) * (t0 + tt)) * 0.5;
        assert_same_block(&base, &ro, d, 1e-9);
    }

    #[test]
    fn confluent_limit_of_regular_block() {
        let (ts, s, tt, t0) = (c(0.31, 0.0), c(0.23, 0.0), c(0.17, 0.0), c(0.42, 0.0));
        let conf = confluent1_series(&cb1(ts, s, tt, t0, c(1.0, 0.0)), 4).unwrap();
        let t = c(0.1, 0.0);
        let target = conf.eval(t);
        let mut errs = Vec::new();
        for lam in [1e2, 1e3, 1e4] {
            let l = c(lam, 0.0);
            let p = CBParams { theta0: t0, thetat: tt, theta1: (l + ts) * 0.5, thetainf: (l - ts) * 0.5, sigma: s, beta: c(1.0, 0.0) };
            let reg = regular_series(&p, 4).unwrap();
            // Drop the Λ^{-exponent} from rescaling t → t/Λ.
            let v = reg.eval(t / l) * (reg.exponent * l.ln()).exp();
            errs.push((v - target).norm() / target.norm());
        }
        let slope = (errs[2] / errs[0]).log10() / 2.0;
        assert!((slope + 1.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn expanded_coefficients_include_prefactors() {
        let s = TruncatedPowerSeries {
            coeffs: vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
            exponent: c(0.0, 0.0),
            one_minus_t_exponent: c(2.0, 0.0),
            exp_rate: c(1.0, 0.0),
        };
        // (1-t)^2 e^t (1 + t/2) = 1 - t/2 - t^2 + ...
        let e = s.expanded_coeffs();
        assert!((e[1] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((e[2] - c(-1.0, 0.0)).norm() < 1e-15);
    }
}
