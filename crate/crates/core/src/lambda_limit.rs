//! Irregular blocks of the second kind as a Λ→∞ limit of regular blocks.
//!
//! The regular coefficients are expanded as Laurent series in Λ with
//! θ₁ = (Λ+θ_*)/2, σ = Λ/2+ν, θ_∞ = θ₀ and the θ₀-slot = (Λ−θ_*)/2. Summing
//! against the binomial expansion of (1−Λ/t)^{α(Λ+γ)} gives the coefficient
//! of t^{−k}, which must be Λ-independent.

use num_complex::Complex64;

use crate::conformal_blocks::{order_sums, regular_cb_coeff, CBParams};
use crate::error::{PvError, Result};
use crate::laurent::LaurentSeries;
use crate::partitions::Partition;
use crate::ring::{gen_binomial, Coefficient};

pub const MAX_DK_EXACT: usize = 4;
pub const MAX_DK_FLOAT: usize = 6;
/// Relative size above which a surviving positive Λ-power counts as a failure
/// in double precision; other rings scale it by their unit roundoff.
pub const FLOAT_CANCELLATION_TOL: f64 = 1e-9;

fn cancellation_tol<F: Coefficient>() -> f64 {
    FLOAT_CANCELLATION_TOL * F::epsilon() / f64::EPSILON
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaParams<F> {
    pub thetat: F,
    pub theta_star: F,
    pub nu: F,
    pub theta0: F,
    pub beta: F,
}

/// β with `c = 1 − 6(β − 1/β)²`, on the branch with β = 1 at c = 1.
pub fn beta_from_central_charge(c: Complex64) -> Complex64 {
    let q = ((1.0 - c) / 6.0).sqrt();
    (q + (q * q + 4.0).sqrt()) * 0.5
}

pub fn central_charge<F: Coefficient>(beta: &F) -> Result<F> {
    let q = beta.clone() - beta.try_inv()?;
    Ok(F::one() - F::from_int(6) * q.clone() * q)
}

/// Default Laurent depth for coefficients up to `t^{−k}`.
pub fn default_depth(k: usize) -> usize {
    3 * k + 2
}

fn half_q<F: Coefficient>(beta: &F) -> Result<F> {
    Ok((beta.clone() - beta.try_inv()?) * F::from_ratio(1, 2))
}

fn lambda_block_params<F: Coefficient>(p: &LambdaParams<F>, depth: usize) -> CBParams<LaurentSeries<F>> {
    let half = F::from_ratio(1, 2);
    let c = |x: &F| LaurentSeries::constant(x.clone(), depth);
    CBParams {
        theta0: LaurentSeries::linear(half.clone(), -(p.theta_star.clone() * half.clone()), depth),
        thetat: c(&p.thetat),
        theta1: LaurentSeries::linear(half.clone(), p.theta_star.clone() * half.clone(), depth),
        thetainf: c(&p.theta0),
        sigma: LaurentSeries::linear(half, p.nu.clone(), depth),
        beta: c(&p.beta),
    }
}

/// F_{λ,μ} at the confluent parameter point, as a Laurent series in Λ.
pub fn cb_coeff_in_lambda<F: Coefficient>(
    l: &Partition,
    m: &Partition,
    p: &LambdaParams<F>,
    depth: usize,
) -> Result<LaurentSeries<F>> {
    regular_cb_coeff(l, m, &lambda_block_params(p, depth))
}

/// The full Laurent series whose Λ⁰ coefficient is D_k, for k = 0..=kmax.
pub fn dk_laurent_sums<F: Coefficient>(
    p: &LambdaParams<F>,
    kmax: usize,
    depth: usize,
) -> Result<Vec<(LaurentSeries<F>, f64)>> {
    let bp = lambda_block_params(p, depth);
    let levels = order_sums(kmax, |l, m| regular_cb_coeff(l, m, &bp))?;
    let hq = half_q(&p.beta)?;
    let shifted = (p.theta_star.clone() * F::from_ratio(1, 2)) + hq + p.thetat.clone();
    let alpha = shifted.clone() + p.nu.clone();
    let gamma = shifted - p.nu.clone();
    let exponent = LaurentSeries::linear(alpha.clone(), alpha * gamma, depth);
    let binoms: Vec<LaurentSeries<F>> = (0..=kmax).map(|j| gen_binomial(&exponent, j)).collect();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut acc = LaurentSeries::zero_with_depth(depth);
        let mut scale = 0.0f64;
        for (l, level) in levels.iter().enumerate().take(k + 1) {
            let mut term = binoms[k - l].clone() * level.clone();
            if (k - l) % 2 == 1 {
                term = -term;
            }
            let term = term.shift(k as i64);
            scale = scale.max(term.magnitude());
            acc = acc + term;
        }
        out.push((acc, scale));
    }
    Ok(out)
}

/// D_0..=D_kmax, checking that every positive Λ-power cancels.
pub fn dk_coefficients<F: Coefficient>(p: &LambdaParams<F>, kmax: usize) -> Result<Vec<F>> {
    let max = if F::is_exact() { MAX_DK_EXACT } else { MAX_DK_FLOAT };
    if kmax > max {
        return Err(PvError::OrderTooLarge { requested: kmax, max });
    }
    dk_coefficients_with_depth(p, kmax, default_depth(kmax))
}

pub fn dk_coefficients_with_depth<F: Coefficient>(p: &LambdaParams<F>, kmax: usize, depth: usize) -> Result<Vec<F>> {
    let sums = dk_laurent_sums(p, kmax, depth)?;
    let mut out = Vec::with_capacity(kmax + 1);
    for (k, (s, scale)) in sums.into_iter().enumerate() {
        let d0 = s.coeff(0).ok_or(PvError::InsufficientDepth { floor: s.floor() })?;
        for (power, c) in s.terms() {
            if power < 1 {
                continue;
            }
            let bad = if F::is_exact() {
                !c.is_negligible(0.0)
            } else {
                c.magnitude() > cancellation_tol::<F>() * scale.max(1.0)
            };
            if bad {
                return Err(PvError::CancellationFailure { k, power, magnitude: c.magnitude(), scale });
            }
        }
        out.push(d0);
    }
    Ok(out)
}

/// D₁ as printed in closed form.
pub fn d1_closed_form<F: Coefficient>(p: &LambdaParams<F>) -> Result<F> {
    let hq = half_q(&p.beta)?;
    let q2 = hq.clone() * hq;
    let d0 = p.theta0.clone() * p.theta0.clone() - q2.clone();
    let dt = p.thetat.clone() * p.thetat.clone() - q2;
    let (nu, ts) = (p.nu.clone(), p.theta_star.clone());
    Ok(F::from_int(4) * nu.powi(3) - (F::from_int(2) * (d0.clone() + dt.clone()) + ts.clone() * ts.clone()) * nu
        + (dt - d0) * ts)
}

/// D₂ as printed in closed form.
pub fn d2_closed_form<F: Coefficient>(p: &LambdaParams<F>) -> Result<F> {
    let hq = half_q(&p.beta)?;
    let q2 = hq.clone() * hq;
    let d0 = p.theta0.clone() * p.theta0.clone() - q2.clone();
    let dt = p.thetat.clone() * p.thetat.clone() - q2;
    let (nu, ts) = (p.nu.clone(), p.theta_star.clone());
    let ts2 = ts.clone() * ts.clone();
    let c = central_charge(&p.beta)?;
    let d1 = d1_closed_form(p)?;
    Ok(F::from_ratio(1, 2) * d1.clone() * d1.clone() + F::from_int(3) * nu.clone() * d1
        - F::from_int(2) * nu.powi(4)
        + (dt.clone() - d0.clone()) * ts * nu.clone()
        + F::from_ratio(1, 8) * (F::from_int(4) * d0 - ts2.clone()) * (F::from_int(4) * dt - ts2.clone())
        + (c - F::one()) * F::from_ratio(1, 12) * (ts2 - F::from_int(4) * nu.clone() * nu))
}

fn log_cb2_prefactor(p: &LambdaParams<Complex64>, t: Complex64) -> Complex64 {
    (p.theta_star * p.theta_star * 0.5 - 2.0 * p.nu * p.nu) * t.ln() + (p.theta_star * 0.5 + p.nu) * t
}

/// `t^{θ_*²/2−2ν²} e^{(θ_*/2+ν)t} Σ_{k≤K} D_k t^{−k}` from precomputed D_k.
pub fn cb2_from_dk(p: &LambdaParams<Complex64>, dk: &[Complex64], t: Complex64) -> Complex64 {
    let inv = 1.0 / t;
    let sum = dk.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, d| acc * inv + d);
    log_cb2_prefactor(p, t).exp() * sum
}

pub fn confluent_cb2_series(p: &LambdaParams<Complex64>, t: Complex64, order: usize) -> Result<Complex64> {
    if t == Complex64::new(0.0, 0.0) {
        return Err(PvError::Config("confluent block of the 2nd kind needs t != 0".into()));
    }
    let dk = dk_coefficients(p, order)?;
    Ok(cb2_from_dk(p, &dk, t))
}

/// The t^{−k} coefficients of the expression under the limit, at a finite numeric Λ.
pub fn dk_at_finite_lambda(p: &LambdaParams<Complex64>, lambda: Complex64, kmax: usize) -> Result<Vec<Complex64>> {
    let half = 0.5;
    let bp = CBParams {
        theta0: (lambda - p.theta_star) * half,
        thetat: p.thetat,
        theta1: (lambda + p.theta_star) * half,
        thetainf: p.theta0,
        sigma: lambda * half + p.nu,
        beta: p.beta,
    };
    let levels = order_sums(kmax, |l, m| regular_cb_coeff(l, m, &bp))?;
    let hq = (p.beta - 1.0 / p.beta) * 0.5;
    let shifted = p.theta_star * 0.5 + hq + p.thetat;
    let e = (shifted + p.nu) * (lambda + shifted - p.nu);
    Ok((0..=kmax)
        .map(|k| {
            (0..=k)
                .map(|l| {
                    let sign = if (k - l) % 2 == 1 { -1.0 } else { 1.0 };
                    sign * gen_binomial(&e, k - l) * levels[l]
                })
                .sum::<Complex64>()
                * lambda.powu(k as u32)
        })
        .collect())
}
