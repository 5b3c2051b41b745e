//! Monodromy cubic, asymptotic parameter maps and connection constants.

use num_complex::Complex64;

use crate::error::{PvError, Result};
use crate::params::PVParams;
use crate::scalar::{cexp, cexp_ipi, cln, Cx, Real};
use crate::special_fn::{log_barnes_g, log_g_hat};

/// Below this magnitude a genericity condition counts as violated.
pub const GENERICITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyPoint {
    pub x_sigma: Complex64,
    pub x_plus: Complex64,
    pub x_minus: Complex64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AsymptoticLabels {
    pub sigma: Option<Complex64>,
    pub eta: Option<Complex64>,
    pub nu: Option<Complex64>,
    pub rho: Option<Complex64>,
    pub omega: Option<Complex64>,
    pub xi: Option<Complex64>,
    pub lambda: Option<Complex64>,
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

fn cos2pi(z: Complex64) -> Complex64 {
    (2.0 * std::f64::consts::PI * z).cos()
}

fn sinpi(z: Complex64) -> Complex64 {
    (std::f64::consts::PI * z).sin()
}

fn gate(value: Complex64, condition: &str) -> Result<()> {
    if value.norm() <= GENERICITY_TOL {
        return Err(PvError::Genericity { condition: condition.to_string() });
    }
    Ok(())
}

/// (A₊, A₋, A_*).
pub fn a_invariants(p: &PVParams) -> (Complex64, Complex64, Complex64) {
    let e = cexp_ipi::<f64>(p.theta_star);
    let (p0, pt) = (2.0 * cos2pi(p.theta0), 2.0 * cos2pi(p.thetat));
    (p0 / e + pt * e, p0 * e + pt / e, e * e + 1.0 / (e * e) + p0 * pt)
}

/// Left-hand side of the cubic, expanded form.
pub fn cubic(m: &MonodromyPoint, p: &PVParams) -> Complex64 {
    let (ap, am, astar) = a_invariants(p);
    let MonodromyPoint { x_sigma: xs, x_plus: xp, x_minus: xm } = *m;
    xs * xp * xm + xp * xp + xm * xm - xs - ap * xp - am * xm + astar
}

/// Left-hand side of the cubic, factored form.
pub fn cubic_factored(m: &MonodromyPoint, p: &PVParams) -> Complex64 {
    let e = cexp_ipi::<f64>(p.theta_star);
    let (p0, pt) = (2.0 * cos2pi(p.theta0), 2.0 * cos2pi(p.thetat));
    let MonodromyPoint { x_sigma: xs, x_plus: xp, x_minus: xm } = *m;
    (xs - e * e - 1.0 / (e * e)) * (xp * xm - 1.0) + (e * xp + xm / e - p0) * (xp / e + e * xm - pt)
}

/// (X₊, X₋) from the short-distance parameters.
pub fn x_from_sigma_eta(sigma: Complex64, eta: Complex64, p: &PVParams) -> Result<(Complex64, Complex64)> {
    let s2 = (2.0 * std::f64::consts::PI * sigma).sin();
    if s2.norm() <= GENERICITY_TOL {
        return Err(PvError::Resonance { condition: format!("sin 2 pi sigma = 0 at sigma = {sigma}") });
    }
    let (ap, am, _) = a_invariants(p);
    let c2 = cos2pi(sigma);
    let pi = std::f64::consts::PI;
    let sum = |pm: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for eps in [1.0, -1.0] {
            let ph = (i() * (2.0 * pi * eps * eta - pm * pi * eps * sigma)).exp();
            acc += ph * (cos2pi(p.thetat - eps * sigma) - cos2pi(p.theta0)) * sinpi(p.theta_star - eps * sigma);
        }
        acc
    };
    let den = 2.0 * s2 * s2;
    let xp = (ap - am * c2 - 2.0 * i() * sum(1.0)) / den;
    let xm = (am - ap * c2 + 2.0 * i() * sum(-1.0)) / den;
    Ok((xp, xm))
}

/// Canonical σ: Re σ ∈ [0, ½], ties at Re σ = 0 broken by Im σ ≥ 0.
pub fn canonical_sigma(sigma: Complex64) -> Complex64 {
    let mut s = sigma - sigma.re.round();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        s = -s;
    }
    s
}

/// cos 2πσ on the cubic for given (X₊, X₋).
pub fn cos_2pi_sigma(xp: Complex64, xm: Complex64, p: &PVParams) -> Result<Complex64> {
    let one_minus = 1.0 - xp * xm;
    gate(one_minus, "X+ X- = 1")?;
    let e = cexp_ipi::<f64>(p.theta_star);
    let num = (e * xp + xm / e - 2.0 * cos2pi(p.theta0)) * (xp / e + e * xm - 2.0 * cos2pi(p.thetat));
    Ok(num / (2.0 * one_minus) + cos2pi(p.theta_star))
}

/// (σ, η) with canonical σ and principal η.
pub fn sigma_eta_from_x(xp: Complex64, xm: Complex64, p: &PVParams) -> Result<(Complex64, Complex64)> {
    let c = cos_2pi_sigma(xp, xm, p)?;
    let sigma = canonical_sigma(c.acos() / (2.0 * std::f64::consts::PI));
    let s2 = (2.0 * std::f64::consts::PI * sigma).sin();
    if s2.norm() <= GENERICITY_TOL {
        return Err(PvError::Resonance { condition: format!("sin 2 pi sigma = 0 at sigma = {sigma}") });
    }
    let pi = std::f64::consts::PI;
    let num = s2 * ((-i() * pi * sigma).exp() * xp + (i() * pi * sigma).exp() * xm)
        + 2.0 * cos2pi(p.theta0) * sinpi(p.theta_star - sigma)
        - 2.0 * cos2pi(p.thetat) * sinpi(p.theta_star + sigma);
    let den = 4.0 * sinpi(p.theta0 + p.thetat - sigma) * sinpi(p.thetat - p.theta0 - sigma) * sinpi(p.theta_star - sigma);
    gate(den, "sine product in the eta denominator vanishes")?;
    let e2 = num / den;
    gate(e2, "exp(2 pi i eta) = 0")?;
    Ok((sigma, e2.ln() / two_pi_i()))
}

/// (ν, ρ) on the imaginary axis.
pub fn labels_iinf(xp: Complex64, xm: Complex64) -> Result<(Complex64, Complex64)> {
    gate(xm, "X- = 0")?;
    let one_minus = 1.0 - xp * xm;
    gate(one_minus, "X+ X- = 1")?;
    Ok((xm.ln() / two_pi_i(), one_minus.ln() / two_pi_i()))
}

/// (ω, ξ) on the real axis.
pub fn labels_pinf(xp: Complex64, xm: Complex64) -> Result<(Complex64, Complex64)> {
    gate(xp, "X+ = 0")?;
    let one_minus = 1.0 - xp * xm;
    gate(one_minus, "X+ X- = 1")?;
    Ok((one_minus.ln() / two_pi_i(), xp.ln() / two_pi_i()))
}

/// λ from e^{2πiλ}, principal branch.
pub fn lambda_param(sigma: Complex64, p: &PVParams, xp: Complex64, xm: Complex64) -> Result<Complex64> {
    let ipi = Complex64::new(0.0, std::f64::consts::PI);
    let den = (2.0 * ipi * (p.theta0 + p.thetat + sigma)).exp() - 1.0;
    gate(den, "exp(2 pi i (theta0 + thetat + sigma)) = 1")?;
    let num = (ipi * (2.0 * p.theta0 - p.theta_star)).exp() + (ipi * (2.0 * p.thetat + p.theta_star)).exp()
        - xp
        - (-2.0 * ipi * sigma).exp() * xm;
    let v = num / den;
    gate(v, "exp(2 pi i lambda) = 0")?;
    Ok(v.ln() / two_pi_i())
}

/// All labels derived from (σ, η).
pub fn labels_from_sigma_eta(sigma: Complex64, eta: Complex64, p: &PVParams) -> Result<(AsymptoticLabels, MonodromyPoint)> {
    let (xp, xm) = x_from_sigma_eta(sigma, eta, p)?;
    let mut labels = AsymptoticLabels { sigma: Some(sigma), eta: Some(eta), ..Default::default() };
    if let Ok((nu, rho)) = labels_iinf(xp, xm) {
        labels.nu = Some(nu);
        labels.rho = Some(rho);
    }
    if let Ok((omega, xi)) = labels_pinf(xp, xm) {
        labels.omega = Some(omega);
        labels.xi = Some(xi);
    }
    labels.lambda = lambda_param(sigma, p, xp, xm).ok();
    Ok((labels, MonodromyPoint { x_sigma: 2.0 * cos2pi(sigma), x_plus: xp, x_minus: xm }))
}

/// log Υ_{0→i∞}.
pub fn log_upsilon_0_iinf<T: Real>(
    sigma: Cx<T>,
    nu: Cx<T>,
    lambda: Cx<T>,
    theta0: Cx<T>,
    thetat: Cx<T>,
    theta_star: Cx<T>,
) -> Result<Cx<T>> {
    let half = T::from_ratio(1, 2);
    let hs = theta_star * half;
    let ipi = Cx::new(T::zero(), T::pi());
    let ln2pi = cln(Cx::new(T::pi() * T::from_i128(2), T::zero()));
    let g = log_g_hat::<T>;
    let (s, l) = (sigma, lambda);
    let mut acc = (nu + nu) * ln2pi
        + ipi * nu * (nu - s)
        + ipi * (s + theta0 - hs) * (s + thetat + hs)
        + g(s - theta0 + thetat)?
        + g(s + theta_star)?
        - g(s - theta0 - thetat)?
        - g(nu - theta0 - hs)?
        - g(nu - thetat + hs)?;
    acc += ipi * (theta0 + thetat + s) * l
        + g(l - nu + s)?
        + g(l + theta0 + hs)?
        + g(l + thetat - hs)?
        - g(l - nu + theta0 + thetat)?
        - g(l + s + theta0 - hs)?
        - g(l + s + thetat + hs)?;
    Ok(acc)
}

pub fn upsilon_0_iinf(sigma: Complex64, nu: Complex64, lambda: Complex64, p: &PVParams) -> Result<Complex64> {
    Ok(log_upsilon_0_iinf::<f64>(sigma, nu, lambda, p.theta0, p.thetat, p.theta_star)?.exp())
}

/// log Υ̂ = log[√(2π) G²(½) e^{−iπ/24}].
pub fn log_upsilon_hat<T: Real>() -> Result<Cx<T>> {
    let half = T::from_ratio(1, 2);
    let g_half = log_barnes_g(Cx::new(-half, T::zero()))?;
    let ln2pi = T::ln(T::pi() * T::from_i128(2));
    Ok(Cx::new(ln2pi * half, -T::pi() / T::from_i128(24)) + g_half + g_half)
}

/// log Υ_{i∞→+∞}.
pub fn log_upsilon_iinf_pinf<T: Real>(nu: Cx<T>, omega: Cx<T>) -> Result<Cx<T>> {
    let ln2pi = cln(Cx::new(T::pi() * T::from_i128(2), T::zero()));
    let ipi = Cx::new(T::zero(), T::pi());
    let half = T::from_ratio(1, 2);
    Ok(log_upsilon_hat::<T>()? + omega * ln2pi + ipi * omega * omega * half - ipi * omega * nu * T::from_i128(2)
        + log_g_hat(-omega)?)
}

pub fn upsilon_iinf_pinf(nu: Complex64, omega: Complex64) -> Result<Complex64> {
    Ok(cexp(log_upsilon_iinf_pinf::<f64>(nu, omega)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rel_diff, to_c64, DoubleDouble};
    use crate::tau_expansions::TauSeries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_params(rng: &mut ChaCha8Rng) -> PVParams {
        let mut r = || c(rng.gen_range(-0.45..0.45), rng.gen_range(-0.2..0.2));
        PVParams::new(r(), r(), r())
    }

    #[test]
    fn symmetric_invariants() {
        let p = PVParams::real(0.13, 0.37, 0.0);
        let (ap, am, _) = a_invariants(&p);
        assert!((ap - am).norm() < 1e-15);
        assert!((ap - 2.0 * (cos2pi(p.theta0) + cos2pi(p.thetat))).norm() < 1e-14);
    }

    #[test]
    fn weyl_group_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let a = a_invariants(&p);
            for q in [p.s0(), p.st(), p.s_delta()] {
                let b = a_invariants(&q);
                assert!((a.0 - b.0).norm() < 1e-12 && (a.1 - b.1).norm() < 1e-12 && (a.2 - b.2).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn points_lie_on_the_cubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let sigma = c(rng.gen_range(0.05..0.45), rng.gen_range(-0.2..0.2));
            let eta = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3));
            let (xp, xm) = x_from_sigma_eta(sigma, eta, &p).unwrap();
            let m = MonodromyPoint { x_sigma: 2.0 * cos2pi(sigma), x_plus: xp, x_minus: xm };
            let scale = 1.0 + xp.norm_sqr() + xm.norm_sqr() + (m.x_sigma * xp * xm).norm();
            assert!(cubic(&m, &p).norm() / scale < 1e-10);
            assert!(rel_diff(cubic(&m, &p) + scale, cubic_factored(&m, &p) + scale) < 1e-12);
            // η periodicity
            let (yp, ym) = x_from_sigma_eta(sigma, eta + 1.0, &p).unwrap();
            assert!(rel_diff(xp, yp) < 1e-11 && rel_diff(xm, ym) < 1e-11);
        }
    }

    #[test]
    fn inverse_maps_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let sigma = c(rng.gen_range(0.05..0.45), rng.gen_range(-0.2..0.2));
            let eta = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3));
            let (xp, xm) = x_from_sigma_eta(sigma, eta, &p).unwrap();
            let (s2, e2) = sigma_eta_from_x(xp, xm, &p).unwrap();
            assert!((s2 - sigma).norm() < 1e-9, "{sigma} {s2}");
            let d = e2 - eta;
            assert!((d - d.re.round()).norm() < 1e-9, "{eta} {e2}");
        }
    }

    #[test]
    fn zero_monodromy_specialisation() {
        let p = PVParams::real(0.11, 0.27, 0.19);
        let c0 = cos_2pi_sigma(c(0.0, 0.0), c(0.0, 0.0), &p).unwrap();
        let want = 2.0 * cos2pi(p.theta0) * cos2pi(p.thetat) + cos2pi(p.theta_star);
        assert!((c0 - want).norm() < 1e-14);
    }

    #[test]
    fn flipped_sigma_gives_the_same_tau() {
        let p = PVParams::real(0.20, 0.31, 0.47);
        let (sigma, eta) = (c(-0.29, 0.03), c(0.12, 0.05));
        let (xp, xm) = x_from_sigma_eta(sigma, eta, &p).unwrap();
        let (s2, e2) = sigma_eta_from_x(xp, xm, &p).unwrap();
        assert!((s2 + sigma).norm() < 1e-9);
        let t = c(0.05, 0.0);
        let a = TauSeries::zero(&p, sigma, eta, 8, 6).unwrap().log_value(t).unwrap();
        let b = TauSeries::zero(&p, s2, e2, 8, 6).unwrap().log_value(t).unwrap();
        assert!(crate::scalar::wrap_log(a - b).norm() < 1e-8);
    }

    #[test]
    fn labels_share_the_same_exponential() {
        let (xp, xm) = (c(0.3, -0.2), c(-0.7, 0.4));
        let (nu, rho) = labels_iinf(xp, xm).unwrap();
        let (omega, xi) = labels_pinf(xp, xm).unwrap();
        assert!(((two_pi_i() * rho).exp() - (two_pi_i() * omega).exp()).norm() < 1e-14);
        assert!(((two_pi_i() * nu).exp() - xm).norm() < 1e-14);
        assert!(((two_pi_i() * xi).exp() - xp).norm() < 1e-14);
        let (w, _) = labels_pinf(c(1e-7, 0.0), c(1e-3, 0.0)).unwrap();
        assert!(w.norm() < 1e-9);
        assert_eq!(labels_pinf(c(0.0, 0.0), xm).unwrap_err().code(), "E_GENERICITY");
    }

    #[test]
    fn nu_varies_continuously() {
        let mut prev = labels_iinf(c(0.2, 0.0), c(0.5, 0.0)).unwrap().0;
        for k in 1..=100 {
            let phi = 3.0 * k as f64 / 100.0;
            let xm = c(0.5, 0.0) * Complex64::from_polar(1.0, phi);
            let nu = labels_iinf(c(0.2, 0.0), xm).unwrap().0;
            assert!((nu - prev).norm() < 0.01);
            prev = nu;
        }
    }

    #[test]
    fn upsilon_hat_at_zero_omega() {
        let v = upsilon_iinf_pinf(c(0.3, 0.1), c(0.0, 0.0)).unwrap();
        let g_half = 0.603244281209446_f64;
        let want = (2.0 * std::f64::consts::PI).sqrt() * g_half * g_half * Complex64::from_polar(1.0, -std::f64::consts::PI / 24.0);
        assert!(rel_diff(v, want) < 1e-13);
    }

    #[test]
    fn upsilon_recurrences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let nu = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3));
            let w = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3));
            let u = |n, o| upsilon_iinf_pinf(n, o).unwrap();
            assert!(rel_diff(u(nu + 1.0, w) / u(nu, w), (-two_pi_i() * w).exp()) < 1e-10);
            let want = (-two_pi_i() * nu).exp() * (1.0 - (two_pi_i() * w).exp());
            assert!(rel_diff(u(nu, w + 1.0) / u(nu, w), want) < 1e-10);
        }
    }

    #[test]
    fn upsilon_extended_precision() {
        let p = PVParams::new(c(0.2, 0.05), c(0.31, 0.0), c(0.47, -0.1));
        let (sigma, eta) = (c(0.29, 0.02), c(0.12, 0.1));
        let (labels, _) = labels_from_sigma_eta(sigma, eta, &p).unwrap();
        let (nu, lam) = (labels.nu.unwrap(), labels.lambda.unwrap());
        let lo = log_upsilon_0_iinf::<f64>(sigma, nu, lam, p.theta0, p.thetat, p.theta_star).unwrap();
        let z = |v: Complex64| Cx::new(DoubleDouble::from_f64(v.re), DoubleDouble::from_f64(v.im));
        let hi = log_upsilon_0_iinf(z(sigma), z(nu), z(lam), z(p.theta0), z(p.thetat), z(p.theta_star)).unwrap();
        assert!((to_c64(hi) - lo).norm() < 1e-12);
    }
}
