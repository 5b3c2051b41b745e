//! Tau-function expansions at t → 0, t → i∞ and t → +∞.
//!
//! Every channel is a Fourier sum of terms
//! `e^{ψ_n(t)} Σ_k c_{n,k} t^{±k}` with `ψ_n = log A_n + a_n log t + q t² + r_n t`,
//! which lets values and t∂_t-derivatives be formed term by term and summed
//! with a common exponential scale.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal_blocks::{confluent1_series, Cb1Params, DEFAULT_CB_ORDER};
use crate::error::{PvError, Result};
use crate::gk::{gk_polynomials, poly_eval, MAX_GK};
use crate::lambda_limit::{dk_coefficients, LambdaParams, MAX_DK_FLOAT};
use crate::params::PVParams;
use crate::scalar::{cexp_ipi, cln, Cx, Real};
use crate::special_fn::log_barnes_g;

pub const DEFAULT_WINDOW_ZERO: usize = 6;
pub const DEFAULT_WINDOW_ASYMPTOTIC: usize = 2;
pub const DEFAULT_ASYMPTOTIC_ORDER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Zero,
    IInfinity,
    PlusInfinity,
}

impl std::str::FromStr for Channel {
    type Err = PvError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(Channel::Zero),
            "iinf" | "i-infinity" | "i-inf" => Ok(Channel::IInfinity),
            "pinf" | "plus-infinity" | "+inf" => Ok(Channel::PlusInfinity),
            other => Err(PvError::Config(format!("unknown channel '{other}'"))),
        }
    }
}

/// `e^{log_amp} t^exponent e^{quad t² + rate t} Σ_k coeffs[k] t^{step·k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauTerm {
    pub n: i64,
    pub log_amp: Complex64,
    pub exponent: Complex64,
    pub quad: Complex64,
    pub rate: Complex64,
    pub coeffs: Vec<Complex64>,
    pub step: i32,
}

impl TauTerm {
    fn psi(&self, t: Complex64, log_t: Complex64) -> Complex64 {
        self.log_amp + self.exponent * log_t + self.quad * t * t + self.rate * t
    }

    /// (S, DS, D²S, D³S) with D = t d/dt.
    fn series_jets(&self, t: Complex64) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        let x = if self.step > 0 { t } else { 1.0 / t };
        let mut pw = Complex64::new(1.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = (self.step * k as i32) as f64;
            let v = c * pw;
            out[0] += v;
            out[1] += v * e;
            out[2] += v * e * e;
            out[3] += v * e * e * e;
            pw *= x;
        }
        out
    }

    /// (ψ', ψ'', ψ''') in D = t d/dt.
    fn psi_jets(&self, t: Complex64) -> [Complex64; 3] {
        let q = self.quad * t * t;
        let r = self.rate * t;
        [self.exponent + 2.0 * q + r, 4.0 * q + r, 8.0 * q + r]
    }
}

/// A truncated expansion in one channel.
#[derive(Clone, Debug)]
pub struct TauSeries {
    pub channel: Channel,
    pub params: PVParams,
    /// σ, ν or ω.
    pub carrier: Complex64,
    /// η, ρ or ξ.
    pub phase: Complex64,
    pub window: usize,
    pub order: usize,
    /// Log of the normalization amplitude N (0 by default).
    pub log_amplitude: Complex64,
    pub terms: Vec<TauTerm>,
}

/// Derivatives of log τ in D = t d/dt, with the value itself.
#[derive(Clone, Copy, Debug)]
pub struct LogJets {
    pub log_tau: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

impl TauSeries {
    /// Theorem-B series around t = 0.
    pub fn zero(p: &PVParams, sigma: Complex64, eta: Complex64, order: usize, window: usize) -> Result<Self> {
        p.require_c1()?;
        check_resonance(sigma)?;
        let mut terms = Vec::new();
        for n in -(window as i64)..=window as i64 {
            let s = sigma + n as f64;
            let log_c = match log_c0_structure::<f64>(p.theta_star, s, p.thetat, p.theta0) {
                Ok(v) => v,
                Err(PvError::GZero { .. }) => continue,
                Err(e) => return Err(e),
            };
            let cb = confluent1_series(
                &Cb1Params { theta_star: p.theta_star, sigma: s, thetat: p.thetat, theta0: p.theta0, beta: p.beta },
                order,
            )?;
            terms.push(TauTerm {
                n,
                log_amp: log_c + two_pi_i() * eta * n as f64,
                exponent: cb.exponent,
                quad: Complex64::new(0.0, 0.0),
                rate: cb.exp_rate,
                coeffs: cb.coeffs,
                step: 1,
            });
        }
        Ok(Self::assemble(Channel::Zero, p, sigma, eta, window, order, terms))
    }

    /// Asymptotic series on the imaginary axis.
    pub fn iinf(p: &PVParams, nu: Complex64, rho: Complex64, order: usize, window: usize) -> Result<Self> {
        p.require_c1()?;
        if order > MAX_DK_FLOAT {
            return Err(PvError::OrderTooLarge { requested: order, max: MAX_DK_FLOAT });
        }
        let mut terms = Vec::new();
        for n in -(window as i64)..=window as i64 {
            let v = nu + n as f64;
            let log_c = match log_c_iinf_structure::<f64>(p.thetat, p.theta_star, v, p.theta0) {
                Ok(x) => x,
                Err(PvError::GZero { .. }) => continue,
                Err(e) => return Err(e),
            };
            let lp = LambdaParams { thetat: p.thetat, theta_star: p.theta_star, nu: v, theta0: p.theta0, beta: p.beta };
            let coeffs = dk_coefficients(&lp, order)?;
            terms.push(TauTerm {
                n,
                log_amp: log_c + two_pi_i() * rho * n as f64,
                exponent: p.theta_star * p.theta_star * 0.5 - 2.0 * v * v,
                quad: Complex64::new(0.0, 0.0),
                rate: p.theta_star * 0.5 + v,
                coeffs,
                step: -1,
            });
        }
        Ok(Self::assemble(Channel::IInfinity, p, nu, rho, window, order, terms))
    }

    /// Asymptotic series on the positive real axis.
    pub fn pinf(p: &PVParams, omega: Complex64, xi: Complex64, order: usize, window: usize) -> Result<Self> {
        p.require_c1()?;
        let polys = gk_polynomials::<f64>(p.theta0, p.thetat, p.theta_star, order)?;
        let mut terms = Vec::new();
        for n in -(window as i64)..=window as i64 {
            let w = omega + n as f64;
            let log_c = match log_c_pinf_structure::<f64>(p.theta0, p.thetat, p.theta_star, w) {
                Ok(x) => x,
                Err(PvError::GZero { .. }) => continue,
                Err(e) => return Err(e),
            };
            let mut coeffs = vec![Complex64::new(1.0, 0.0)];
            coeffs.extend(polys.iter().map(|g| poly_eval(g, w)));
            terms.push(TauTerm {
                n,
                log_amp: log_c + two_pi_i() * xi * n as f64,
                exponent: pinf_exponent(p, w),
                quad: Complex64::new(1.0 / 32.0, 0.0),
                rate: (Complex64::i() * w + p.theta_star) * 0.5,
                coeffs,
                step: -1,
            });
        }
        Ok(Self::assemble(Channel::PlusInfinity, p, omega, xi, window, order, terms))
    }

    fn assemble(
        channel: Channel,
        p: &PVParams,
        carrier: Complex64,
        phase: Complex64,
        window: usize,
        order: usize,
        terms: Vec<TauTerm>,
    ) -> Self {
        TauSeries {
            channel,
            params: *p,
            carrier,
            phase,
            window,
            order,
            log_amplitude: Complex64::new(0.0, 0.0),
            terms,
        }
    }

    pub fn with_log_amplitude(mut self, log_n: Complex64) -> Self {
        self.log_amplitude = log_n;
        self
    }

    /// log τ(t) and its first three t∂_t-derivatives.
    pub fn jets(&self, t: Complex64) -> Result<LogJets> {
        if t == Complex64::new(0.0, 0.0) {
            return Err(PvError::Config("tau expansions need t != 0".into()));
        }
        if self.terms.is_empty() {
            return Err(PvError::Config("all Fourier terms vanish".into()));
        }
        let log_t = t.ln();
        let psis: Vec<Complex64> = self.terms.iter().map(|term| term.psi(t, log_t)).collect();
        let reference = psis.iter().copied().fold(psis[0], |a, b| if b.re > a.re { b } else { a });
        let mut f = [Complex64::new(0.0, 0.0); 4];
        for (term, psi) in self.terms.iter().zip(&psis) {
            let u = (psi - reference).exp();
            let [p1, p2, p3] = term.psi_jets(t);
            // derivatives of e^ψ divided by e^ψ
            let du = [Complex64::new(1.0, 0.0), p1, p2 + p1 * p1, p3 + 3.0 * p1 * p2 + p1 * p1 * p1];
            let s = term.series_jets(t);
            f[0] += u * s[0];
            f[1] += u * (du[1] * s[0] + s[1]);
            f[2] += u * (du[2] * s[0] + 2.0 * du[1] * s[1] + s[2]);
            f[3] += u * (du[3] * s[0] + 3.0 * du[2] * s[1] + 3.0 * du[1] * s[2] + s[3]);
        }
        if f[0] == Complex64::new(0.0, 0.0) {
            return Err(PvError::Config("tau expansion vanishes at this point".into()));
        }
        let g1 = f[1] / f[0];
        let g2 = f[2] / f[0];
        let g3 = f[3] / f[0];
        Ok(LogJets {
            log_tau: self.log_amplitude + reference + f[0].ln(),
            d1: g1,
            d2: g2 - g1 * g1,
            d3: g3 - 3.0 * g1 * g2 + 2.0 * g1 * g1 * g1,
        })
    }

    pub fn log_value(&self, t: Complex64) -> Result<Complex64> {
        Ok(self.jets(t)?.log_tau)
    }

    pub fn value(&self, t: Complex64) -> Result<Complex64> {
        Ok(self.log_value(t)?.exp())
    }

    /// (H, Ḣ, Ḧ) from t∂_t log τ = H + θ_*(t+θ_*)/2.
    pub fn hamiltonian(&self, t: Complex64) -> Result<[Complex64; 3]> {
        let j = self.jets(t)?;
        Ok(hamiltonian_from_jets(&self.params, t, &j))
    }
}

/// (H, Ḣ, Ḧ) from the t∂_t-jets of log τ.
pub fn hamiltonian_from_jets(p: &PVParams, t: Complex64, j: &LogJets) -> [Complex64; 3] {
    let ts = p.theta_star;
    let h = j.d1 - ts * (t + ts) * 0.5;
    let dh = j.d2 - ts * t * 0.5;
    let d2h = j.d3 - ts * t * 0.5;
    [h, dh / t, (d2h - dh) / (t * t)]
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

fn check_resonance(sigma: Complex64) -> Result<()> {
    let two = 2.0 * sigma;
    if two.im.abs() < 1e-12 && (two.re - two.re.round()).abs() < 1e-12 {
        return Err(PvError::Resonance { condition: format!("2 sigma = {two} is an integer") });
    }
    Ok(())
}

fn pinf_exponent(p: &PVParams, omega: Complex64) -> Complex64 {
    p.theta0 * p.theta0 + p.thetat * p.thetat + p.theta_star * p.theta_star - omega * omega * 0.5 - 0.25
}

/// log C₀(θ_*; σ; θ_t, θ₀).
pub fn log_c0_structure<T: Real>(theta_star: Cx<T>, sigma: Cx<T>, thetat: Cx<T>, theta0: Cx<T>) -> Result<Cx<T>> {
    let mut acc = Cx::new(T::zero(), T::zero());
    for eps in [1.0, -1.0] {
        let es = sigma * T::from_f64(eps);
        acc += log_barnes_g(theta_star + es)?;
        acc += log_barnes_g(theta0 + thetat + es)?;
        acc += log_barnes_g(thetat - theta0 + es)?;
        acc -= log_barnes_g(es + es)?;
    }
    Ok(acc)
}

pub fn c0_structure(theta_star: Complex64, sigma: Complex64, thetat: Complex64, theta0: Complex64) -> Result<Complex64> {
    Ok(log_c0_structure::<f64>(theta_star, sigma, thetat, theta0)?.exp())
}

/// log C_{i∞}(θ_t, θ_*; ν; θ₀).
pub fn log_c_iinf_structure<T: Real>(thetat: Cx<T>, theta_star: Cx<T>, nu: Cx<T>, theta0: Cx<T>) -> Result<Cx<T>> {
    let half_star = theta_star * T::from_ratio(1, 2);
    let two_pi = Cx::new(T::pi() * T::from_i128(2), T::zero());
    let mut acc = -(nu + nu) * cln(two_pi);
    for eps in [1.0, -1.0] {
        let e = T::from_f64(eps);
        acc += log_barnes_g(nu + theta0 * e - half_star)?;
        acc += log_barnes_g(nu + thetat * e + half_star)?;
    }
    Ok(acc)
}

pub fn c_iinf_structure(thetat: Complex64, theta_star: Complex64, nu: Complex64, theta0: Complex64) -> Result<Complex64> {
    Ok(log_c_iinf_structure::<f64>(thetat, theta_star, nu, theta0)?.exp())
}

/// log C_{+∞}(ω) = log[2^{−4θ₀²−4θ_t²−2θ_*²−ω²/2}(2π)^{−ω/2}e^{−iπω²/4}G(1+ω)].
pub fn log_c_pinf_structure<T: Real>(theta0: Cx<T>, thetat: Cx<T>, theta_star: Cx<T>, omega: Cx<T>) -> Result<Cx<T>> {
    let two = T::from_i128(2);
    let four = T::from_i128(4);
    let half = T::from_ratio(1, 2);
    let w2 = omega * omega;
    let e2 = -(theta0 * theta0 * four + thetat * thetat * four + theta_star * theta_star * two + w2 * half);
    let ln2 = cln(Cx::new(two, T::zero()));
    let ln2pi = cln(Cx::new(T::pi() * two, T::zero()));
    let ipi = Cx::new(T::zero(), T::pi());
    Ok(e2 * ln2 - omega * half * ln2pi - ipi * w2 * T::from_ratio(1, 4) + log_barnes_g(omega)?)
}

pub fn c_pinf_structure(theta0: Complex64, thetat: Complex64, theta_star: Complex64, omega: Complex64) -> Result<Complex64> {
    Ok(log_c_pinf_structure::<f64>(theta0, thetat, theta_star, omega)?.exp())
}

/// G_1..G_K at the given ω.
pub fn gk_coefficients(p: &PVParams, omega: Complex64, k: usize) -> Result<Vec<Complex64>> {
    if k > MAX_GK {
        return Err(PvError::OrderTooLarge { requested: k, max: MAX_GK });
    }
    let polys = gk_polynomials::<f64>(p.theta0, p.thetat, p.theta_star, k)?;
    Ok(polys.iter().map(|g| poly_eval(g, omega)).collect())
}

pub fn tau_zero(t: Complex64, sigma: Complex64, eta: Complex64, p: &PVParams, order: usize, window: usize) -> Result<Complex64> {
    TauSeries::zero(p, sigma, eta, order, window)?.value(t)
}

pub fn tau_iinf(t: Complex64, nu: Complex64, rho: Complex64, p: &PVParams, order: usize, window: usize) -> Result<Complex64> {
    TauSeries::iinf(p, nu, rho, order, window)?.value(t)
}

pub fn tau_pinf(t: Complex64, omega: Complex64, xi: Complex64, p: &PVParams, order: usize, window: usize) -> Result<Complex64> {
    TauSeries::pinf(p, omega, xi, order, window)?.value(t)
}

/// Default series order for the t → 0 channel.
pub fn default_zero_order() -> usize {
    DEFAULT_CB_ORDER
}

/// e^{iπx} helper re-exported for callers assembling phases.
pub fn exp_i_pi(x: Complex64) -> Complex64 {
    cexp_ipi::<f64>(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rel_diff, DoubleDouble};
    use crate::special_fn::gamma;
    use num_traits::Zero;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> PVParams {
        PVParams::real(0.17, 0.31, 0.2)
    }

    /// σ-PV residual, normalised by the size of its largest term.
    fn residual(p: &PVParams, t: Complex64, h: [Complex64; 3]) -> f64 {
        let [h0, hd, hdd] = h;
        let r = h0 - t * hd + 2.0 * hd * hd;
        let pp = (2.0 * hd - p.theta_star).powi(2) - 4.0 * p.theta0 * p.theta0;
        let ss = (2.0 * hd + p.theta_star).powi(2) - 4.0 * p.thetat * p.thetat;
        let a = (t * hdd).powi(2);
        let b = r * r;
        let cc = 0.25 * pp * ss;
        (a - b + cc).norm() / a.norm().max(b.norm()).max(cc.norm())
    }

    #[test]
    fn structure_constants_trivial_points() {
        assert!((c0_structure(c(0.0, 0.0), c(1e-3, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-5);
        assert!((c_iinf_structure(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn structure_constant_recurrences() {
        let (ts, s, tt, t0) = (c(0.2, 0.0), c(0.29, 0.05), c(0.31, 0.0), c(0.17, 0.0));
        let ratio = c0_structure(ts, s + 1.0, tt, t0).unwrap() / c0_structure(ts, s, tt, t0).unwrap();
        let g = |z: Complex64| gamma::<f64>(z).unwrap();
        let mut want = c(1.0, 0.0);
        for a in [ts, t0 + tt, tt - t0] {
            want *= g(1.0 + a + s) / g(a - s);
        }
        want *= g(-2.0 * s) * g(-2.0 * s - 1.0) / (g(2.0 * s + 1.0) * g(2.0 * s + 2.0));
        assert!(rel_diff(ratio, want) < 1e-11, "{ratio} {want}");

        let nu = c(0.13, -0.2);
        let ratio = c_iinf_structure(tt, ts, nu + 1.0, t0).unwrap() / c_iinf_structure(tt, ts, nu, t0).unwrap();
        let mut want = c((2.0 * std::f64::consts::PI).powi(-2), 0.0);
        for e in [1.0, -1.0] {
            want *= g(1.0 + nu + e * t0 - ts / 2.0) * g(1.0 + nu + e * tt + ts / 2.0);
        }
        assert!(rel_diff(ratio, want) < 1e-11);

        let w = c(0.23, 0.1);
        let cp = |x| c_pinf_structure(t0, tt, ts, x).unwrap();
        let r = cp(w + 1.0) * cp(w - 1.0) / (cp(w) * cp(w));
        assert!(rel_diff(r, -Complex64::i() * w / 2.0) < 1e-12);
    }

    #[test]
    fn c0_extended_precision_agrees() {
        type D = DoubleDouble;
        let z = |x: f64| Cx::new(D::from_f64(x), D::zero());
        let hi = log_c0_structure(z(0.2), z(0.29), z(0.31), z(0.17)).unwrap();
        let lo = log_c0_structure::<f64>(c(0.2, 0.0), c(0.29, 0.0), c(0.31, 0.0), c(0.17, 0.0)).unwrap();
        let d = (crate::scalar::to_c64(hi) - lo).norm();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn single_term_truncations() {
        let p = sample();
        let (s, t) = (c(0.29, 0.0), c(0.05, 0.01));
        let v = tau_zero(t, s, c(0.12, 0.0), &p, 0, 0).unwrap();
        let want = c0_structure(p.theta_star, s, p.thetat, p.theta0).unwrap()
            * (t.ln() * (s * s - p.theta0 * p.theta0 - p.thetat * p.thetat) - p.thetat * t).exp();
        assert!(rel_diff(v, want) < 1e-13);

        let (w, t) = (c(0.2, 0.1), c(25.0, 0.0));
        let v = tau_pinf(t, w, c(0.1, 0.0), &p, 0, 0).unwrap();
        let want = c_pinf_structure(p.theta0, p.thetat, p.theta_star, w).unwrap()
            * (pinf_exponent(&p, w) * t.ln() + t * t / 32.0 + (Complex64::i() * w + p.theta_star) * t / 2.0).exp();
        assert!(rel_diff(v, want) < 1e-12);
    }

    #[test]
    fn resonance_is_rejected() {
        let err = TauSeries::zero(&sample(), c(0.5, 0.0), c(0.0, 0.0), 4, 2).unwrap_err();
        assert_eq!(err.code(), "E_RESONANCE");
    }

    #[test]
    fn zero_channel_window_shift() {
        let p = sample();
        let (s, eta, t) = (c(0.29, 0.0), c(0.12, 0.03), c(0.06, 0.0));
        let a = TauSeries::zero(&p, s, eta, 8, 6).unwrap().log_value(t).unwrap();
        let b = TauSeries::zero(&p, s + 1.0, eta, 8, 7).unwrap().log_value(t).unwrap();
        // relabelling n → n−1 multiplies every term by e^{−2πiη}
        let d = crate::scalar::wrap_log(b - a + two_pi_i() * eta);
        assert!(d.norm() < 1e-8, "{d}");
    }

    #[test]
    fn zero_channel_solves_sigma_pv() {
        let p = sample();
        let ser = TauSeries::zero(&p, c(0.29, 0.0), c(0.12, 0.0), 8, 6).unwrap();
        for t in [c(0.02, 0.0), c(0.03, 0.02)] {
            assert!(residual(&p, t, ser.hamiltonian(t).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn asymptotic_channels_solve_sigma_pv() {
        let p = PVParams::new(c(0.2, 0.05), c(0.31, 0.0), c(0.47, -0.1));
        let mut prev = f64::INFINITY;
        for k in [2, 4] {
            let ser = TauSeries::iinf(&p, c(0.1, 0.05), c(0.2, 0.0), k, 2).unwrap();
            let r1 = residual(&p, c(0.0, 20.0), ser.hamiltonian(c(0.0, 20.0)).unwrap());
            let r2 = residual(&p, c(0.0, 40.0), ser.hamiltonian(c(0.0, 40.0)).unwrap());
            // doubling t must gain at least a factor 2^(k+1)
            assert!(r2 < r1 / 2f64.powi(k as i32 + 1) && r2 < prev, "{k} {r1} {r2}");
            prev = r2;
        }

        // each further G_k gains at least a factor 4 at t = 160
        let t = c(160.0, 0.0);
        let mut last = f64::INFINITY;
        for k in 0..=5 {
            let ser = TauSeries::pinf(&p, c(0.15, 0.05), c(0.3, 0.1), k, 3).unwrap();
            let r = residual(&p, t, ser.hamiltonian(t).unwrap());
            assert!(r < last / 4.0, "{k} {r}");
            last = r;
        }
        assert!(last < 1e-10, "{last}");
    }

    #[test]
    fn pinf_window_shift() {
        let p = PVParams::new(c(0.2, 0.05), c(0.31, 0.0), c(0.47, -0.1));
        let (w, xi, t) = (c(0.15, 0.05), c(0.3, 0.1), c(30.0, 0.0));
        let a = TauSeries::pinf(&p, w, xi, 3, 2).unwrap().log_value(t).unwrap();
        let b = TauSeries::pinf(&p, w + 1.0, xi, 3, 3).unwrap().log_value(t).unwrap();
        let d = crate::scalar::wrap_log(b - a + two_pi_i() * xi);
        assert!(d.norm() < 1e-8, "{d}");
    }
}
