//! Fredholm determinant representation of τ(t) in the Fourier basis.
//!
//! Modes are half-integers p ∈ {½, …, N−½}; each mode carries two components,
//! ordered as index `2(p−½) + component`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PvError, Result};
use crate::params::PVParams;
use crate::special_fn::log_gamma;
use crate::tau_expansions::log_c0_structure;

pub const DEFAULT_MODES: usize = 16;

/// Truncated blocks `ã_{p,−q}` (rows p, columns q) and `d̃_{−q,p}` (rows q, columns p).
#[derive(Clone, Debug)]
pub struct FourierBlockMatrix {
    pub modes: usize,
    pub a: DMatrix<Complex64>,
    pub d: DMatrix<Complex64>,
    pub s_minus: Complex64,
}

impl FourierBlockMatrix {
    /// `[[I, ã], [d̃, I]]`.
    pub fn full(&self) -> DMatrix<Complex64> {
        let m = 2 * self.modes;
        let mut full = DMatrix::identity(2 * m, 2 * m);
        full.view_mut((0, m), (m, m)).copy_from(&self.a);
        full.view_mut((m, 0), (m, m)).copy_from(&self.d);
        full
    }

    pub fn determinant(&self) -> Complex64 {
        self.full().lu().determinant()
    }

    /// `1 − Tr(ã_{½,−½} d̃_{−½,½})`.
    pub fn leading_order(&self) -> Complex64 {
        let a = self.a.view((0, 0), (2, 2));
        let d = self.d.view((0, 0), (2, 2));
        Complex64::new(1.0, 0.0) - (a * d).trace()
    }
}

/// s₋ from its printed square inverse, principal square root.
pub fn s_minus(sigma: Complex64, eta: Complex64, p: &PVParams) -> Result<Complex64> {
    Ok(1.0 / s_minus_inv_sq(sigma, eta, p)?.sqrt())
}

/// s₋⁻² as a function of (σ, η).
pub fn s_minus_inv_sq(sigma: Complex64, eta: Complex64, p: &PVParams) -> Result<Complex64> {
    let lg = |z: Complex64| log_gamma::<f64>(z);
    let (ts, t0, tt) = (p.theta_star, p.theta0, p.thetat);
    let num = 2.0 * lg(1.0 - 2.0 * sigma)? + lg(1.0 + ts + sigma)? + lg(1.0 + t0 + tt + sigma)? + lg(1.0 - t0 + tt + sigma)?;
    let den = 2.0 * lg(1.0 + 2.0 * sigma)? + lg(1.0 + ts - sigma)? + lg(1.0 + t0 + tt - sigma)? + lg(1.0 - t0 + tt - sigma)?;
    let phase = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (eta - sigma);
    Ok((num - den + phase).exp())
}

/// `(α)_n / n!` for n = 0..len.
fn poch_over_fact(alpha: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut v = Complex64::new(1.0, 0.0);
    for n in 0..len {
        out.push(v);
        v *= (alpha + n as f64) / (n + 1) as f64;
    }
    out
}

/// `(α)_n` for n = 0..len.
fn poch(alpha: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut v = Complex64::new(1.0, 0.0);
    for n in 0..len {
        out.push(v);
        v *= alpha + n as f64;
    }
    out
}

fn check_modes(sigma: Complex64, modes: usize) -> Result<()> {
    let two = 2.0 * sigma;
    if two.im.abs() < 1e-12 && (two.re - two.re.round()).abs() < 1e-12 {
        return Err(PvError::Resonance { condition: format!("2 sigma = {two} is an integer") });
    }
    if modes == 0 {
        return Err(PvError::Config("at least one Fourier mode is needed".into()));
    }
    Ok(())
}

pub fn matrix_elements(
    t: Complex64,
    sigma: Complex64,
    theta_star: Complex64,
    theta0: Complex64,
    thetat: Complex64,
    s_minus: Complex64,
    modes: usize,
) -> Result<FourierBlockMatrix> {
    check_modes(sigma, modes)?;
    let n = modes;
    let s = sigma;
    let one = Complex64::new(1.0, 0.0);
    let ipi = Complex64::new(0.0, std::f64::consts::PI);
    let ts = t.powc(s) * (ipi * s).exp();
    let ts_inv = 1.0 / ts;

    // index m = p − ½ = 0..n; (α)_{p+½} = (α)_{m+1}, (α)_{q−½} = (α)_m, (p−½)! = m!
    let num_a1 = poch(s - theta_star, n + 1);
    let den_a1 = poch(2.0 * s, n + 1);
    let num_a2 = poch(-s - theta_star, n + 1);
    let den_a2 = poch(-2.0 * s, n + 1);
    let col_a1 = poch_over_fact(1.0 - s + theta_star, n);
    let col_a1d = poch(1.0 - 2.0 * s, n);
    let col_a2 = poch_over_fact(1.0 + s + theta_star, n);
    let col_a2d = poch(1.0 + 2.0 * s, n);
    let mut inv_fact = vec![one; n];
    for m in 1..n {
        inv_fact[m] = inv_fact[m - 1] / m as f64;
    }

    let mut row_a = vec![[Complex64::new(0.0, 0.0); 2]; n];
    let mut col_a = vec![[Complex64::new(0.0, 0.0); 2]; n];
    let mut tp = t.sqrt();
    for m in 0..n {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let lead = tp * sign * inv_fact[m];
        row_a[m] = [lead * num_a1[m + 1] / den_a1[m + 1] * ts, lead * num_a2[m + 1] / den_a2[m + 1] * ts_inv];
        // (1−σ+θ_*)_m/m! already includes the column factorial
        col_a[m] = [tp * col_a1[m] / col_a1d[m] * ts_inv, tp * col_a2[m] / col_a2d[m] * ts];
        tp *= t;
    }

    let (t0, tt) = (theta0, thetat);
    let d_row1 = poch_over_fact(1.0 + t0 + tt - s, n);
    let d_row1b = poch(1.0 - t0 + tt - s, n);
    let d_row1d = poch(1.0 - 2.0 * s, n);
    let d_row2 = poch_over_fact(1.0 + t0 + tt + s, n);
    let d_row2b = poch(1.0 - t0 + tt + s, n);
    let d_row2d = poch(1.0 + 2.0 * s, n);
    let d_col1 = poch(t0 - tt + s, n + 1);
    let d_col1b = poch(-t0 - tt + s, n + 1);
    let d_col2 = poch(t0 - tt - s, n + 1);
    let d_col2b = poch(-t0 - tt - s, n + 1);
    let mut row_d = vec![[Complex64::new(0.0, 0.0); 2]; n];
    let mut col_d = vec![[Complex64::new(0.0, 0.0); 2]; n];
    for m in 0..n {
        row_d[m] = [
            d_row1[m] * d_row1b[m] / d_row1d[m] * s_minus,
            -d_row2[m] * d_row2b[m] / d_row2d[m] / s_minus,
        ];
        col_d[m] = [
            inv_fact[m] * d_col1[m + 1] * d_col1b[m + 1] / den_a1[m + 1] / s_minus,
            -inv_fact[m] * d_col2[m + 1] * d_col2b[m + 1] / den_a2[m + 1] * s_minus,
        ];
    }

    let cauchy = |pq: f64, i: usize, j: usize, sgn: f64| -> Complex64 {
        match (i, j) {
            (0, 1) => 1.0 / (pq + sgn * 2.0 * s),
            (1, 0) => 1.0 / (pq - sgn * 2.0 * s),
            _ => Complex64::new(1.0 / pq, 0.0),
        }
    };
    let size = 2 * n;
    let mut a = DMatrix::zeros(size, size);
    let mut d = DMatrix::zeros(size, size);
    for mp in 0..n {
        for mq in 0..n {
            let pq = (mp + mq + 1) as f64;
            for i in 0..2 {
                for j in 0..2 {
                    a[(2 * mp + i, 2 * mq + j)] = row_a[mp][i] * cauchy(pq, i, j, 1.0) * col_a[mq][j];
                    // d̃_{−q,p}: rows q, columns p
                    d[(2 * mq + i, 2 * mp + j)] = row_d[mq][i] * cauchy(pq, i, j, -1.0) * col_d[mp][j];
                }
            }
        }
    }
    Ok(FourierBlockMatrix { modes, a, d, s_minus })
}

/// Builds the blocks for given monodromy parameters.
pub fn fourier_blocks(t: Complex64, sigma: Complex64, eta: Complex64, p: &PVParams, modes: usize) -> Result<FourierBlockMatrix> {
    check_modes(sigma, modes)?;
    let s = s_minus(sigma, eta, p)?;
    matrix_elements(t, sigma, p.theta_star, p.theta0, p.thetat, s, modes)
}

/// `log[t^{σ²−θ₀²−θ_t²} e^{−θ_t t}]`.
fn log_prefactor(t: Complex64, sigma: Complex64, p: &PVParams) -> Complex64 {
    (sigma * sigma - p.theta0 * p.theta0 - p.thetat * p.thetat) * t.ln() - p.thetat * t
}

pub fn log_tau_fredholm(t: Complex64, sigma: Complex64, eta: Complex64, p: &PVParams, modes: usize) -> Result<Complex64> {
    p.require_c1()?;
    let det = fourier_blocks(t, sigma, eta, p, modes)?.determinant();
    if det == Complex64::new(0.0, 0.0) {
        return Err(PvError::Config("Fredholm determinant vanishes".into()));
    }
    Ok(log_prefactor(t, sigma, p) + det.ln())
}

pub fn tau_fredholm(t: Complex64, sigma: Complex64, eta: Complex64, p: &PVParams, modes: usize) -> Result<Complex64> {
    Ok(log_tau_fredholm(t, sigma, eta, p, modes)?.exp())
}

/// log τ with the determinant rescaled by C₀(σ), i.e. in the normalization of the t → 0 series.
pub fn log_tau_fredholm_normalized(t: Complex64, sigma: Complex64, eta: Complex64, p: &PVParams, modes: usize) -> Result<Complex64> {
    let c0 = log_c0_structure::<f64>(p.theta_star, sigma, p.thetat, p.theta0)?;
    Ok(log_tau_fredholm(t, sigma, eta, p, modes)? + c0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;
    use crate::tau_expansions::TauSeries;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> (PVParams, Complex64, Complex64) {
        (PVParams::real(0.20, 0.31, 0.47), c(0.29, 0.0), c(0.12, 0.0))
    }

    #[test]
    fn s_minus_round_trip_and_periodicity() {
        let (p, s, e) = sample();
        let sm = s_minus(s, e, &p).unwrap();
        assert!(rel_diff(1.0 / (sm * sm), s_minus_inv_sq(s, e, &p).unwrap()) < 1e-12);
        assert!(rel_diff(s_minus(s, e + 1.0, &p).unwrap(), sm) < 1e-12);
    }

    #[test]
    fn s_minus_fixed_point() {
        let (p, s, _) = sample();
        // choose η so that the phase cancels the Γ-ratio
        let g = s_minus_inv_sq(s, c(0.0, 0.0), &p).unwrap();
        let eta = -g.ln() / c(0.0, 2.0 * std::f64::consts::PI);
        assert!((s_minus(s, eta, &p).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn first_mode_matches_printed_cores() {
        let (p, s, _) = sample();
        let (t0, tt, ts) = (p.theta0, p.thetat, p.theta_star);
        // t = 1, s₋ = 1 and σ real but phases e^{±iπσ}: strip them by hand
        let m = matrix_elements(c(1.0, 0.0), s, ts, t0, tt, c(1.0, 0.0), 1).unwrap();
        let e = (c(0.0, std::f64::consts::PI) * s).exp();
        let g = [e, 1.0 / e];
        let x = |i: usize, j: usize| m.a[(i, j)] / g[i] * g[j];
        // the ã core is the printed d-core shifted by ½, the d̃ core the printed a-core shifted by −θ_t
        let d_j = [[-ts / (2.0 * s), (s - ts) / (2.0 * s * (1.0 + 2.0 * s))], [(s + ts) / (2.0 * s * (1.0 - 2.0 * s)), ts / (2.0 * s)]];
        let a_j = [
            [(s * s + tt * tt - t0 * t0) / (2.0 * s), ((tt + s).powi(2) - t0 * t0) / (2.0 * s * (1.0 - 2.0 * s))],
            [(t0 * t0 - (tt - s).powi(2)) / (2.0 * s * (1.0 + 2.0 * s)), (t0 * t0 - tt * tt - s * s) / (2.0 * s)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let shift = if i == j { 1.0 } else { 0.0 };
                assert!((x(i, j) - d_j[i][j] - 0.5 * shift).norm() < 1e-13, "a {i}{j}");
                assert!((m.d[(i, j)] - a_j[i][j] + tt * shift).norm() < 1e-13, "d {i}{j}");
            }
        }
    }

    #[test]
    fn d_is_t_independent_and_a_scales() {
        let (p, s, e) = sample();
        let m1 = fourier_blocks(c(0.05, 0.0), s, e, &p, 3).unwrap();
        let m2 = fourier_blocks(c(0.1, 0.0), s, e, &p, 3).unwrap();
        assert!((&m1.d - &m2.d).norm() < 1e-14);
        let f = 2f64.powf(0.58);
        assert!(rel_diff(m2.a[(0, 0)], 2.0 * m1.a[(0, 0)]) < 1e-13);
        assert!(rel_diff(m2.a[(0, 1)], 2.0 * f * m1.a[(0, 1)]) < 1e-13);
        assert!(rel_diff(m2.a[(1, 0)], 2.0 / f * m1.a[(1, 0)]) < 1e-13);
    }

    #[test]
    fn conjugation_gauge_leaves_determinant() {
        let (p, s, e) = sample();
        let mut m = fourier_blocks(c(0.07, 0.01), s, e, &p, 6).unwrap();
        let det = m.determinant();
        let k = 2.0;
        for r in 0..m.a.nrows() {
            for col in 0..m.a.ncols() {
                let f = |i: usize| if i.is_multiple_of(2) { k } else { 1.0 / k };
                m.a[(r, col)] *= f(r) / f(col);
                m.d[(r, col)] *= f(r) / f(col);
            }
        }
        assert!(rel_diff(m.determinant(), det) < 1e-13);
        let sm = s_minus(s, e, &p).unwrap();
        let flipped = matrix_elements(c(0.07, 0.01), s, p.theta_star, p.theta0, p.thetat, -sm, 6).unwrap();
        assert!(rel_diff(flipped.determinant(), det) < 1e-13);
    }

    fn cofactor_det(m: &DMatrix<Complex64>) -> Complex64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = c(0.0, 0.0);
        for j in 0..n {
            if m[(0, j)] == c(0.0, 0.0) {
                continue;
            }
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[(0, j)] * sign * cofactor_det(&minor);
        }
        acc
    }

    #[test]
    fn cofactor_expansion_agrees() {
        let (p, s, e) = sample();
        let m = fourier_blocks(c(0.3, 0.1), s, e, &p, 2).unwrap();
        assert!(rel_diff(cofactor_det(&m.full()), m.determinant()) < 1e-13);
    }

    #[test]
    fn truncation_converges() {
        let (p, s, e) = sample();
        for t in [c(0.1, 0.0), c(0.0, 0.1), c(0.05, 0.05)] {
            let a = fourier_blocks(t, s, e, &p, 12).unwrap().determinant();
            let b = fourier_blocks(t, s, e, &p, 16).unwrap().determinant();
            assert!(rel_diff(a, b) < 1e-10);
        }
    }

    #[test]
    fn ratio_to_series_is_constant() {
        let (p, s, e) = sample();
        let ser = TauSeries::zero(&p, s, e, 8, 6).unwrap();
        let ratio = |t: f64| {
            let t = c(t, 0.0);
            log_tau_fredholm(t, s, e, &p, 16).unwrap() - ser.log_value(t).unwrap()
        };
        let r0 = ratio(0.04);
        for t in [0.06, 0.08] {
            let d = crate::scalar::wrap_log(ratio(t) - r0);
            assert!(d.norm() < 1e-8, "{t} {d}");
        }
        // the constant is 1/C₀(σ)
        let n = log_tau_fredholm_normalized(c(0.04, 0.0), s, e, &p, 16).unwrap() - ser.log_value(c(0.04, 0.0)).unwrap();
        assert!(crate::scalar::wrap_log(n).norm() < 1e-8, "{n}");
    }

    #[test]
    fn leading_order_is_jimbo() {
        let p = PVParams::real(0.20, 0.31, 0.47);
        let (s, e) = (c(0.15, 0.0), c(0.12, 0.0));
        let err = |t: f64| {
            let m = fourier_blocks(c(t, 0.0), s, e, &p, 6).unwrap();
            (m.determinant() - m.leading_order()).norm()
        };
        let (e3, e4, e5) = (err(1e-3), err(1e-4), err(1e-5));
        assert!((e3 / e4).log10() > 1.4 && (e4 / e5).log10() > 1.4, "{e3} {e4} {e5}");
    }
}
