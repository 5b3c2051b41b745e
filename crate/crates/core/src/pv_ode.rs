//! Integration of σ-PV along the canonical rays.
//!
//! The equation is differentiated once, giving an explicit third-order system
//! for (H, Ḣ, Ḧ); the original equation is monitored as an invariant. log τ is
//! carried along through t∂_t log τ = H + θ_*(t+θ_*)/2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{log_upsilon_0_iinf, log_upsilon_iinf_pinf, AsymptoticLabels};
use crate::error::{PvError, Result};
use crate::params::PVParams;
use crate::scalar::wrap_log;
use crate::tau_expansions::{hamiltonian_from_jets, Channel, TauSeries};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const SEED_MARGIN: f64 = 1e-10;
pub const RESIDUAL_LIMIT: f64 = 1e-6;
/// |t₀| of the series seed used by [`verify_ray`].
pub const SEED_RADIUS: f64 = 0.05;
pub const SEED_ORDER: usize = 8;
pub const SEED_WINDOW: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ray {
    PositiveReal,
    PositiveImaginary,
}

impl Ray {
    pub fn direction(self) -> Complex64 {
        match self {
            Ray::PositiveReal => Complex64::new(1.0, 0.0),
            Ray::PositiveImaginary => Complex64::new(0.0, 1.0),
        }
    }
}

impl std::str::FromStr for Ray {
    type Err = PvError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" | "positive-real" | "+inf" => Ok(Ray::PositiveReal),
            "imag" | "imaginary" | "positive-imaginary" | "iinf" => Ok(Ray::PositiveImaginary),
            other => Err(PvError::Config(format!("unknown ray '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianState {
    pub t: Complex64,
    pub h: Complex64,
    pub hd: Complex64,
    pub hdd: Complex64,
    pub log_tau: Complex64,
}

/// σ-PV residual scaled by its largest term.
pub fn sigma_pv_residual(p: &PVParams, t: Complex64, h: Complex64, hd: Complex64, hdd: Complex64) -> f64 {
    let r = h - t * hd + 2.0 * hd * hd;
    let pp = (2.0 * hd - p.theta_star).powi(2) - 4.0 * p.theta0 * p.theta0;
    let ss = (2.0 * hd + p.theta_star).powi(2) - 4.0 * p.thetat * p.thetat;
    let a = (t * hdd).powi(2);
    let b = r * r;
    let c = 0.25 * pp * ss;
    let scale = a.norm().max(b.norm()).max(c.norm()).max(f64::MIN_POSITIVE);
    (a - b + c).norm() / scale
}

impl HamiltonianState {
    pub fn residual(&self, p: &PVParams) -> f64 {
        sigma_pv_residual(p, self.t, self.h, self.hd, self.hdd)
    }
}

/// Third derivative from the differentiated equation.
fn third_derivative(p: &PVParams, t: Complex64, h: Complex64, hd: Complex64, hdd: Complex64) -> Complex64 {
    let r = h - t * hd + 2.0 * hd * hd;
    let pp = (2.0 * hd - p.theta_star).powi(2) - 4.0 * p.theta0 * p.theta0;
    let ss = (2.0 * hd + p.theta_star).powi(2) - 4.0 * p.thetat * p.thetat;
    (2.0 * r * (4.0 * hd - t) - 2.0 * t * hdd - (2.0 * hd - p.theta_star) * ss - (2.0 * hd + p.theta_star) * pp) / (2.0 * t * t)
}

type Vec4 = [Complex64; 4];

fn rhs(p: &PVParams, t: Complex64, y: &Vec4) -> Vec4 {
    let [h, hd, hdd, _] = *y;
    let ts = p.theta_star;
    [hd, hdd, third_derivative(p, t, h, hd, hdd), (h + ts * (t + ts) * 0.5) / t]
}

/// Seeds (H, Ḣ, Ḧ, log τ) from the t → 0 series.
pub fn seed_from_series(
    t0: Complex64,
    sigma: Complex64,
    eta: Complex64,
    p: &PVParams,
    order: usize,
    window: usize,
) -> Result<HamiltonianState> {
    let ser = TauSeries::zero(p, sigma, eta, order, window)?;
    let jets = ser.jets(t0)?;
    if order > 0 {
        let lower = TauSeries::zero(p, sigma, eta, order - 1, window)?.log_value(t0)?;
        let ratio = wrap_log(jets.log_tau - lower).norm();
        if ratio > SEED_MARGIN {
            return Err(PvError::SeriesMargin { ratio });
        }
    }
    let [h, hd, hdd] = hamiltonian_from_jets(p, t0, &jets);
    Ok(HamiltonianState { t: t0, h, hd, hdd, log_tau: jets.log_tau })
}

/// Closed-form state of the special solution τ = t^{θ_*²−⅛} e^{t²/32+θ_* t/2} (θ₀ = θ_t = ¼).
pub fn special_solution_state(theta_star: Complex64, t: Complex64) -> HamiltonianState {
    let ts = theta_star;
    HamiltonianState {
        t,
        h: t * t / 16.0 - 0.125 + ts * ts * 0.5,
        hd: t / 8.0,
        hdd: Complex64::new(0.125, 0.0),
        log_tau: (ts * ts - 0.125) * t.ln() + t * t / 32.0 + ts * t * 0.5,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: Complex64,
    pub h: Complex64,
    pub hd: Complex64,
    pub hdd: Complex64,
    pub log_tau: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub max_residual: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    /// Accepted point closest to |t| = r.
    pub fn at(&self, r: f64) -> Option<&TrajectoryPoint> {
        self.points.iter().min_by(|a, b| (a.t.norm() - r).abs().total_cmp(&(b.t.norm() - r).abs()))
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_re,t_im,H_re,H_im,logtau_re,logtau_im,residual\n");
        for q in &self.points {
            s += &format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e}\n",
                q.t.re, q.t.im, q.h.re, q.h.im, q.log_tau.re, q.log_tau.im, q.residual
            );
        }
        s
    }
}

/// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One DOPRI5 step in the ray parameter r (dt = e^{iφ} dr). Returns (y5, error estimate).
fn dopri_step(p: &PVParams, dir: Complex64, r: f64, y: &Vec4, dr: f64) -> (Vec4, [f64; 4]) {
    let mut k: [Vec4; 7] = [[Complex64::new(0.0, 0.0); 4]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            if A[s][j] != 0.0 {
                for i in 0..4 {
                    ys[i] += kj[i] * (A[s][j] * dr);
                }
            }
        }
        let t = dir * (r + C[s] * dr);
        let f = rhs(p, t, &ys);
        for i in 0..4 {
            k[s][i] = f[i] * dir;
        }
    }
    let mut y5 = *y;
    let mut err = [0.0; 4];
    for i in 0..4 {
        let mut e = Complex64::new(0.0, 0.0);
        for s in 0..7 {
            y5[i] += k[s][i] * (B5[s] * dr);
            e += k[s][i] * ((B5[s] - B4[s]) * dr);
        }
        err[i] = e.norm();
    }
    (y5, err)
}

/// Integrates along the ray from the seed to |t| = `r_end`, landing exactly on every radius in `stops`.
pub fn integrate(p: &PVParams, state0: &HamiltonianState, ray: Ray, r_end: f64, tol: f64, stops: &[f64]) -> Result<Trajectory> {
    integrate_along(p, state0, ray.direction(), r_end, tol, stops)
}

/// As [`integrate`], along an arbitrary unit direction.
pub fn integrate_along(
    p: &PVParams,
    state0: &HamiltonianState,
    dir: Complex64,
    r_end: f64,
    tol: f64,
    stops: &[f64],
) -> Result<Trajectory> {
    let r0 = (state0.t / dir).re;
    if (state0.t - dir * r0).norm() > 1e-12 * state0.t.norm().max(1.0) || r0 <= 0.0 {
        return Err(PvError::Config(format!("seed t = {} is not on the ray through {dir}", state0.t)));
    }
    if r_end <= r0 {
        return Err(PvError::Config("integration end must lie beyond the seed".into()));
    }
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > r0 && s < r_end).collect();
    targets.push(r_end);
    targets.sort_by(f64::total_cmp);
    let min_step = 1e-12 * (r_end - r0);

    let mut y: Vec4 = [state0.h, state0.hd, state0.hdd, state0.log_tau];
    let mut r = r0;
    let mut dr = (0.01 * r0).max(1e-4).min(r_end - r0);
    let mut traj = Trajectory::default();
    let push = |traj: &mut Trajectory, r: f64, y: &Vec4| -> Result<()> {
        let t = dir * r;
        let residual = sigma_pv_residual(p, t, y[0], y[1], y[2]);
        if !residual.is_finite() || residual > RESIDUAL_LIMIT {
            return Err(PvError::ResidualDrift { residual, t: format!("{t}") });
        }
        traj.max_residual = traj.max_residual.max(residual);
        traj.points.push(TrajectoryPoint { t, h: y[0], hd: y[1], hdd: y[2], log_tau: y[3], residual });
        Ok(())
    };
    push(&mut traj, r, &y)?;
    for &target in &targets {
        while r < target {
            let mut step = dr.min(target - r);
            let landing = step >= target - r;
            if step < min_step {
                return Err(PvError::PoleProximity { t: format!("{}", dir * r) });
            }
            let (y5, err) = dopri_step(p, dir, r, &y, step);
            let mut e = 0.0f64;
            for i in 0..4 {
                let sc = tol * (1.0 + y[i].norm().max(y5[i].norm()));
                e = e.max(err[i] / sc);
            }
            if !e.is_finite() {
                e = 1e10;
            }
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            if e <= 1.0 {
                r = if landing { target } else { r + step };
                y = y5;
                traj.steps += 1;
                push(&mut traj, r, &y)?;
                if !landing {
                    dr = step * fac;
                } else {
                    dr = dr.max(step * fac);
                }
            } else {
                traj.rejected += 1;
                step *= fac;
                dr = step;
            }
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonSample {
    pub t: Complex64,
    pub log_ode: Complex64,
    pub log_asymptotic: Complex64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub channel: Channel,
    pub log_normalization: Complex64,
    pub samples: Vec<ComparisonSample>,
    pub max_deviation: f64,
}

fn need(v: Option<Complex64>, name: &str) -> Result<Complex64> {
    v.ok_or_else(|| PvError::Genericity { condition: format!("{name} is not defined for this monodromy") })
}

/// log of N·τ_channel with N = Υ_{0→i∞} or Υ_{0→i∞}Υ_{i∞→+∞}.
pub fn log_normalization(channel: Channel, labels: &AsymptoticLabels, p: &PVParams) -> Result<Complex64> {
    let sigma = need(labels.sigma, "sigma")?;
    let nu = need(labels.nu, "nu")?;
    let lambda = need(labels.lambda, "lambda")?;
    let base = log_upsilon_0_iinf::<f64>(sigma, nu, lambda, p.theta0, p.thetat, p.theta_star)?;
    match channel {
        Channel::IInfinity => Ok(base),
        Channel::PlusInfinity => Ok(base + log_upsilon_iinf_pinf::<f64>(nu, need(labels.omega, "omega")?)?),
        Channel::Zero => Ok(Complex64::new(0.0, 0.0)),
    }
}

/// Compares the integrated log τ with the normalised long-distance expansion at the given radii.
pub fn fit_and_compare(
    trajectory: &Trajectory,
    channel: Channel,
    labels: &AsymptoticLabels,
    p: &PVParams,
    order: usize,
    window: usize,
    radii: &[f64],
) -> Result<ComparisonReport> {
    let series = match channel {
        Channel::IInfinity => TauSeries::iinf(p, need(labels.nu, "nu")?, need(labels.rho, "rho")?, order, window)?,
        Channel::PlusInfinity => TauSeries::pinf(p, need(labels.omega, "omega")?, need(labels.xi, "xi")?, order, window)?,
        Channel::Zero => TauSeries::zero(p, need(labels.sigma, "sigma")?, need(labels.eta, "eta")?, order, window)?,
    };
    let log_n = log_normalization(channel, labels, p)?;
    let mut samples = Vec::new();
    for &r in radii {
        let point = trajectory.at(r).ok_or_else(|| PvError::Config("empty trajectory".into()))?;
        let log_asymptotic = log_n + series.log_value(point.t)?;
        let deviation = wrap_log(log_asymptotic - point.log_tau).norm();
        samples.push(ComparisonSample { t: point.t, log_ode: point.log_tau, log_asymptotic, deviation });
    }
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(ComparisonReport { channel, log_normalization: log_n, samples, max_deviation })
}

impl Ray {
    /// Long-distance channel compared on this ray.
    pub fn channel(self) -> Channel {
        match self {
            Ray::PositiveReal => Channel::PlusInfinity,
            Ray::PositiveImaginary => Channel::IInfinity,
        }
    }
}

/// Seeds at |t| = [`SEED_RADIUS`] from the (σ, η) series, integrates to the
/// largest radius and compares with the normalised expansion of the ray's channel.
#[allow(clippy::too_many_arguments)]
pub fn verify_ray(
    p: &PVParams,
    sigma: Complex64,
    eta: Complex64,
    labels: &AsymptoticLabels,
    ray: Ray,
    order: usize,
    window: usize,
    radii: &[f64],
) -> Result<(Trajectory, ComparisonReport)> {
    let r_end = radii.iter().copied().fold(0.0, f64::max);
    let seed = seed_from_series(ray.direction() * SEED_RADIUS, sigma, eta, p, SEED_ORDER, SEED_WINDOW)?;
    let traj = integrate(p, &seed, ray, r_end, DEFAULT_TOL, radii)?;
    let report = fit_and_compare(&traj, ray.channel(), labels, p, order, window, radii)?;
    Ok((traj, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn special_solution_satisfies_equation() {
        for ts in [0.0, 0.3, -0.47] {
            let p = PVParams::real(0.25, 0.25, ts);
            for k in 0..=50 {
                let t = c(0.1 + 9.9 * k as f64 / 50.0, 0.0);
                let s = special_solution_state(p.theta_star, t);
                assert!(s.residual(&p) < 1e-12);
            }
        }
    }

    #[test]
    fn integrator_follows_special_solution() {
        let p = PVParams::real(0.25, 0.25, 0.3);
        let s0 = special_solution_state(p.theta_star, c(0.1, 0.0));
        let traj = integrate(&p, &s0, Ray::PositiveReal, 10.0, DEFAULT_TOL, &[]).unwrap();
        for q in &traj.points {
            let exact = special_solution_state(p.theta_star, q.t);
            assert!(rel_diff(q.h, exact.h) < 1e-9, "{} {} {}", q.t, q.h, exact.h);
            assert!((q.log_tau - exact.log_tau).norm() < 1e-9 * exact.log_tau.norm().max(1.0));
        }
    }

    #[test]
    fn seed_is_consistent() {
        let p = PVParams::real(0.20, 0.31, 0.47);
        let (s, e) = (c(0.29, 0.0), c(0.12, 0.0));
        let st = seed_from_series(c(0.05, 0.0), s, e, &p, 8, 6).unwrap();
        assert!(st.residual(&p) < 1e-8);
        let other = seed_from_series(c(0.05, 0.0), s, e + 0.3, &p, 8, 6).unwrap();
        assert!((other.hd - st.hd).norm() > 1e-6);
        // leading behaviour from the n = 0 term
        let lead = s * s - p.theta0 * p.theta0 - p.thetat * p.thetat - p.theta_star * (0.05 + p.theta_star) * 0.5;
        assert!((st.h - lead).norm() < 0.2);
        assert_eq!(seed_from_series(c(0.6, 0.0), s, e, &p, 4, 6).unwrap_err().code(), "E_SERIES_MARGIN");
    }

    #[test]
    fn integration_agrees_with_series_at_overlap() {
        let p = PVParams::real(0.20, 0.31, 0.47);
        let (s, e) = (c(0.29, 0.0), c(0.12, 0.0));
        let st = seed_from_series(c(0.05, 0.0), s, e, &p, 8, 6).unwrap();
        let traj = integrate(&p, &st, Ray::PositiveReal, 0.2, DEFAULT_TOL, &[]).unwrap();
        let end = traj.last().unwrap();
        let direct = TauSeries::zero(&p, s, e, 10, 6).unwrap().log_value(end.t).unwrap();
        assert!(wrap_log(direct - end.log_tau).norm() < 1e-7);
        assert!(traj.max_residual < 1e-8);
    }

    #[test]
    fn tolerance_halving_converges() {
        let p = PVParams::real(0.20, 0.31, 0.47);
        let st = seed_from_series(c(0.0, 0.05), c(0.29, 0.0), c(0.12, 0.0), &p, 8, 6).unwrap();
        let a = integrate(&p, &st, Ray::PositiveImaginary, 5.0, 1e-10, &[]).unwrap();
        let b = integrate(&p, &st, Ray::PositiveImaginary, 5.0, 5e-11, &[]).unwrap();
        let d = (a.last().unwrap().log_tau - b.last().unwrap().log_tau).norm();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn reflection_symmetry() {
        // H(t) with θ_* and H(−t) with −θ_* solve the same equation
        let p = PVParams::real(0.20, 0.31, 0.47);
        let q = PVParams { theta_star: -p.theta_star, ..p };
        let st = seed_from_series(c(0.0, 0.05), c(0.29, 0.0), c(0.12, 0.0), &p, 8, 6).unwrap();
        let mirrored = HamiltonianState { t: -st.t, h: st.h, hd: -st.hd, hdd: st.hdd, log_tau: st.log_tau };
        assert!(mirrored.residual(&q) < 1e-8);
        let a = integrate(&p, &st, Ray::PositiveImaginary, 3.0, 1e-12, &[]).unwrap();
        let b = integrate_along(&q, &mirrored, c(0.0, -1.0), 3.0, 1e-12, &[]).unwrap();
        let (ea, eb) = (a.last().unwrap(), b.last().unwrap());
        assert!((ea.t + eb.t).norm() < 1e-14);
        assert!(rel_diff(ea.h, eb.h) < 1e-9);
        assert!(rel_diff(ea.hd, -eb.hd) < 1e-9);
    }

    #[test]
    fn step_collapse_is_reported() {
        // a state far off the solution manifold blows up in finite time
        let p = PVParams::real(0.2, 0.31, 0.47);
        let bad = HamiltonianState { t: c(1.0, 0.0), h: c(50.0, 0.0), hd: c(30.0, 0.0), hdd: c(40.0, 0.0), log_tau: c(0.0, 0.0) };
        let err = integrate(&p, &bad, Ray::PositiveReal, 10.0, DEFAULT_TOL, &[]).unwrap_err();
        assert!(matches!(err.code(), "E_POLE_PROXIMITY" | "E_RESIDUAL_DRIFT"));
    }
}
