//! The +∞ coefficients G_k(ω) from the σ-PV equation.
//!
//! A single term t^κ e^{t²/32+(iω+θ_*)t/2}(1 + Σ G_k t^{−k}) does not solve
//! σ-PV on its own when ω ≠ 0: the t³ coefficient of the residual is
//! proportional to ω. Cancellation only happens inside the full Fourier sum,
//! where the n = ±1 neighbours feed back into the non-oscillating part. We
//! therefore work with τ/τ_{n=0} as a two-variable series in
//! X = t^{−ω−½} e^{it/2} and 1/t,
//!
//!   T = Σ_n c_n(ω) X^n t^{−n(n−1)/2} (1 + Σ_k G_k(ω+n) t^{−k}),
//!
//! with c_n built from C_{+∞}(ω+1)C_{+∞}(ω−1)/C_{+∞}(ω)² = −iω/2. Each G_k is
//! a polynomial of degree 3k in ω, so the shifted values are tied together and
//! the coefficients follow stage by stage from the X⁰ and X¹ components of
//! the residual, sampled at several ω.
//!
//! A term X^m t^p carries weight 2p − m. Every correction in T has negative
//! weight, so log T is a finite sum once everything below a floor is dropped.

use crate::error::{PvError, Result};
use crate::linalg::lstsq;
use crate::scalar::{cx, Cx, Real};
use num_traits::Zero;

/// Largest K accepted by [`gk_polynomials`].
pub const MAX_GK: usize = 6;

/// ω samples sit on a circle of this radius; larger circles lose digits to
/// the monomial basis at the shifted points ω ± n.
const SAMPLE_RADIUS: f64 = 0.35;

#[derive(Clone, Copy, Debug)]
struct Grid {
    mmax: i32,
    pmin: i32,
    pmax: i32,
    floor: i32,
}

impl Grid {
    fn np(&self) -> usize {
        (self.pmax - self.pmin + 1) as usize
    }

    fn len(&self) -> usize {
        (2 * self.mmax + 1) as usize * self.np()
    }

    fn index(&self, m: i32, p: i32) -> Option<usize> {
        if m.abs() > self.mmax || 2 * p - m < self.floor || p < self.pmin {
            return None;
        }
        assert!(p <= self.pmax, "graded series overflow at t^{p}");
        Some((m + self.mmax) as usize * self.np() + (p - self.pmin) as usize)
    }
}

#[derive(Clone)]
struct Graded<T: Real> {
    grid: Grid,
    c: Vec<Cx<T>>,
}

impl<T: Real> Graded<T> {
    fn zero(grid: Grid) -> Self {
        Graded { grid, c: vec![cx(0.0, 0.0); grid.len()] }
    }

    fn get(&self, m: i32, p: i32) -> Cx<T> {
        if m.abs() > self.grid.mmax || p < self.grid.pmin || p > self.grid.pmax {
            return cx(0.0, 0.0);
        }
        self.grid.index(m, p).map_or(cx(0.0, 0.0), |i| self.c[i])
    }

    fn add_at(&mut self, m: i32, p: i32, v: Cx<T>) {
        if let Some(i) = self.grid.index(m, p) {
            self.c[i] += v;
        }
    }

    /// Nonzero terms as `(m, p, weight, value)`, heaviest first.
    fn terms(&self) -> Vec<(i32, i32, i32, Cx<T>)> {
        let g = self.grid;
        let np = g.np();
        let mut out: Vec<_> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| {
                let m = (i / np) as i32 - g.mmax;
                let p = (i % np) as i32 + g.pmin;
                (m, p, 2 * p - m, *v)
            })
            .collect();
        out.sort_by_key(|e| std::cmp::Reverse(e.2));
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.grid);
        let a = self.terms();
        let b = other.terms();
        let floor = self.grid.floor;
        for &(ma, pa, wa, va) in &a {
            for &(mb, pb, wb, vb) in &b {
                if wa + wb < floor {
                    break;
                }
                out.add_at(ma + mb, pa + pb, va * vb);
            }
        }
        out
    }

    fn axpy(&mut self, s: Cx<T>, other: &Self) {
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            *x += s * *y;
        }
    }

    fn scaled(&self, s: Cx<T>) -> Self {
        Graded { grid: self.grid, c: self.c.iter().map(|v| *v * s).collect() }
    }

    /// Multiplication by t^k.
    fn shift(&self, k: i32) -> Self {
        let mut out = Self::zero(self.grid);
        for (m, p, _, v) in self.terms() {
            out.add_at(m, p + k, v);
        }
        out
    }

    /// t d/dt, with t dX/dt = X(−ω−½ + it/2).
    fn d(&self, omega: Cx<T>) -> Self {
        let mut out = Self::zero(self.grid);
        let half = T::from_ratio(1, 2);
        for (m, p, _, v) in self.terms() {
            let mf = T::from_i128(m as i128);
            let lin = Cx::new(T::from_i128(p as i128), T::zero()) - (omega + Cx::new(half, T::zero())) * mf;
            out.add_at(m, p, v * lin);
            if m != 0 {
                out.add_at(m, p + 1, v * Cx::new(T::zero(), mf * half));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Thetas<T: Real> {
    theta0: Cx<T>,
    thetat: Cx<T>,
    theta_star: Cx<T>,
}

/// c_n(ω): the ratio C_{+∞}(ω+n)/C_{+∞}(ω) with the X^n factor stripped.
fn harmonic_weight<T: Real>(n: i32, omega: Cx<T>) -> Cx<T> {
    let c = |w: Cx<T>| w * Cx::new(T::zero(), T::from_ratio(-1, 2));
    let mut r = cx(1.0, 0.0);
    if n > 0 {
        for j in 1..n {
            let f = c(omega + cx(j as f64, 0.0));
            for _ in 0..(n - j) {
                r *= f;
            }
        }
    } else {
        for j in 0..(-n) {
            let f = c(omega - cx(j as f64, 0.0));
            for _ in 0..(-n - j) {
                r *= f;
            }
        }
    }
    r
}

/// σ-PV residual (tḦ)² − R² + ¼PS of H = H₀₀ + t∂_t log T.
fn residual<T: Real>(grid: Grid, th: &Thetas<T>, omega: Cx<T>, tser: &Graded<T>) -> Graded<T> {
    let one = cx::<T>(1.0, 0.0);
    let mut s = tser.clone();
    s.add_at(0, 0, -one);
    // log(1+S); S^j has weight at most −j
    let jmax = (-grid.floor).max(1);
    let mut log = s.clone();
    let mut pw = s.clone();
    for j in 2..=jmax {
        pw = pw.mul(&s);
        let sign = if j % 2 == 0 { -1 } else { 1 };
        log.axpy(Cx::new(T::from_ratio(sign, j as i128), T::zero()), &pw);
    }
    let mut h = log.d(omega);
    let half = T::from_ratio(1, 2);
    let kappa = th.theta0 * th.theta0 + th.thetat * th.thetat + th.theta_star * th.theta_star
        - omega * omega * half
        - cx(0.25, 0.0);
    h.add_at(0, 2, cx(1.0 / 16.0, 0.0));
    h.add_at(0, 1, omega * Cx::new(T::zero(), half));
    h.add_at(0, 0, kappa - th.theta_star * th.theta_star * half);
    let dh = h.d(omega);
    let d2h = dh.d(omega);
    let hd = dh.shift(-1);
    let mut thdd = d2h;
    thdd.axpy(-one, &dh);
    let thdd = thdd.shift(-1);
    let mut r = h;
    r.axpy(-one, &dh);
    r.axpy(cx(2.0, 0.0), &hd.mul(&hd));
    let two_hd = hd.scaled(cx(2.0, 0.0));
    let quad = |shift: Cx<T>, th2: Cx<T>| {
        let mut a = two_hd.clone();
        a.add_at(0, 0, shift);
        let mut b = a.mul(&a);
        b.add_at(0, 0, -th2 * cx(4.0, 0.0));
        b
    };
    let p = quad(-th.theta_star, th.theta0 * th.theta0);
    let q = quad(th.theta_star, th.thetat * th.thetat);
    let mut e = thdd.mul(&thdd);
    e.axpy(-one, &r.mul(&r));
    e.axpy(cx(0.25, 0.0), &p.mul(&q));
    e
}

/// Evaluate a polynomial with ascending coefficients.
pub fn poly_eval<T: Real>(c: &[Cx<T>], x: Cx<T>) -> Cx<T> {
    c.iter().rev().fold(cx(0.0, 0.0), |acc, a| acc * x + *a)
}

struct Stage {
    grid: Grid,
    window: i32,
    /// Which G_k are unknown at this stage.
    blocks: Vec<usize>,
    /// `(harmonic, power)` components that must vanish.
    equations: Vec<(i32, i32)>,
}

fn stage_layout(s: usize) -> Stage {
    let si = s as i32;
    // X¹ component at t^{3−s} has weight 5 − 2s. H = t∂_t log T is
    // differentiated twice more and D can raise a weight by 2, so log T must
    // be complete 8 half-units lower.
    let target = 5 - 2 * si;
    let floor = target - 8;
    let mmax = -floor + 2;
    let mut window = 1;
    while (window + 1) * (window + 1) <= -floor {
        window += 1;
    }
    let grid = Grid { mmax, pmin: (floor - mmax).div_euclid(2) - 1, pmax: (16 + mmax) / 2 + 2, floor };
    let (blocks, equations) = if s == 1 {
        (vec![1], vec![(0, 2), (1, 2)])
    } else {
        (vec![s - 1, s], vec![(0, 4 - si), (1, 4 - si), (0, 3 - si), (1, 3 - si)])
    };
    Stage { grid, window, blocks, equations }
}

struct Sampler<'a, T: Real> {
    th: &'a Thetas<T>,
    stage: &'a Stage,
}

impl<T: Real> Sampler<'_, T> {
    /// Residual components at one ω, given values[k−1][n+window] = G_k(ω+n).
    fn eval(&self, omega: Cx<T>, values: &[Vec<Cx<T>>]) -> Vec<Cx<T>> {
        let st = self.stage;
        let grid = st.grid;
        let mut t = Graded::zero(grid);
        for n in -st.window..=st.window {
            let base = -(n * (n - 1)) / 2;
            let w = harmonic_weight(n, omega);
            t.add_at(n, base, w);
            for (k, vk) in values.iter().enumerate() {
                t.add_at(n, base - k as i32 - 1, w * vk[(n + st.window) as usize]);
            }
        }
        let e = residual(grid, self.th, omega, &t);
        st.equations.iter().map(|&(m, p)| e.get(m, p)).collect()
    }
}

/// Coefficients (ascending in ω) of G_1..G_kmax for the given exponents.
pub fn gk_polynomials<T: Real>(theta0: Cx<T>, thetat: Cx<T>, theta_star: Cx<T>, kmax: usize) -> Result<Vec<Vec<Cx<T>>>> {
    if kmax > MAX_GK {
        return Err(PvError::OrderTooLarge { requested: kmax, max: MAX_GK });
    }
    if kmax == 0 {
        return Ok(Vec::new());
    }
    let th = Thetas { theta0, thetat, theta_star };
    let mut polys: Vec<Vec<Cx<T>>> = Vec::new();
    for s in 1..=kmax + 1 {
        polys.push(vec![cx(0.0, 0.0); 3 * s + 1]);
        solve_stage(&th, s, &mut polys)?;
    }
    polys.truncate(kmax);
    Ok(polys)
}

fn solve_stage<T: Real>(th: &Thetas<T>, s: usize, polys: &mut [Vec<Cx<T>>]) -> Result<()> {
    let stage = stage_layout(s);
    let sampler = Sampler { th, stage: &stage };
    let window = stage.window;
    let unknowns: usize = stage.blocks.iter().map(|&k| polys[k - 1].len()).sum();
    let samples = unknowns / 2 + 4;
    let omegas: Vec<Cx<T>> = (0..samples)
        .map(|j| {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / samples as f64;
            cx(0.1 + SAMPLE_RADIUS * phi.cos(), 0.05 + SAMPLE_RADIUS * phi.sin())
        })
        .collect();
    let values_at = |polys: &[Vec<Cx<T>>], omega: Cx<T>| -> Vec<Vec<Cx<T>>> {
        polys[..s]
            .iter()
            .map(|c| (-window..=window).map(|n| poly_eval(c, omega + cx(n as f64, 0.0))).collect())
            .collect()
    };
    let mut initial_scale: Option<T> = None;
    for _ in 0..8 {
        let mut rows: Vec<Vec<Cx<T>>> = Vec::new();
        let mut rhs: Vec<Cx<T>> = Vec::new();
        let mut worst = T::zero();
        for &omega in &omegas {
            let vals = values_at(polys, omega);
            let base = sampler.eval(omega, &vals);
            for r in &base {
                let a = r.norm_sqr().sqrt();
                if a > worst {
                    worst = a;
                }
            }
            let mut block_rows = vec![Vec::with_capacity(unknowns); base.len()];
            for &k in &stage.blocks {
                let degree = polys[k - 1].len();
                let mut dcol = vec![vec![cx(0.0, 0.0); degree]; base.len()];
                for n in -window..=window {
                    if -(n * n) - 2 * (k as i32) < stage.grid.floor {
                        continue;
                    }
                    let idx = (n + window) as usize;
                    let mut up = vals.clone();
                    let mut dn = vals.clone();
                    up[k - 1][idx] += cx(1.0, 0.0);
                    dn[k - 1][idx] -= cx(1.0, 0.0);
                    let ru = sampler.eval(omega, &up);
                    let rd = sampler.eval(omega, &dn);
                    let x = omega + cx(n as f64, 0.0);
                    for (e, row) in dcol.iter_mut().enumerate() {
                        let deriv = (ru[e] - rd[e]) * cx(0.5, 0.0);
                        let mut pw = cx(1.0, 0.0);
                        for slot in row.iter_mut() {
                            *slot += deriv * pw;
                            pw *= x;
                        }
                    }
                }
                for (row, d) in block_rows.iter_mut().zip(dcol) {
                    row.extend(d);
                }
            }
            rows.extend(block_rows);
            rhs.extend(base.into_iter().map(|r| -r));
        }
        let scale = *initial_scale.get_or_insert(if worst > T::one() { worst } else { T::one() });
        let tol = T::from_f64(T::epsilon().sqrt() * 1e-2);
        if worst <= tol * scale {
            return Ok(());
        }
        let step = lstsq(&rows, &rhs).ok_or(PvError::NonSolvableOrder { order: s })?;
        let mut it = step.into_iter();
        for &k in &stage.blocks {
            for c in polys[k - 1].iter_mut() {
                *c += it.next().unwrap_or_else(|| cx(0.0, 0.0));
            }
        }
    }
    Err(PvError::NonSolvableOrder { order: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{to_c64, DoubleDouble};
    use num_complex::Complex64;

    fn c(x: f64) -> Cx<f64> {
        cx(x, 0.0)
    }

    #[test]
    fn first_coefficient_shape() {
        let g = gk_polynomials(c(0.21), c(0.33), c(0.17), 2).unwrap();
        assert_eq!(g[0].len(), 4);
        assert!((g[0][3] - Complex64::new(0.0, -0.5)).norm() < 1e-9);
        // leading term of G2 is half the square of the leading term of G1
        assert!((g[1][6] - c(-0.125)).norm() < 1e-9);
        assert!(g[0][2].norm() < 1e-9);
    }

    #[test]
    fn special_solution_has_no_corrections() {
        let g = gk_polynomials(c(0.25), c(0.25), c(0.3), 3).unwrap();
        for gk in &g {
            assert!(gk[0].norm() < 1e-9, "{:?}", gk[0]);
        }
    }

    #[test]
    fn double_double_agrees() {
        type D = DoubleDouble;
        let z = |x: f64, y: f64| Cx::new(D::from_f64(x), D::from_f64(y));
        let gd = gk_polynomials(z(0.2, 0.05), z(0.31, 0.0), z(0.47, -0.1), 4).unwrap();
        let gf = gk_polynomials(cx(0.2, 0.05), cx(0.31, 0.0), cx(0.47, -0.1), 4).unwrap();
        for (a, b) in gd.iter().zip(&gf) {
            for w in [0.0, 0.3, -0.7] {
                let va = to_c64(poly_eval(a, z(w, 0.1)));
                let vb = poly_eval(b, cx(w, 0.1));
                assert!((va - vb).norm() <= 1e-9 * va.norm().max(1.0), "{va} {vb}");
            }
        }
    }
}
