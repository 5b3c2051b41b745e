//! Young diagrams, arm/leg lengths and the Nekrasov function Z_{λ,μ}(θ).

use std::fmt;

use num_complex::Complex64;

use crate::error::{PvError, Result};
use crate::ring::Coefficient;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

/// A box `(row, col)`, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub fn new(row: u32, col: u32) -> Self {
        Cell { row, col }
    }
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(PvError::Config("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(PvError::Config("partition parts must be weakly decreasing".into()));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// λ_row, zero beyond the last row.
    pub fn row_len(&self, row: u32) -> u32 {
        self.parts.get(row as usize - 1).copied().unwrap_or(0)
    }

    /// λ'_col, zero beyond the first row.
    pub fn col_len(&self, col: u32) -> u32 {
        self.parts.iter().take_while(|&&p| p >= col).count() as u32
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0);
        Partition { parts: (1..=first).map(|c| self.col_len(c)).collect() }
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(r, &len)| (1..=len).map(move |c| Cell::new(r as u32 + 1, c)))
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "()");
        }
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

pub fn arm(lambda: &Partition, b: Cell) -> i64 {
    lambda.row_len(b.row) as i64 - b.col as i64
}

pub fn leg(lambda: &Partition, b: Cell) -> i64 {
    lambda.col_len(b.col) as i64 - b.row as i64
}

/// All partitions of `n`, largest first part first (reverse lexicographic).
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            rec(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Ordered pairs `(λ, μ)` with `|λ|+|μ| = total`: `|λ|` descending, then each
/// diagram in reverse lexicographic order.
pub fn enumerate_pairs(total: u32) -> Vec<(Partition, Partition)> {
    let mut out = Vec::new();
    for a in (0..=total).rev() {
        let mus = partitions_of(total - a);
        for l in partitions_of(a) {
            for m in &mus {
                out.push((l.clone(), m.clone()));
            }
        }
    }
    out
}

/// One linear factor `offset + sign·θ` of Z, together with a size scale for
/// pole detection.
#[derive(Clone, Debug)]
pub struct NekrasovFactor<F> {
    pub value: F,
    pub scale: f64,
}

/// The linear factors of Z_{λ,μ}(θ) with deformation parameter `beta`:
/// over □∈λ, β⁻¹(a_λ+½) + β(l_μ+½) + θ; over □∈μ, β⁻¹(a_μ+½) + β(l_λ+½) − θ.
pub fn nekrasov_factors<F: Coefficient>(
    lambda: &Partition,
    mu: &Partition,
    theta: &F,
    beta: &F,
    beta_inv: &F,
) -> Vec<NekrasovFactor<F>> {
    let theta_mag = theta.magnitude();
    let half = F::from_ratio(1, 2);
    let mut out = Vec::with_capacity((lambda.size() + mu.size()) as usize);
    let mut push = |a: i64, l: i64, sign: bool| {
        let u = beta_inv.clone() * (F::from_int(a) + half.clone()) + beta.clone() * (F::from_int(l) + half.clone());
        let scale = u.magnitude() + theta_mag;
        let value = if sign { u + theta.clone() } else { u - theta.clone() };
        out.push(NekrasovFactor { value, scale });
    };
    for b in lambda.cells() {
        push(arm(lambda, b), leg(mu, b), true);
    }
    for b in mu.cells() {
        push(arm(mu, b), leg(lambda, b), false);
    }
    out
}

/// Z_{λ,μ}(θ) over a generic coefficient ring.
///
/// The λ-box and μ-box products are formed separately and multiplied last, so
/// that Z_{λ,μ}(θ) and Z_{μ,λ}(−θ) agree bit for bit in floating point.
pub fn nekrasov_z_in<F: Coefficient>(lambda: &Partition, mu: &Partition, theta: &F, beta: &F, beta_inv: &F) -> F {
    let factors = nekrasov_factors(lambda, mu, theta, beta, beta_inv);
    let (first, second) = factors.split_at(lambda.size() as usize);
    let prod = |fs: &[NekrasovFactor<F>]| fs.iter().fold(F::one(), |acc, f| acc * f.value.clone());
    prod(first) * prod(second)
}

/// Z_{λ,μ}(θ) for complex θ and β.
pub fn nekrasov_z(lambda: &Partition, mu: &Partition, theta: Complex64, beta: Complex64) -> Result<Complex64> {
    let beta_inv = beta.try_inv()?;
    Ok(nekrasov_z_in(lambda, mu, &theta, &beta, &beta_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn count_partitions(n: u32) -> usize {
        partitions_of(n).len()
    }

    #[test]
    fn arm_leg_examples() {
        assert_eq!((arm(&p(&[3, 1]), Cell::new(1, 1)), leg(&p(&[3, 1]), Cell::new(1, 1))), (2, 1));
        assert_eq!((arm(&Partition::empty(), Cell::new(1, 1)), leg(&Partition::empty(), Cell::new(1, 1))), (-1, -1));
        assert_eq!((arm(&p(&[2]), Cell::new(2, 1)), leg(&p(&[2]), Cell::new(2, 1))), (-1, -1));
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(enumerate_pairs(0), vec![(Partition::empty(), Partition::empty())]);
        assert_eq!(enumerate_pairs(1), vec![(p(&[1]), Partition::empty()), (Partition::empty(), p(&[1]))]);
        assert_eq!(enumerate_pairs(4).len(), 20);
        for n in 0..=12u32 {
            let want: usize = (0..=n).map(|a| count_partitions(a) * count_partitions(n - a)).sum();
            assert_eq!(enumerate_pairs(n).len(), want);
        }
        assert_eq!(partitions_of(3), vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn z_examples() {
        let th = Complex64::new(0.3, -0.2);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(nekrasov_z(&Partition::empty(), &Partition::empty(), th, one).unwrap(), one);
        assert!((nekrasov_z(&p(&[1]), &Partition::empty(), th, one).unwrap() - th).norm() < 1e-15);
    }

    #[test]
    fn conjugation_duality() {
        for n in 0..=8 {
            for l in partitions_of(n) {
                let lc = l.conjugate();
                for r in 1..=8 {
                    for c in 1..=8 {
                        assert_eq!(arm(&l, Cell::new(r, c)), leg(&lc, Cell::new(c, r)));
                    }
                }
            }
        }
    }

    #[test]
    fn z_symmetry_all_small_pairs() {
        let th = Complex64::new(0.37, 0.11);
        let beta = Complex64::new(1.3, 0.2);
        for n in 0..=6 {
            for (l, m) in enumerate_pairs(n) {
                let a = nekrasov_z(&l, &m, th, beta).unwrap();
                let b = nekrasov_z(&m, &l, -th, beta).unwrap();
                assert_eq!(a, b, "{l} {m}");
            }
        }
    }

    fn partition_strategy() -> impl Strategy<Value = Partition> {
        (0u32..=5).prop_flat_map(|n| {
            let all = partitions_of(n);
            (0..all.len()).prop_map(move |i| all[i].clone())
        })
    }

    proptest! {
        #[test]
        fn z_symmetry_random(l in partition_strategy(), m in partition_strategy(),
                             re in -2.0f64..2.0, im in -2.0f64..2.0, b in 0.3f64..2.0) {
            let th = Complex64::new(re, im);
            let beta = Complex64::new(b, 0.1);
            let a = nekrasov_z(&l, &m, th, beta).unwrap();
            let c = nekrasov_z(&m, &l, -th, beta).unwrap();
            prop_assert!((a - c).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn conjugate_is_involution(l in partition_strategy()) {
            prop_assert_eq!(l.conjugate().conjugate(), l.clone());
            prop_assert_eq!(l.conjugate().size(), l.size());
        }
    }
}
