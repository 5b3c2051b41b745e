//! Small dense complex linear algebra over any [`Real`].

use crate::scalar::{Cx, Real};

/// Least-squares solution of `a x ≈ b` (`a` row-major, `rows ≥ cols`).
///
/// Columns are normalised first, then orthogonalised twice by modified
/// Gram–Schmidt. Returns `None` when a column is numerically dependent on the
/// previous ones.
#[allow(clippy::needless_range_loop)]
pub(crate) fn lstsq<T: Real>(a: &[Vec<Cx<T>>], b: &[Cx<T>]) -> Option<Vec<Cx<T>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows < cols {
        return None;
    }
    let zero = Cx::new(T::zero(), T::zero());
    let mut q: Vec<Vec<Cx<T>>> = (0..cols).map(|j| (0..rows).map(|i| a[i][j]).collect()).collect();
    let mut scale = vec![T::one(); cols];
    for (j, col) in q.iter_mut().enumerate() {
        let n = norm(col);
        if n.is_zero() {
            return None;
        }
        scale[j] = n;
        for z in col.iter_mut() {
            *z /= n;
        }
    }
    let mut r = vec![vec![zero; cols]; cols];
    let tol = T::from_f64(T::epsilon() * 1e3 * (cols as f64).max(1.0));
    for j in 0..cols {
        let (done, rest) = q.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for (i, qi) in done.iter().enumerate() {
                let h = dot(qi, v);
                r[i][j] += h;
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= h * *y;
                }
            }
        }
        let n = norm(v);
        if n < tol {
            return None;
        }
        r[j][j] = Cx::new(n, T::zero());
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    let mut y: Vec<Cx<T>> = q.iter().map(|qi| dot(qi, b)).collect();
    for j in (0..cols).rev() {
        for k in j + 1..cols {
            let sub = r[j][k] * y[k];
            y[j] -= sub;
        }
        y[j] /= r[j][j];
    }
    Some(y.into_iter().zip(scale).map(|(x, s)| x / s).collect())
}

fn dot<T: Real>(u: &[Cx<T>], v: &[Cx<T>]) -> Cx<T> {
    u.iter().zip(v).fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b)
}

fn norm<T: Real>(v: &[Cx<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;
    use num_traits::{One, Zero};

    #[test]
    fn recovers_exact_solution() {
        let a: Vec<Vec<Cx<f64>>> = (0..6)
            .map(|i| (0..3).map(|j| Cx::new(((i + 1) as f64).powi(j), (i * j) as f64 * 0.1)).collect())
            .collect();
        let x = [Cx::new(1.0, -2.0), Cx::new(0.5, 0.0), Cx::new(-0.25, 3.0)];
        let b: Vec<_> = a.iter().map(|row| row.iter().zip(&x).map(|(u, v)| u * v).sum()).collect();
        let got = lstsq(&a, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let a = vec![vec![Cx::new(1.0, 0.0), Cx::new(2.0, 0.0)]; 3];
        assert!(lstsq(&a, &[Cx::new(1.0, 0.0); 3]).is_none());
    }

    #[test]
    fn works_in_double_double() {
        type D = DoubleDouble;
        let c = |x: f64| Cx::new(D::from_f64(x), D::zero());
        let a = vec![vec![c(1.0), c(1.0)], vec![c(1.0), c(2.0)], vec![c(1.0), c(3.0)]];
        let b = vec![c(1.0), c(3.0), c(5.0)];
        let x = lstsq(&a, &b).unwrap();
        assert!((x[0].re + D::one()).abs().to_f64() < 1e-28);
        assert!((x[1].re - D::from_f64(2.0)).abs().to_f64() < 1e-28);
    }
}
