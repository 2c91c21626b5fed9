//! Small exact linear-algebra kernels over integers and rationals.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::Rational;

/// Determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n, "square system expected");
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                let delta = &factor * &a[col][j];
                a[r][j] -= delta;
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    Some(b)
}

/// A nonzero vector in the right kernel of `a` (`rows x cols`), if the kernel is nontrivial.
pub fn kernel_vector(a: &[Vec<Rational>], cols: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let rows = m.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (row, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -m[row][free].clone();
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn rat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn determinants() {
        assert_eq!(bareiss_determinant(big(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(bareiss_determinant(big(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(bareiss_determinant(big(&[&[1, 2], &[2, 4]])), BigInt::from(0));
        assert_eq!(
            bareiss_determinant(big(&[&[3, -1, -1], &[-1, 3, -1], &[-1, -1, 3]])),
            BigInt::from(16)
        );
    }

    #[test]
    fn solves_and_detects_singularity() {
        let x = solve(rat(&[&[2, 1], &[1, 3]]), vec![int(3), int(5)]).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
        assert!(solve(rat(&[&[1, 2], &[2, 4]]), vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn kernel_vectors() {
        let a = rat(&[&[1, 1, 0], &[0, 1, 1]]);
        let v = kernel_vector(&a, 3).unwrap();
        for row in &a {
            let dot: Rational = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            assert!(dot.is_zero());
        }
        assert!(v.iter().any(|x| !x.is_zero()));
        assert!(kernel_vector(&rat(&[&[1, 0], &[0, 1]]), 2).is_none());
    }
}
