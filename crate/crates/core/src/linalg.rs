//! Small dense linear algebra over canonical fractions, exact rationals and floats.

use num_traits::Zero;

use crate::error::Result;
use crate::expr::zero::frac_is_zero;
use crate::expr::{Frac, Rational, Verdict, ZeroTest};

/// A pivot candidate must not be identically zero; opaque entries count as nonzero.
pub(crate) fn usable_pivot(f: &Frac) -> bool {
    !f.is_zero() && !matches!(frac_is_zero(f, &ZeroTest::default()), Verdict::Zero { .. })
}

/// Solves `A X = B` for square `A`; `None` when `A` is singular.
pub(crate) fn solve(a: &[Vec<Frac>], b: &[Vec<Frac>]) -> Result<Option<Vec<Vec<Frac>>>> {
    let n = a.len();
    let mut m: Vec<Vec<Frac>> = a.iter().zip(b).map(|(r, s)| r.iter().chain(s).cloned().collect()).collect();
    let width = m.first().map_or(0, Vec::len);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| usable_pivot(&m[r][col])) else { return Ok(None) };
        m.swap(col, piv);
        let inv = m[col][col].inv()?;
        for c in col..width {
            m[col][c] = m[col][c].mul(&inv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..width {
                let t = m[col][c].mul(&factor);
                m[r][c] = m[r][c].sub(&t);
            }
        }
    }
    Ok(Some(m.into_iter().map(|r| r[n..].to_vec()).collect()))
}

/// Determinant by elimination.
pub(crate) fn det(a: &[Vec<Frac>]) -> Result<Frac> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut acc = Frac::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| usable_pivot(&m[r][col])) else { return Ok(Frac::zero()) };
        if piv != col {
            m.swap(col, piv);
            acc = acc.neg();
        }
        acc = acc.mul(&m[col][col]);
        let inv = m[col][col].inv()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].mul(&inv);
            for c in col..n {
                let t = m[col][c].mul(&factor);
                m[r][c] = m[r][c].sub(&t);
            }
        }
    }
    Ok(acc)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Numerical rank with a tolerance relative to the largest entry.
pub fn rank_f64(m: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut m = m.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (piv, best) = (rank..rows).map(|r| (r, m[r][col].abs())).fold((rank, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if best <= tol {
            continue;
        }
        m.swap(rank, piv);
        for r in rank + 1..rows {
            let f = m[r][col] / m[rank][col];
            for c in col..cols {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced row echelon form in place over the rationals; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Coordinates of `v` in the span of `basis` (rows), if it lies there.
pub fn express_in(basis: &[Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    let k = basis.len();
    let dim = v.len();
    // Columns are basis vectors; augmented with v.
    let mut m: Vec<Vec<Rational>> = (0..dim)
        .map(|i| basis.iter().map(|b| b[i].clone()).chain(std::iter::once(v[i].clone())).collect())
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&k) {
        return None;
    }
    let mut out = vec![Rational::zero(); k];
    for (row, &c) in pivots.iter().enumerate() {
        out[c] = m[row][k].clone();
    }
    Some(out)
}

/// Whether `v` is independent of `basis` over the rationals.
pub fn independent_of(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    v.iter().any(|x| !x.is_zero()) && express_in(basis, v).is_none()
}

pub(crate) fn identity(n: usize) -> Vec<Vec<Frac>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Frac::one() } else { Frac::zero() }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat, Workspace};

    fn f(ws: &Workspace, s: &str) -> Frac {
        Frac::from_expr(&parse(s, ws).unwrap()).unwrap()
    }

    #[test]
    fn symbolic_inverse_and_determinant() {
        let ws = Workspace::new(&["t", "x"], &["u"], 1).unwrap();
        let a = vec![vec![f(&ws, "exp(-t)"), f(&ws, "exp(-x)")], vec![f(&ws, "exp(-t)"), f(&ws, "0")]];
        let d = det(&a).unwrap();
        assert_eq!(d.to_expr(), parse("-exp(-t - x)", &ws).unwrap());
        let inv = solve(&a, &identity(2)).unwrap().unwrap();
        assert_eq!(inv[0][1].to_expr(), parse("exp(t)", &ws).unwrap());
        assert_eq!(inv[1][0].to_expr(), parse("exp(x)", &ws).unwrap());
        let singular = vec![vec![f(&ws, "x"), f(&ws, "t")], vec![f(&ws, "2*x"), f(&ws, "2*t")]];
        assert!(solve(&singular, &identity(2)).unwrap().is_none());
        assert!(det(&singular).unwrap().is_zero());
    }

    #[test]
    fn rational_rref_and_membership() {
        let basis = vec![vec![rat(1, 1), rat(0, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1), rat(1, 1)]];
        assert_eq!(express_in(&basis, &[rat(2, 1), rat(3, 1), rat(5, 1)]), Some(vec![rat(2, 1), rat(3, 1)]));
        assert!(independent_of(&basis, &[rat(0, 1), rat(0, 1), rat(1, 1)]));
        assert!(!independent_of(&basis, &[rat(0, 1), rat(0, 1), rat(0, 1)]));
    }

    #[test]
    fn float_rank_and_subsets() {
        assert_eq!(rank_f64(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-9), 1);
        assert_eq!(rank_f64(&[vec![1.0, 2.0], vec![2.0, 4.1]], 1e-9), 2);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }
}
