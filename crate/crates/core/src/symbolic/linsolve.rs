//! Gaussian elimination over expressions.

use std::collections::BTreeMap;

use super::canon::canonicalize;
use super::equal::probe_equal;
use super::expr::Expr;

/// Solves `matrix · z = rhs`. A pivot is accepted only if it is nonzero in
/// canonical form and does not probe equal to zero, so identically
/// vanishing entries such as `sin(x)^2 + cos(x)^2 - 1` are never used.
/// Returns `None` when the system is singular.
pub fn solve_linear(matrix: &[Vec<Expr>], rhs: &[Expr]) -> Option<Vec<Expr>> {
    let dim = rhs.len();
    assert!(matrix.len() == dim && matrix.iter().all(|r| r.len() == dim));
    let mut m: Vec<Vec<Expr>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| row.iter().chain(std::iter::once(b)).map(canonicalize).collect())
        .collect();

    for col in 0..dim {
        let pivot = (col..dim).find(|&r| is_nonzero(&m[r][col]))?;
        m.swap(col, pivot);
        let inv = canonicalize(&m[col][col].clone().recip());
        for entry in m[col].iter_mut().skip(col) {
            *entry = canonicalize(&(entry.clone() * inv.clone()));
        }
        for r in 0..dim {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=dim {
                let updated = m[r][c].clone() - factor.clone() * m[col][c].clone();
                m[r][c] = canonicalize(&updated);
            }
        }
    }
    Some(m.into_iter().map(|row| row[dim].clone()).collect())
}

fn is_nonzero(e: &Expr) -> bool {
    !e.is_zero() && !probe_equal(e, &Expr::zero())
}

/// Numeric determinant by partial-pivot LU; used for regularity diagnostics.
pub fn det_numeric(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Simultaneous substitution of symbols.
pub fn substitute(e: &Expr, map: &BTreeMap<super::expr::Symbol, Expr>) -> Expr {
    canonicalize(&e.map_symbols(&|s| map.get(s).cloned()))
}
