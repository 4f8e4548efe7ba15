use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold for float backends.
const FLOAT_PIVOT_TOL: f64 = 1e-12;

/// Solves `A x = rhs` by Gaussian elimination with back substitution.
///
/// Exact backends take the first nonzero pivot in each column. Float
/// backends use scaled partial pivoting: each candidate is measured against
/// the largest entry of its original row, and a best ratio below `1e-12`
/// counts as singular. Rows of very different magnitude (Hermite values of
/// growing degree) are common here, so an unscaled test would misreport.
pub fn linear_solve<T: Scalar>(matrix: &[Vec<T>], rhs: &[T]) -> Result<Vec<T>> {
    let n = matrix.len();
    if rhs.len() != n || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension(format!(
            "expected a square {n}x{n} system with {n} right-hand sides"
        )));
    }
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut b: Vec<T> = rhs.to_vec();
    let mut scale: Vec<f64> = a
        .iter()
        .map(|row| row.iter().map(Scalar::magnitude).fold(0.0f64, f64::max))
        .collect();

    for col in 0..n {
        let pivot_row = if T::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            let ratio = |r: usize| {
                if scale[r] > 0.0 {
                    a[r][col].magnitude() / scale[r]
                } else {
                    0.0
                }
            };
            (col..n)
                .max_by(|&r, &s| ratio(r).total_cmp(&ratio(s)))
                .filter(|&r| ratio(r) > FLOAT_PIVOT_TOL)
        };
        let pivot_row = pivot_row.ok_or(Error::SingularMatrix { column: col })?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        scale.swap(col, pivot_row);

        let pivot = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }

    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for c in row + 1..n {
            acc = acc - a[row][c].clone() * x[c].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

pub fn mat_vec<T: Scalar>(matrix: &[Vec<T>], x: &[T]) -> Vec<T> {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (a, v)| acc + a.clone() * v.clone())
        })
        .collect()
}
