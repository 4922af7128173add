//! Dense linear algebra over a generic scalar.
//!
//! These routines back the small systems that appear all over the pipeline:
//! Bernstein/collocation solves, the gluing-fit KKT system, and the
//! brute-force null-space computations. Everything is plain Gaussian
//! elimination with partial pivoting; in rational mode the results are exact.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LinAlgError {
    #[error("singular matrix (rank deficiency at column {0})")]
    Singular(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Solve `A x = b` for a single right-hand side.
pub fn solve_dense<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>, LinAlgError> {
    let sols = solve_dense_multi(a, &b.iter().map(|v| vec![v.clone()]).collect::<Vec<_>>())?;
    Ok(sols.into_iter().map(|mut row| row.remove(0)).collect())
}

/// Solve `A X = B` where `B` holds one right-hand side per column.
pub fn solve_dense_multi<T: Scalar>(
    a: &[Vec<T>],
    b: &[Vec<T>],
) -> Result<Vec<Vec<T>>, LinAlgError> {
    let n = a.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "expected square {n}x{n} system with {n} rhs rows"
        )));
    }
    let m = b[0].len();
    let mut mat: Vec<Vec<T>> = a.to_vec();
    let mut rhs: Vec<Vec<T>> = b.to_vec();

    for col in 0..n {
        // Partial pivoting: largest magnitude entry in the column.
        let pivot_row = (col..n)
            .filter(|&r| !mat[r][col].near_zero())
            .max_by(|&r1, &r2| {
                mat[r1][col]
                    .abs()
                    .partial_cmp(&mat[r2][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or(LinAlgError::Singular(col))?;
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);

        let pivot = mat[col][col].clone();
        for r in (col + 1)..n {
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = factor.clone() * mat[col][c].clone();
                mat[r][c] = mat[r][c].clone() - delta;
            }
            for c in 0..m {
                let delta = factor.clone() * rhs[col][c].clone();
                rhs[r][c] = rhs[r][c].clone() - delta;
            }
        }
    }

    // Back substitution.
    let mut x = vec![vec![T::zero(); m]; n];
    for row in (0..n).rev() {
        for c in 0..m {
            let mut acc = rhs[row][c].clone();
            for col in (row + 1)..n {
                acc = acc - mat[row][col].clone() * x[col][c].clone();
            }
            x[row][c] = acc / mat[row][row].clone();
        }
    }
    Ok(x)
}

/// Row echelon reduction; returns (rref matrix, pivot columns).
pub fn rref<T: Scalar>(rows: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<usize>) {
    let mut mat: Vec<Vec<T>> = rows.to_vec();
    let nrows = mat.len();
    let ncols = mat.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let pivot_row = (row..nrows)
            .filter(|&r| !mat[r][col].near_zero())
            .max_by(|&r1, &r2| {
                mat[r1][col]
                    .abs()
                    .partial_cmp(&mat[r2][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(pr) = pivot_row else { continue };
        mat.swap(row, pr);
        let pivot = mat[row][col].clone();
        for c in col..ncols {
            mat[row][c] = mat[row][c].clone() / pivot.clone();
        }
        for r in 0..nrows {
            if r != row && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in col..ncols {
                    let delta = factor.clone() * mat[row][c].clone();
                    mat[r][c] = mat[r][c].clone() - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (mat, pivots)
}

/// Rank of a dense matrix.
pub fn rank_dense<T: Scalar>(rows: &[Vec<T>]) -> usize {
    rref(rows).1.len()
}

/// Basis of the null space of `A` (one vector per free column).
pub fn null_space_dense<T: Scalar>(rows: &[Vec<T>]) -> Vec<Vec<T>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if ncols == 0 {
        return vec![];
    }
    if rows.is_empty() {
        return (0..ncols)
            .map(|i| {
                let mut v = vec![T::zero(); ncols];
                v[i] = T::one();
                v
            })
            .collect();
    }
    let (mat, pivots) = rref(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![T::zero(); ncols];
            v[fc] = T::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -mat[prow][fc].clone();
            }
            v
        })
        .collect()
}
