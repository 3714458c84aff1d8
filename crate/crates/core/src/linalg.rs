use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest diagonal jitter tried before giving up on a factorization.
pub(crate) const MAX_JITTER: f64 = 1e-4;
const FIRST_ESCALATED_JITTER: f64 = 1e-12;

/// Solves `(A + εI) x = b` for symmetric positive (semi)definite `A` by
/// Cholesky, starting at `ε = jitter` and multiplying by 10 on failure.
pub(crate) fn solve_spd(matrix: &DMatrix<f64>, rhs: &DVector<f64>, jitter: f64) -> Result<DVector<f64>> {
    let mut eps = jitter.max(0.0);
    loop {
        let mut m = matrix.clone();
        if eps > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += eps;
            }
        }
        if let Some(chol) = m.cholesky() {
            let x = chol.solve(rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
        eps = if eps == 0.0 { FIRST_ESCALATED_JITTER } else { eps * 10.0 };
        if eps > MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::SingularSystem);
        }
    }
}

/// In-place Cholesky solve of a small dense row-major system, with the same
/// jitter escalation as [`solve_spd`]. Returns `None` when the matrix is not
/// positive definite even at the largest jitter.
pub(crate) fn solve_small_spd(matrix: &[f64], dim: usize, rhs: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut eps = jitter.max(0.0);
    // uncoupled rows: plain division keeps the single-row result bit-exact
    let diagonal = (0..dim * dim).all(|i| i / dim == i % dim || matrix[i] == 0.0);
    if diagonal && (0..dim).all(|i| matrix[i * dim + i] + eps > 0.0) {
        let x: Vec<f64> = (0..dim).map(|i| rhs[i] / (matrix[i * dim + i] + eps)).collect();
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let mut l = vec![0.0; dim * dim];
    loop {
        if cholesky_into(matrix, dim, eps, &mut l) {
            let mut y = rhs.to_vec();
            for i in 0..dim {
                let mut v = y[i];
                for k in 0..i {
                    v -= l[i * dim + k] * y[k];
                }
                y[i] = v / l[i * dim + i];
            }
            for i in (0..dim).rev() {
                let mut v = y[i];
                for k in i + 1..dim {
                    v -= l[k * dim + i] * y[k];
                }
                y[i] = v / l[i * dim + i];
            }
            if y.iter().all(|v| v.is_finite()) {
                return Some(y);
            }
        }
        eps = if eps == 0.0 { FIRST_ESCALATED_JITTER } else { eps * 10.0 };
        if eps > MAX_JITTER * (1.0 + 1e-9) {
            return None;
        }
    }
}

fn cholesky_into(a: &[f64], dim: usize, eps: f64, l: &mut [f64]) -> bool {
    for i in 0..dim {
        for j in 0..=i {
            let mut v = a[i * dim + j];
            if i == j {
                v += eps;
            }
            for k in 0..j {
                v -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(v > 0.0) {
                    return false;
                }
                l[i * dim + i] = v.sqrt();
            } else {
                l[i * dim + j] = v / l[j * dim + j];
            }
        }
    }
    true
}

/// General square solve by LU with partial pivoting.
pub(crate) fn solve_general(matrix: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let x = matrix.lu().solve(rhs).ok_or(Error::SingularSystem)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularSystem)
    }
}
