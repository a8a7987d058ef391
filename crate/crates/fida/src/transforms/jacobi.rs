//! One-sided Jacobi SVD for small dense matrices.
//!
//! Rotations are applied on the right until the columns of the working
//! matrix are mutually orthogonal; column norms are then the singular values
//! and the accumulated rotations form the right factor. Left singular
//! vectors for zero singular values (and for the extra rows when `m > n`)
//! are completed by Gram-Schmidt against the canonical basis so the left
//! factor is always a full orthogonal matrix.

use crate::error::{FidaError, Result};

const MAX_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-15;

/// Full SVD `A = U * diag(s) * V^T` with `U` (`m x m`) and `V` (`n x n`)
/// orthogonal and `s` (length `min(m, n)`) nonnegative, descending.
/// All matrices row-major.
pub struct Svd {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn svd(a: &[f64], m: usize, n: usize) -> Result<Svd> {
    if a.len() != m * n {
        return Err(FidaError::shape(m * n, a.len(), "svd input"));
    }
    if m == 0 || n == 0 {
        return Err(FidaError::arg("svd of empty matrix"));
    }
    if m >= n {
        svd_tall(a, m, n)
    } else {
        // SVD of the transpose, factors swapped back.
        let mut at = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                at[j * m + i] = a[i * n + j];
            }
        }
        let Svd { u, s, v } = svd_tall(&at, n, m)?;
        Ok(Svd { u: v, s, v: u })
    }
}

fn svd_tall(a: &[f64], m: usize, n: usize) -> Result<Svd> {
    // Column-major working copy: b[j] is the j-th column.
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| a[i * n + j]).collect())
        .collect();
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = b[p].iter().map(|x| x * x).sum();
                let beta: f64 = b[q].iter().map(|x| x * x).sum();
                let gamma: f64 = b[p].iter().zip(&b[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= tol * tol || gamma.abs() <= 1e-30 {
                    continue;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = b.split_at_mut(q);
                for (bp, bq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (vp, vq) = (*bp, *bq);
                    *bp = c * vp - s * vq;
                    *bq = s * vp + c * vq;
                }
                for i in 0..n {
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = c * vp - s * vq;
                    v[i * n + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Singular values and normalized left columns.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = b
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut s = Vec::with_capacity(n);
    let mut u = vec![0.0; m * m];
    let mut v_sorted = vec![0.0; n * n];
    let zero_cut = 1e-14
        * norms
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
    let mut filled = 0;
    for (rank, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for i in 0..n {
            v_sorted[i * n + rank] = v[i * n + j];
        }
        if norms[j] > zero_cut {
            for i in 0..m {
                u[i * m + rank] = b[j][i] / norms[j];
            }
            filled = rank + 1;
        }
    }

    complete_orthonormal(&mut u, m, filled);
    Ok(Svd { u, s, v: v_sorted })
}

/// Extend the first `filled` orthonormal columns of a row-major `m x m`
/// matrix to a full orthonormal basis via Gram-Schmidt over canonical
/// vectors.
fn complete_orthonormal(u: &mut [f64], m: usize, filled: usize) {
    let mut next = filled;
    let mut cand = 0;
    while next < m && cand < m {
        // Start from e_cand, orthogonalize against existing columns.
        let mut col = vec![0.0; m];
        col[cand] = 1.0;
        for _ in 0..2 {
            for j in 0..next {
                let dot: f64 = (0..m).map(|i| col[i] * u[i * m + j]).sum();
                for i in 0..m {
                    col[i] -= dot * u[i * m + j];
                }
            }
        }
        let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for i in 0..m {
                u[i * m + next] = col[i] / norm;
            }
            next += 1;
        }
        cand += 1;
    }
    debug_assert_eq!(next, m);
}
