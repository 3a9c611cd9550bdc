//! Tolerance-truncated singular value decomposition.
//!
//! The factorization is a Householder QR (from nalgebra) of the matrix or its
//! transpose, followed by one-sided Jacobi rotations on the square triangular
//! factor.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

const MAX_SWEEPS: usize = 60;

/// Leading singular triplets of a matrix.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    /// `rows x rank`, row-major.
    pub u: DenseTensor,
    /// Kept singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `rank x cols`, row-major.
    pub vt: DenseTensor,
    pub rank: usize,
    /// Frobenius norm of the discarded part, `sqrt(sum_{i>rank} s_i^2)`.
    pub tail_norm: f64,
}

/// Smallest rank `r >= 1` whose discarded tail energy `sum_{i>r} s_i^2` is
/// at most `sigma^2`. `singular_values` must be nonincreasing.
pub fn truncation_rank(singular_values: &[f64], sigma: f64) -> usize {
    let budget = sigma * sigma;
    let mut tail = 0.0;
    let mut rank = singular_values.len();
    // walk from the smallest value while the accumulated tail fits the budget
    for (i, s) in singular_values.iter().enumerate().rev() {
        tail += s * s;
        if tail > budget {
            break;
        }
        rank = i;
    }
    rank.max(1)
}

/// Dot product with four partial sums, so the loop vectorizes.
fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for l in 0..4 {
            acc[l] += a[l] * b[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Rotates the column-major `k x k` matrix `a` until its columns are
/// mutually orthogonal. Returns the accumulated rotation, column-major.
///
/// Columns with squared norm at most `negligible` are rounding noise and are
/// left alone; rotating them against large columns never converges.
fn jacobi_orthogonalize(a: &mut [f64], k: usize, negligible: f64) -> Result<Vec<f64>> {
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    let col = |a: &[f64], j: usize| dot(&a[j * k..(j + 1) * k], &a[j * k..(j + 1) * k]);
    let tol = f64::EPSILON * k as f64;
    for _ in 0..MAX_SWEEPS {
        // squared column norms, refreshed each sweep and updated per rotation
        let mut norms: Vec<f64> = (0..k).map(|j| col(a, j)).collect();
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let (left, right) = a.split_at_mut(q * k);
                let (cp, cq) = (&mut left[p * k..(p + 1) * k], &mut right[..k]);
                let gamma = dot(cp, cq);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                let (left, right) = v.split_at_mut(q * k);
                rotate(&mut left[p * k..(p + 1) * k], &mut right[..k], c, s);
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
                // the update cancels badly when a column shrinks a lot
                if norms[p] < 0.25 * alpha {
                    norms[p] = col(a, p);
                }
                if norms[q] < 0.25 * beta {
                    norms[q] = col(a, q);
                }
            }
        }
        if !rotated {
            return Ok(v);
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi SVD of order {k} did not converge in {MAX_SWEEPS} sweeps"
    )))
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

/// Thin SVD of a square column-major matrix: `a = u diag(s) v^T` with
/// singular values sorted nonincreasing. Singular values below
/// `k * eps * |a|_F` are set to zero and their `u` columns left zero.
fn square_svd(mut a: Vec<f64>, k: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let floor = k as f64 * f64::EPSILON * dot(&a, &a).sqrt();
    let negligible = floor * floor;
    let v = jacobi_orthogonalize(&mut a, k, negligible)?;
    let norms: Vec<f64> = (0..k)
        .map(|j| {
            let sq = dot(&a[j * k..(j + 1) * k], &a[j * k..(j + 1) * k]);
            if sq <= negligible { 0.0 } else { sq.sqrt() }
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = vec![0.0; k * k];
    let mut v_sorted = vec![0.0; k * k];
    let mut s = vec![0.0; k];
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        v_sorted[dst * k..(dst + 1) * k].copy_from_slice(&v[src * k..(src + 1) * k]);
        if norms[src] > 0.0 {
            for i in 0..k {
                u[dst * k + i] = a[src * k + i] / norms[src];
            }
        }
    }
    Ok((u, s, v_sorted))
}

/// Replaces column `col` of `u` with a unit vector orthogonal to columns
/// `0..col`, trying the canonical basis in order.
fn complete_column(u: &mut DMatrix<f64>, col: usize) {
    for e in 0..u.nrows() {
        let mut cand = DVector::zeros(u.nrows());
        cand[e] = 1.0;
        for prev in 0..col {
            let proj = u.column(prev).dot(&cand);
            cand.axpy(-proj, &u.column(prev), 1.0);
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            u.set_column(col, &(cand / norm));
            return;
        }
    }
}

/// Thin SVD `a = u diag(s) v^T` of a column-major matrix with at least as
/// many rows as columns.
///
/// With the column-pivoted QR `a P = Q R`, Jacobi is applied to `R^T`:
/// `R^T J = U_x S` gives `u = Q J` and `v = P U_x`. Working on `R^T`
/// instead of `R` needs far fewer sweeps.
fn tall_svd(a: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let k = a.ncols();
    let qr = a.col_piv_qr();
    let (q, r, perm) = (qr.q(), qr.r(), qr.p());
    let (u_x, s, j) = square_svd(r.transpose().as_slice().to_vec(), k)?;
    let u = q * DMatrix::from_column_slice(k, k, &j);
    let mut v = DMatrix::from_column_slice(k, k, &u_x);
    perm.inv_permute_rows(&mut v);
    Ok((u, s, v))
}

/// Full thin SVD of a row-major `rows x cols` matrix, as `u` (`rows x k`),
/// singular values, and `v` (`cols x k`), `k = min(rows, cols)`.
fn thin_svd(rows: usize, cols: usize, data: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if rows >= cols {
        tall_svd(DMatrix::from_row_slice(rows, cols, data))
    } else {
        // row-major W read column-major is W^T
        let (v, s, u) = tall_svd(DMatrix::from_column_slice(cols, rows, data))?;
        Ok((u, s, v))
    }
}

/// Full SVD of `w` followed by truncation to the smallest rank whose
/// residual has Frobenius norm at most `sigma` (never below rank 1).
///
/// In every left singular vector the entry of largest magnitude (lowest
/// index on ties) is made nonnegative, flipping the matching right vector.
pub fn truncated_svd(w: &DenseTensor, sigma: f64) -> Result<TruncatedSvd> {
    if w.order() != 2 {
        return Err(Error::InvalidShape(format!(
            "truncated_svd expects a matrix, got shape {}",
            w.shape()
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
    }
    let (rows, cols) = (w.dims()[0], w.dims()[1]);
    if w.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }

    let (mut u, all, mut v) = thin_svd(rows, cols, w.data())?;
    let rank = truncation_rank(&all, sigma);
    let tail_norm = all[rank..].iter().map(|s| s * s).sum::<f64>().sqrt();

    for k in 0..rank {
        if all[k] == 0.0 {
            complete_column(&mut u, k);
        }
        let mut pivot = 0;
        let mut largest = -1.0;
        for i in 0..rows {
            let magnitude = u[(i, k)].abs();
            if magnitude > largest {
                largest = magnitude;
                pivot = i;
            }
        }
        if u[(pivot, k)] < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
    }

    let mut u_data = Vec::with_capacity(rows * rank);
    for i in 0..rows {
        u_data.extend((0..rank).map(|k| u[(i, k)]));
    }
    let mut vt_data = Vec::with_capacity(rank * cols);
    for k in 0..rank {
        vt_data.extend(v.column(k).iter());
    }

    Ok(TruncatedSvd {
        u: DenseTensor::new(Shape::new(vec![rows, rank])?, u_data)?,
        singular_values: all[..rank].to_vec(),
        vt: DenseTensor::new(Shape::new(vec![rank, cols])?, vt_data)?,
        rank,
        tail_norm,
    })
}
