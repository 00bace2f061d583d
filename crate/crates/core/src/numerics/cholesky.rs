use num_complex::Complex64;

use super::matrix::CMatrix;
use super::LinalgError;

/// Lower-triangular `L` with `H = L L*` for a Hermitian positive definite `H`.
///
/// Pivots are compared against `rank_ratio^2` times the largest diagonal entry,
/// which for a Gram matrix `H = A A*` is the squared singular-value ratio of `A`.
/// Rejection reports `sqrt(pivot / max_diag)` as the ratio.
pub fn cholesky(h: &CMatrix, rank_ratio: f64) -> Result<CMatrix, LinalgError> {
    let (n, cols) = h.shape();
    if n != cols {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            actual: cols,
        });
    }
    let max_diag = (0..n).map(|i| h[(i, i)].re).fold(0.0_f64, f64::max);
    let floor = rank_ratio * rank_ratio * max_diag;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) {
            let ratio = if max_diag > 0.0 {
                (d.max(0.0) / max_diag).sqrt()
            } else {
                0.0
            };
            return Err(LinalgError::RankDeficient { ratio });
        }
        let djj = d.sqrt();
        l.row_mut(j)[j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut acc = h[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                acc -= ri[k] * rj[k].conj();
            }
            l.row_mut(i)[j] = acc / djj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` in place for lower-triangular `L`, `B` given row-major (`n x k`).
pub fn forward_substitute_rows(l: &CMatrix, b: &mut CMatrix) -> Result<(), LinalgError> {
    let n = l.rows();
    if b.rows() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            actual: b.rows(),
        });
    }
    let k = b.cols();
    let mut done: Vec<Complex64> = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut row = b.row(i).to_vec();
        let li = l.row(i);
        for (p, &coef) in li.iter().enumerate().take(i) {
            if coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            let prev = &done[p * k..(p + 1) * k];
            for (r, v) in row.iter_mut().zip(prev) {
                *r -= coef * v;
            }
        }
        let inv = 1.0 / li[i];
        row.iter_mut().for_each(|r| *r *= inv);
        done.extend_from_slice(&row);
    }
    *b = CMatrix::from_row_major(n, k, done)?;
    Ok(())
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn forward_substitute(l: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let mut m = CMatrix::from_row_major(b.len(), 1, b.to_vec())?;
    forward_substitute_rows(l, &mut m)?;
    Ok(m.into_data())
}
