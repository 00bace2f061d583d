use num_complex::Complex64;

use super::matrix::{dot, CMatrix, CVector};
use super::svd::singular_values;
use super::tolerances::TOLERANCES;
use super::LinalgError;
use crate::par;

/// Minimizer of `|A z - y|_2` for a tall, full-column-rank `A`, by Householder QR.
///
/// Full rank means `s_min(A) > 1e-12 s_max(A)`; otherwise the ratio is reported.
pub fn least_squares(a: &CMatrix, y: &[Complex64]) -> Result<CVector, LinalgError> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(LinalgError::EmptyMatrix { rows: m, cols: n });
    }
    if m < n {
        return Err(LinalgError::Underdetermined { rows: m, cols: n });
    }
    if y.len() != m {
        return Err(LinalgError::DimensionMismatch {
            expected: m,
            actual: y.len(),
        });
    }
    if let Some(index) = a.data().iter().position(|z| !z.is_finite()) {
        return Err(LinalgError::NonFinite { index });
    }

    let mut columns: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = y.to_vec();
    let mut diag = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n {
        let (head, tail) = columns.split_at_mut(k + 1);
        let pivot_col = &mut head[k];
        let Some(v) = householder_vector(&pivot_col[k..]) else {
            diag[k] = pivot_col[k];
            continue;
        };
        diag[k] = v.alpha;
        par::for_each_mut(tail, |_, col| reflect(&v.direction, &mut col[k..]));
        reflect(&v.direction, &mut rhs[k..]);
    }

    // R is upper triangular: diag on the diagonal, columns[j][i] above it.
    let r = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => columns[j][i],
        std::cmp::Ordering::Equal => diag[i],
        std::cmp::Ordering::Greater => Complex64::new(0.0, 0.0),
    });
    let s = singular_values(&r)?;
    let ratio = s[n - 1] / s[0];
    if !(ratio > TOLERANCES.rank_ratio) {
        return Err(LinalgError::RankDeficient { ratio });
    }

    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= r[(i, j)] * z[j];
        }
        z[i] = acc / r[(i, i)];
    }
    Ok(z)
}

struct Reflector {
    /// Unit vector `v` of `H = I - 2 v v*`.
    direction: Vec<Complex64>,
    /// Value placed on the diagonal, `H x = alpha e_1`.
    alpha: Complex64,
}

fn householder_vector(x: &[Complex64]) -> Option<Reflector> {
    let norm_x = super::norm2(x);
    if norm_x == 0.0 {
        return None;
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    let alpha = -phase * norm_x;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let norm_v = super::norm2(&v);
    if norm_v == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|z| *z /= norm_v);
    Some(Reflector {
        direction: v,
        alpha,
    })
}

fn reflect(v: &[Complex64], x: &mut [Complex64]) {
    // x <- x - 2 v (v* x)
    let proj = dot(x, v) * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * proj;
    }
}
