//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! The routine orthogonalizes the columns of the tall orientation of the input
//! (the matrix itself when `rows >= cols`, its adjoint otherwise) by plane
//! rotations; the singular values are the final column norms. Complex column
//! pairs are first phase-aligned so that their inner product is real, after which
//! the classical real rotation applies.

use num_complex::Complex64;

use super::matrix::{dot, CMatrix};
use super::tolerances::TOLERANCES;
use super::LinalgError;

/// All `min(rows, cols)` singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(LinalgError::EmptyMatrix {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if let Some(index) = m.data().iter().position(|z| !z.is_finite()) {
        return Err(LinalgError::NonFinite { index });
    }

    // Column-major working copy of the tall orientation.
    let mut columns: Vec<Vec<Complex64>> = if m.rows() >= m.cols() {
        (0..m.cols()).map(|j| m.column(j)).collect()
    } else {
        (0..m.rows())
            .map(|i| m.row(i).iter().map(|z| z.conj()).collect())
            .collect()
    };

    jacobi_orthogonalize(&mut columns);

    let mut values: Vec<f64> = columns.iter().map(|c| super::norm2(c)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn jacobi_orthogonalize(columns: &mut [Vec<Complex64>]) {
    let n = columns.len();
    let eps = TOLERANCES.jacobi_eps;
    let mut norms: Vec<f64> = columns.iter().map(|c| squared_norm(c)).collect();

    for _ in 0..TOLERANCES.jacobi_max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (head, tail) = columns.split_at_mut(q);
                let (bp, bq) = (&mut head[p], &mut tail[0]);
                // gamma = b_p^H b_q
                let gamma = dot(bq, bp);
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Rotate (b_p, e^{-i phi} b_q) by the real plane rotation.
                let conj_phase = phase.conj();
                for (x, y) in bp.iter_mut().zip(bq.iter_mut()) {
                    let yq = *y * conj_phase;
                    let new_p = *x * c - yq * s;
                    let new_q = *x * s + yq * c;
                    *x = new_p;
                    *y = new_q;
                }
                norms[p] = squared_norm(bp);
                norms[q] = squared_norm(bq);
            }
        }
        if !rotated {
            break;
        }
    }
}

fn squared_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    /// Eigenvalues of a Hermitian matrix through its real symmetric embedding
    /// `[[X, -Y], [Y, X]]` and classical two-sided Jacobi; each eigenvalue of
    /// the Hermitian matrix appears twice in the embedding.
    fn hermitian_eigenvalues_oracle(h: &CMatrix) -> Vec<f64> {
        let n = h.rows();
        let size = 2 * n;
        let mut a = vec![vec![0.0; size]; size];
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                a[i][j] = z.re;
                a[i + n][j + n] = z.re;
                a[i][j + n] = -z.im;
                a[i + n][j] = z.im;
            }
        }
        for _ in 0..100 {
            let off: f64 = (0..size)
                .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..size {
                for q in (p + 1)..size {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..size {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..size {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..size).map(|i| a[i][i]).collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        eig.into_iter().step_by(2).collect()
    }

    fn random(rng: &mut RngStream, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| rng.complex_normal())
    }

    /// Unitary matrix from Gram-Schmidt on random columns.
    fn random_unitary(rng: &mut RngStream, n: usize) -> CMatrix {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
            for _ in 0..2 {
                for u in &cols {
                    let proj = dot(&v, u);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= proj * ui;
                    }
                }
            }
            let nv = super::super::norm2(&v);
            cols.push(v.into_iter().map(|z| z / nv).collect());
        }
        CMatrix::from_fn(n, n, |i, j| cols[j][i])
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let mut rng = RngStream::new(1, 0);
        let u = random_unitary(&mut rng, 7);
        for s in singular_values(&u).unwrap() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_case() {
        let d = CMatrix::from_diagonal(&[1.0, 3.0, 2.0]);
        let s = singular_values(&d).unwrap();
        assert_eq!(s.len(), 3);
        for (got, want) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn squares_match_gram_eigenvalues() {
        let mut rng = RngStream::new(2, 0);
        let m = random(&mut rng, 8, 5);
        let gram = m.adjoint().matmul(&m).unwrap();
        let eig = hermitian_eigenvalues_oracle(&gram);
        let s = singular_values(&m).unwrap();
        assert_eq!(s.len(), 5);
        for (si, ei) in s.iter().zip(&eig) {
            assert!((si * si - ei).abs() <= 1e-9 * ei.abs().max(1.0), "{si} {ei}");
        }
    }

    #[test]
    fn wide_matrix_uses_adjoint_orientation() {
        let mut rng = RngStream::new(3, 0);
        let m = random(&mut rng, 3, 9);
        let a = singular_values(&m).unwrap();
        let b = singular_values(&m.adjoint()).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn invariant_under_unitary_multiplication() {
        let mut rng = RngStream::new(4, 0);
        let m = random(&mut rng, 6, 4);
        let u = random_unitary(&mut rng, 6);
        let v = random_unitary(&mut rng, 4);
        let base = singular_values(&m).unwrap();
        let left = singular_values(&u.matmul(&m).unwrap()).unwrap();
        let right = singular_values(&m.matmul(&v).unwrap()).unwrap();
        for ((b, l), r) in base.iter().zip(&left).zip(&right) {
            assert!((b - l).abs() < 1e-10 * b.max(1.0));
            assert!((b - r).abs() < 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn rank_deficient_has_zero_singular_value() {
        let mut rng = RngStream::new(5, 0);
        let m = random(&mut rng, 5, 3);
        let dup = m.select_columns(&[0, 1, 1]);
        let s = singular_values(&dup).unwrap();
        assert!(s[2] < 1e-12 * s[0]);
    }

    #[test]
    fn zero_matrix() {
        let s = singular_values(&CMatrix::zeros(3, 2)).unwrap();
        assert_eq!(s, vec![0.0, 0.0]);
    }
}
