use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LinalgError;

pub type CVector = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(1.0, 0.0);
        }
        out
    }

    /// Builds a matrix from row-major data, rejecting empty shapes and non-finite entries.
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                rows,
                cols,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Stacks rows of equal length.
    pub fn from_rows(rows: Vec<CVector>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n_rows = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch {
                expected: cols,
                actual: bad.len(),
            });
        }
        Self::from_row_major(n_rows, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut out = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            out[(i, i)] = Complex64::new(d, 0.0);
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self::from_fn(self.rows, columns.len(), |i, j| self[(i, columns[j])])
    }

    /// Submatrix made of the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A A*`, the m×m Gram matrix of the rows.
    pub fn row_gram(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for k in i..self.rows {
                let g = dot(self.row(i), self.row(k));
                out[(i, k)] = g;
                out[(k, i)] = g.conj();
            }
        }
        out
    }

    /// Writes `A z` into `out` without dimension checks beyond debug assertions.
    pub fn apply_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(z.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row_dot(row, z);
        }
    }

    /// Writes `A* w` into `out`.
    pub fn apply_adjoint_into(&self, w: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(w.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(ZERO);
        for (&wk, row) in w.iter().zip(self.data.chunks_exact(self.cols)) {
            if wk == ZERO {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a.conj() * wk;
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

// Split real/imaginary accumulators; this form auto-vectorizes well.
#[inline]
fn row_dot(row: &[Complex64], z: &[Complex64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, b) in row.iter().zip(z) {
        re += a.re * b.re - a.im * b.im;
        im += a.re * b.im + a.im * b.re;
    }
    Complex64::new(re, im)
}

/// Exact product `A z`.
pub fn matvec(a: &CMatrix, z: &[Complex64]) -> Result<CVector, LinalgError> {
    if a.cols() != z.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.cols(),
            actual: z.len(),
        });
    }
    let mut out = vec![ZERO; a.rows()];
    a.apply_into(z, &mut out);
    Ok(out)
}

/// Exact product `A* w`.
pub fn matvec_adjoint(a: &CMatrix, w: &[Complex64]) -> Result<CVector, LinalgError> {
    if a.rows() != w.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            actual: w.len(),
        });
    }
    let mut out = vec![ZERO; a.cols()];
    a.apply_adjoint_into(w, &mut out);
    Ok(out)
}

/// `<u, v> = Σ u_i conj(v_i)`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, b) in u.iter().zip(v) {
        re += a.re * b.re + a.im * b.im;
        im += a.im * b.re - a.re * b.im;
    }
    Complex64::new(re, im)
}

pub fn norm2(v: &[Complex64]) -> f64 {
    // Scaled accumulation guards against overflow for huge entries.
    let scale = norm_inf(v);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * sum.sqrt()
}

pub fn norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
