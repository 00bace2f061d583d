//! Independent reference computations shared by the integration tests.
//! Everything here is real arithmetic on plain `Vec<f64>` so it shares no code
//! with the library kernels it checks.
#![allow(dead_code)]

use cslab_core::numerics::{CMatrix, RngStream};
use cslab_core::Complex64;

pub type Real = Vec<Vec<f64>>;

/// Gaussian elimination with partial pivoting; `None` when (numerically) singular.
pub fn solve_dense(a: &Real, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Real = a.iter().zip(b).map(|(r, &v)| {
        let mut row = r.clone();
        row.push(v);
        row
    }).collect();
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-11 * scale {
            return None;
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn columns(a: &Real, t: &[usize]) -> Real {
    a.iter().map(|row| t.iter().map(|&j| row[j]).collect()).collect()
}

fn transpose(a: &Real) -> Real {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn matmul(a: &Real, b: &Real) -> Real {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

fn apply(a: &Real, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Optimal value of real BP `min |z|_1 s.t. Az = y` through its LP form
/// `min 1'(p+q) s.t. A(p-q) = y, p,q >= 0`: the optimum sits at a basic feasible
/// solution, i.e. `z` supported on `m` columns with `A_T z_T = y`.
pub fn bp_lp_optimum(a: &Real, y: &[f64]) -> f64 {
    let (m, n) = (a.len(), a[0].len());
    subsets(n, m)
        .into_iter()
        .filter_map(|t| solve_dense(&columns(a, &t), y))
        .map(|z| z.iter().map(|v| v.abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Optimal value of real QCBP `min |z|_1 s.t. |Az - y|_2 <= eta` (`eta > 0`).
///
/// For a support `T` (full column rank) and sign pattern `s`, the minimum of
/// `s'z` over the ellipsoid `{|A_T z - y| <= eta}` is `z_ls - t G^{-1} s` with
/// `G = A_T'A_T` and `t = sqrt((eta^2 - r_ls^2) / s'G^{-1}s)`. Sign-consistent
/// candidates are feasible with objective `|z|_1`, and the optimum is one of them.
pub fn qcbp_sign_optimum(a: &Real, y: &[f64], eta: f64) -> f64 {
    let (m, n) = (a.len(), a[0].len());
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y_norm <= eta {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for k in 1..=m.min(n) {
        for t in subsets(n, k) {
            let at = columns(a, &t);
            let att = transpose(&at);
            let g = matmul(&att, &at);
            let aty = apply(&att, y);
            let Some(z_ls) = solve_dense(&g, &aty) else { continue };
            let r = apply(&at, &z_ls);
            let r_ls2: f64 = r.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum();
            if r_ls2 > eta * eta {
                continue;
            }
            for mask in 0..(1u32 << k) {
                let s: Vec<f64> = (0..k).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                let Some(gs) = solve_dense(&g, &s) else { continue };
                let q: f64 = s.iter().zip(&gs).map(|(p, q)| p * q).sum();
                let step = ((eta * eta - r_ls2).max(0.0) / q).sqrt();
                let z: Vec<f64> = z_ls.iter().zip(&gs).map(|(zi, gi)| zi - step * gi).collect();
                if z.iter().zip(&s).all(|(zi, si)| zi * si > 0.0) {
                    best = best.min(z.iter().map(|v| v.abs()).sum());
                }
            }
        }
    }
    best
}

pub fn random_real(m: usize, n: usize, rng: &mut RngStream) -> Real {
    (0..m).map(|_| (0..n).map(|_| rng.standard_normal()).collect()).collect()
}

pub fn to_cmatrix(a: &Real) -> CMatrix {
    CMatrix::from_fn(a.len(), a[0].len(), |i, j| Complex64::new(a[i][j], 0.0))
}

pub fn to_cvector(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Random small real BP/QCBP instance: `(A, y, eta)` with `|y|_2 = 1`.
pub fn lp_instance(index: u64, m: usize, n: usize) -> (Real, Vec<f64>, f64) {
    let mut rng = RngStream::new(2024, index);
    let a = random_real(m, n, &mut rng);
    let y = normalized((0..m).map(|_| rng.standard_normal()).collect());
    let eta = if index % 2 == 0 { 0.0 } else { 0.05 + 0.4 * rng.uniform() };
    (a, y, eta)
}

/// Eigenvalues of a real symmetric matrix by cyclic two-sided Jacobi rotations.
pub fn symmetric_eigenvalues(mut h: Real) -> Vec<f64> {
    let n = h.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[i][j] * h[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if h[p][q] == 0.0 {
                    continue;
                }
                let theta = (h[q][q] - h[p][p]) / (2.0 * h[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (hkp, hkq) = (h[k][p], h[k][q]);
                    h[k][p] = c * hkp - s * hkq;
                    h[k][q] = s * hkp + c * hkq;
                }
                for k in 0..n {
                    let (hpk, hqk) = (h[p][k], h[q][k]);
                    h[p][k] = c * hpk - s * hqk;
                    h[q][k] = s * hpk + c * hqk;
                }
            }
        }
    }
    (0..n).map(|i| h[i][i]).collect()
}

/// Restricted isometry constant of a real matrix by enumerating all supports
/// and diagonalizing each Gram block `A_S^T A_S`.
pub fn rip_oracle(a: &Real, s: usize) -> f64 {
    let n = a[0].len();
    let mut delta: f64 = 0.0;
    for support in subsets(n, s) {
        let gram: Real = support
            .iter()
            .map(|&j| support.iter().map(|&k| a.iter().map(|row| row[j] * row[k]).sum()).collect())
            .collect();
        for lambda in symmetric_eigenvalues(gram) {
            delta = delta.max((lambda - 1.0).abs());
        }
    }
    delta
}
