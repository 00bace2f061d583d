use super::MetricsError;
use crate::bos::SensingMatrix;
use crate::numerics::tolerances::TOLERANCES;
use crate::numerics::{singular_values, LinalgError};
use crate::Complex64;

/// Multiplier `sqrt(m/s) / min(s_min(sqrt(m/N) A^*), 1)` of the noise-folding error term.
pub fn robustness_coefficient(a: &SensingMatrix, s: usize) -> Result<f64, MetricsError> {
    let (m, n) = (a.rows(), a.cols());
    if s == 0 {
        return Err(MetricsError::InvalidInput("sparsity must be >= 1".into()));
    }
    if m > n {
        return Err(LinalgError::RankDeficient { ratio: 0.0 }.into());
    }
    let sv = singular_values(a.matrix())?;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo > TOLERANCES.rank_ratio * hi) {
        return Err(LinalgError::RankDeficient {
            ratio: if hi > 0.0 { lo / hi } else { 0.0 },
        }
        .into());
    }
    let s_min = (m as f64 / n as f64).sqrt() * lo;
    Ok((m as f64 / s as f64).sqrt() / s_min.min(1.0))
}

/// `(K^2/delta^2) max(ln^2(s) ln((K^2/delta^2) s ln N) ln N, ln(1/eps))`.
pub fn log_factor_l(n: usize, s: usize, delta: f64, eps: f64, k: f64) -> Result<f64, MetricsError> {
    if s < 2 || n < s {
        return Err(MetricsError::InvalidInput(format!("need N >= s >= 2, got N={n}, s={s}")));
    }
    if !(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0) || !(k >= 1.0) {
        return Err(MetricsError::InvalidInput(format!(
            "need 0 < delta < 1, 0 < eps < 1, K >= 1; got delta={delta}, eps={eps}, K={k}"
        )));
    }
    let lead = k * k / (delta * delta);
    let (ln_n, ln_s) = ((n as f64).ln(), (s as f64).ln());
    let first = ln_s * ln_s * (lead * s as f64 * ln_n).ln() * ln_n;
    Ok(lead * first.max((1.0 / eps).ln()))
}

/// `sigma_s(x)_1`: the l1 norm of all but the `s` largest-magnitude entries.
pub fn best_s_term_error(x: &[Complex64], s: usize) -> f64 {
    if s >= x.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    mags.sort_by(f64::total_cmp);
    mags[..x.len() - s].iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bos::{fourier_system, sample_matrix, SamplingMode};
    use crate::numerics::{CMatrix, RngStream};

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn best_term_examples() {
        let x = [c(3.0), c(1.0), c(-2.0)];
        assert_eq!(best_s_term_error(&x, 1), 3.0);
        assert_eq!(best_s_term_error(&x, 3), 0.0);
        assert_eq!(best_s_term_error(&x, 0), 6.0);
        assert_eq!(best_s_term_error(&[Complex64::new(3.0, 4.0), c(1.0)], 0), 6.0);
    }

    #[test]
    fn log_factor_fixture() {
        // Evaluated independently at 40 digits.
        let v = log_factor_l(1000, 10, 0.5, 0.5, 1.0).unwrap();
        assert!((v - 823.535_634_344_012).abs() < 1e-9);
        // Tiny eps: the ln(1/eps) branch wins.
        let eps = 1e-300;
        assert_eq!(log_factor_l(1000, 10, 0.5, eps, 1.0).unwrap(), 4.0 * (1.0 / eps).ln());
        assert!(log_factor_l(10, 1, 0.5, 0.5, 1.0).is_err());
        assert!(log_factor_l(10, 2, 1.0, 0.5, 1.0).is_err());
        assert!(log_factor_l(10, 2, 0.5, 0.5, 0.9).is_err());
    }

    #[test]
    fn unitary_sampling() {
        let sys = fourier_system(16).unwrap();
        let a = sample_matrix(&sys, 16, &RngStream::new(1, 0), SamplingMode::RowsWithoutReplacement).unwrap();
        let v = robustness_coefficient(&a, 4).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let s_eq_m = robustness_coefficient(&a, 16).unwrap();
        assert!(s_eq_m >= 1.0 && (s_eq_m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composes_from_singular_values() {
        let sys = fourier_system(256).unwrap();
        // Iid rows collide with near certainty at this size, which is rank deficient.
        let a = sample_matrix(&sys, 64, &RngStream::new(7, 0), SamplingMode::RowsWithoutReplacement).unwrap();
        let sv = singular_values(&a.matrix().adjoint().scaled((64.0f64 / 256.0).sqrt())).unwrap();
        let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let want = (64.0f64 / 8.0).sqrt() / s_min.min(1.0);
        let got = robustness_coefficient(&a, 8).unwrap();
        assert!((got - want).abs() <= 1e-10 * want);
        assert!(got >= (64.0f64 / 8.0).sqrt());
    }

    #[test]
    fn rank_deficiency_is_rejected() {
        let row = vec![c(1.0), c(2.0), c(0.5)];
        let a = SensingMatrix::explicit(CMatrix::from_rows(vec![row.clone(), row]).unwrap());
        assert!(matches!(robustness_coefficient(&a, 1), Err(MetricsError::Linalg(_))));
    }
}
