use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::bos::SensingMatrix;
use crate::numerics::tolerances::TOLERANCES;
use crate::numerics::{singular_values, CMatrix};
use crate::par;

/// Sufficient restricted-isometry level for the robust null space property: `4 / sqrt(41)`.
pub const NSP_THRESHOLD: f64 = 0.624_695_047_554_424_3;

const CHUNK: u128 = 2048;

/// Brute-force restricted isometry constant of order `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub s: usize,
    pub delta: f64,
    /// First support, in lexicographic order, attaining `delta`.
    pub support: Vec<usize>,
    /// Extremal eigenvalues of `A_S^* A_S` over all supports.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub supports_checked: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NspVerdict {
    Holds,
    Fails,
    NotEnumerable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NspSufficiencyReport {
    pub s: usize,
    /// `delta_{2s}`, absent when the enumeration exceeds the budget.
    pub delta_2s: Option<f64>,
    pub threshold: f64,
    pub verdict: NspVerdict,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        loop {
            let tail = binomial(n - next - 1, k - slot - 1);
            if rank < tail {
                break;
            }
            rank -= tail;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advances `c` to the next `k`-subset; false after the last one.
fn advance(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone)]
struct Extremes {
    deviation: f64,
    support: Vec<usize>,
    lambda_min: f64,
    lambda_max: f64,
}

impl Extremes {
    /// Merge keeping the earliest support on ties, so the result does not depend on chunking.
    fn merge(self, later: Extremes) -> Extremes {
        let (deviation, support) = if later.deviation > self.deviation {
            (later.deviation, later.support)
        } else {
            (self.deviation, self.support)
        };
        Extremes {
            deviation,
            support,
            lambda_min: self.lambda_min.min(later.lambda_min),
            lambda_max: self.lambda_max.max(later.lambda_max),
        }
    }
}

fn support_eigen_range(a: &CMatrix, support: &[usize]) -> Result<(f64, f64), MetricsError> {
    let sv = singular_values(&a.select_columns(support))?;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    // More columns than rows: the Gram block is singular.
    let lo = if support.len() > a.rows() {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok((lo * lo, hi * hi))
}

fn scan_chunk(a: &CMatrix, s: usize, start: u128, len: u128) -> Result<Extremes, MetricsError> {
    let n = a.cols();
    let mut support = unrank(n, s, start);
    let mut best: Option<Extremes> = None;
    for step in 0..len {
        if step > 0 {
            advance(&mut support, n);
        }
        let (lo, hi) = support_eigen_range(a, &support)?;
        let here = Extremes {
            deviation: (hi - 1.0).max(1.0 - lo),
            support: support.clone(),
            lambda_min: lo,
            lambda_max: hi,
        };
        best = Some(match best {
            Some(b) => b.merge(here),
            None => here,
        });
    }
    Ok(best.expect("chunks are nonempty"))
}

/// `delta_s = max_{|S| = s} max(lambda_max(A_S^* A_S) - 1, 1 - lambda_min(A_S^* A_S))`
/// by exhaustive enumeration, refusing more than the default support budget.
pub fn rip_bruteforce(a: &SensingMatrix, s: usize) -> Result<RipReport, MetricsError> {
    rip_bruteforce_with_budget(a.matrix(), s, u128::from(TOLERANCES.rip_support_budget))
}

pub fn rip_bruteforce_with_budget(a: &CMatrix, s: usize, budget: u128) -> Result<RipReport, MetricsError> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(MetricsError::InvalidInput(format!("sparsity must satisfy 1 <= s <= N, got s={s}, N={n}")));
    }
    let total = binomial(n, s);
    if total > budget {
        return Err(MetricsError::BudgetExceeded { supports: total, budget });
    }
    let chunks = total.div_ceil(CHUNK);
    let parts = par::map(chunks as usize, |c| {
        let start = c as u128 * CHUNK;
        scan_chunk(a, s, start, CHUNK.min(total - start))
    });
    let mut acc: Option<Extremes> = None;
    for part in parts {
        let part = part?;
        acc = Some(match acc {
            Some(b) => b.merge(part),
            None => part,
        });
    }
    let e = acc.expect("at least one support");
    Ok(RipReport {
        s,
        delta: e.deviation.max(0.0),
        support: e.support,
        lambda_min: e.lambda_min,
        lambda_max: e.lambda_max,
        supports_checked: total,
    })
}

/// Checks `delta_{2s} < 4/sqrt(41)`; reports `NotEnumerable` when `2s > N` or the
/// enumeration would exceed the support budget.
pub fn nsp_sufficiency(a: &SensingMatrix, s: usize) -> Result<NspSufficiencyReport, MetricsError> {
    if s == 0 {
        return Err(MetricsError::InvalidInput("sparsity must be >= 1".into()));
    }
    let not_enumerable = NspSufficiencyReport {
        s,
        delta_2s: None,
        threshold: NSP_THRESHOLD,
        verdict: NspVerdict::NotEnumerable,
    };
    if 2 * s > a.cols() {
        return Ok(not_enumerable);
    }
    match rip_bruteforce(a, 2 * s) {
        Ok(report) => Ok(NspSufficiencyReport {
            s,
            delta_2s: Some(report.delta),
            threshold: NSP_THRESHOLD,
            verdict: if report.delta < NSP_THRESHOLD {
                NspVerdict::Holds
            } else {
                NspVerdict::Fails
            },
        }),
        Err(MetricsError::BudgetExceeded { .. }) => Ok(not_enumerable),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn threshold_constant() {
        assert_eq!(NSP_THRESHOLD, 4.0 / 41f64.sqrt());
        assert!((NSP_THRESHOLD - 0.62470).abs() < 1e-5);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(100, 50), 100_891_344_545_564_193_334_812_497_256);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn unrank_walks_lexicographic_order() {
        let (n, k) = (7, 3);
        let mut c = unrank(n, k, 0);
        assert_eq!(c, vec![0, 1, 2]);
        for r in 1..binomial(n, k) {
            assert!(advance(&mut c, n));
            assert_eq!(c, unrank(n, k, r));
        }
        assert_eq!(c, vec![4, 5, 6]);
        assert!(!advance(&mut c, n));
    }

    #[test]
    fn orthonormal_columns() {
        let a = SensingMatrix::explicit(CMatrix::identity(6));
        for s in 1..=6 {
            let r = rip_bruteforce(&a, s).unwrap();
            assert!(r.delta.abs() < 1e-14, "s={s}: {}", r.delta);
        }
        assert_eq!(nsp_sufficiency(&a, 3).unwrap().verdict, NspVerdict::Holds);
        assert_eq!(nsp_sufficiency(&a, 4).unwrap().verdict, NspVerdict::NotEnumerable);
    }

    #[test]
    fn duplicated_column() {
        let one = Complex64::new(1.0, 0.0);
        let a = CMatrix::from_fn(3, 3, |i, j| if i == j.min(1) { one } else { Complex64::new(0.0, 0.0) });
        let a = SensingMatrix::explicit(a);
        let r = rip_bruteforce(&a, 2).unwrap();
        assert!(r.delta >= 1.0 - 1e-14);
        assert_eq!(r.support, vec![1, 2]);
        assert_eq!(nsp_sufficiency(&a, 1).unwrap().verdict, NspVerdict::Fails);
    }

    #[test]
    fn first_order_constant_is_column_norm_spread() {
        let a = CMatrix::from_fn(4, 5, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i * j) as f64 * 0.05));
        let want = (0..5)
            .map(|j| (a.column(j).iter().map(|v| v.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        let r = rip_bruteforce_with_budget(&a, 1, 10).unwrap();
        assert!((r.delta - want).abs() < 1e-12);
    }

    #[test]
    fn more_columns_than_rows_is_singular() {
        let a = CMatrix::from_fn(2, 4, |i, j| Complex64::new(((i + 1) * (j + 3)) as f64 % 5.0, 0.0));
        let r = rip_bruteforce_with_budget(&a, 3, 100).unwrap();
        assert_eq!(r.lambda_min, 0.0);
        assert!(r.delta >= 1.0);
    }

    #[test]
    fn budget_guard() {
        let a = CMatrix::identity(30);
        match rip_bruteforce_with_budget(&a, 10, 1_000_000) {
            Err(MetricsError::BudgetExceeded { supports, .. }) => assert_eq!(supports, 30_045_015),
            other => panic!("{other:?}"),
        }
        assert!(rip_bruteforce_with_budget(&a, 0, 10).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let a = CMatrix::from_fn(5, 16, |i, j| Complex64::new(((i * 7 + j * 3) % 11) as f64 / 8.0, 0.0));
        // C(16,5) = 4368 spans three chunks.
        let par = rip_bruteforce_with_budget(&a, 5, 10_000).unwrap();
        let seq = par::sequential(|| rip_bruteforce_with_budget(&a, 5, 10_000).unwrap());
        assert_eq!(par, seq);
        assert_eq!(par.supports_checked, 4368);
    }
}
