mod common;

use common::*;
use cslab_core::bos::{chebyshev_system, fourier_system, gaussian_matrix, SamplingMode, SensingMatrix};
use cslab_core::metrics::{
    best_s_term_error, cross_coherence, distortion, nsp_sufficiency, rip_bruteforce, robustness_coefficient,
    sv_deviation, ColumnEnsemble, MetricRecord, NspVerdict,
};
use cslab_core::numerics::{CMatrix, RngStream};
use cslab_core::Complex64;
use proptest::prelude::*;

fn real_part(a: &CMatrix) -> Real {
    (0..a.rows()).map(|i| a.row(i).iter().map(|v| v.re).collect()).collect()
}

#[test]
fn jacobi_oracle_is_sane() {
    let h = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
    let mut ev = symmetric_eigenvalues(h);
    ev.sort_by(f64::total_cmp);
    // Eigenvalues of this tridiagonal matrix are 3 and 3 +- sqrt(3).
    let want = [3.0 - 3f64.sqrt(), 3.0, 3.0 + 3f64.sqrt()];
    for (a, b) in ev.iter().zip(want) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn rip_matches_enumeration_oracle() {
    for trial in 0..5 {
        let a = gaussian_matrix(10, 20, &RngStream::new(77, trial)).unwrap();
        let real = real_part(a.matrix());
        for s in 1..=3 {
            let got = rip_bruteforce(&a, s).unwrap();
            let want = rip_oracle(&real, s);
            assert!((got.delta - want).abs() <= 1e-12, "trial {trial}, s={s}: {} vs {want}", got.delta);
        }
    }
}

#[test]
fn rip_is_monotone_in_sparsity() {
    let a = gaussian_matrix(6, 12, &RngStream::new(3, 0)).unwrap();
    let deltas: Vec<f64> = (1..=8).map(|s| rip_bruteforce(&a, s).unwrap().delta).collect();
    assert!(deltas.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{deltas:?}");
}

#[test]
fn nsp_verdict_follows_threshold() {
    let a = gaussian_matrix(10, 14, &RngStream::new(5, 0)).unwrap();
    for s in 1..=3 {
        let r = nsp_sufficiency(&a, s).unwrap();
        let delta = r.delta_2s.unwrap();
        assert_eq!(r.verdict == NspVerdict::Holds, delta < r.threshold);
        assert_eq!(delta, rip_bruteforce(&a, 2 * s).unwrap().delta);
    }
}

#[test]
fn fourier_coherence_respects_m_squared() {
    for n in [4usize, 16, 64] {
        for m in [2usize, 4, 8] {
            let ens = ColumnEnsemble::sampled(&fourier_system(n).unwrap(), m, SamplingMode::Iid, &RngStream::new(9, 0), 500)
                .unwrap();
            let mu = cross_coherence(&ens).unwrap();
            assert!(n as f64 * mu.mean <= (m * m) as f64, "N={n} m={m}: N mu = {}", n as f64 * mu.mean);
            assert!(distortion(&ens).unwrap().mean <= 1e-12);
        }
    }
}

#[test]
fn coherence_of_duplicated_columns_is_at_least_one() {
    let n = 8;
    let mut rng = RngStream::new(4, 0);
    let col: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
    let other: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
    let scale = (n as f64).sqrt() / col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let cols = [col.clone(), other, col];
    let m = CMatrix::from_fn(n, 3, |i, k| cols[k][i] * if k == 1 { 1.0 } else { scale });
    let mu = cross_coherence(&ColumnEnsemble::from_columns(&m)).unwrap();
    assert!(mu.mean >= 1.0 - 1e-12);
}

#[test]
fn chebyshev_distortion_decays_with_n() {
    let rng = RngStream::new(21, 0);
    let xi: Vec<f64> = [64usize, 256, 1024]
        .iter()
        .map(|&n| {
            let ens = ColumnEnsemble::sampled(&chebyshev_system(n).unwrap(), 8, SamplingMode::Iid, &rng, 100).unwrap();
            distortion(&ens).unwrap().mean
        })
        .collect();
    assert!(xi[0] > xi[1] && xi[1] > xi[2], "{xi:?}");
}

#[test]
fn fourier_sv_deviation_decreases_with_n() {
    let rng = RngStream::new(22, 0);
    let dev: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let ens = ColumnEnsemble::sampled(&fourier_system(n).unwrap(), 8, SamplingMode::Iid, &rng, 500).unwrap();
            sv_deviation(&ens).unwrap().mean
        })
        .collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
}

#[test]
fn sensing_matrix_and_explicit_columns_agree() {
    let a = gaussian_matrix(5, 9, &RngStream::new(6, 0)).unwrap();
    let m = a.matrix().adjoint().scaled(5f64.sqrt());
    let x = cross_coherence(&ColumnEnsemble::from_sensing(&a)).unwrap().mean;
    let y = cross_coherence(&ColumnEnsemble::from_columns(&m)).unwrap().mean;
    assert!((x - y).abs() <= 1e-12 * x.max(1.0));
}

#[test]
fn metric_record_json() {
    let ens = ColumnEnsemble::sampled(&fourier_system(16).unwrap(), 4, SamplingMode::Iid, &RngStream::new(1, 0), 20)
        .unwrap();
    let est = cross_coherence(&ens).unwrap();
    let rec = MetricRecord::from_estimate("cross_coherence", &est, Some(1))
        .with("n", 16)
        .with("m", 4);
    let json = serde_json::to_value(&rec).unwrap();
    for key in ["quantity", "parameters", "trials", "estimate", "std_error", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["trials"], 20);
    let back: MetricRecord = serde_json::from_value(json).unwrap();
    assert_eq!(back, rec);
}

proptest! {
    #[test]
    fn best_term_error_is_monotone_and_lipschitz(
        x in prop::collection::vec(-10.0f64..10.0, 1..20),
        d in prop::collection::vec(-1.0f64..1.0, 20),
    ) {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let yc: Vec<Complex64> = x.iter().zip(&d).map(|(&v, &e)| Complex64::new(v + e, 0.0)).collect();
        let shift: f64 = d.iter().take(x.len()).map(|e| e.abs()).sum();
        for s in 0..=x.len() {
            let here = best_s_term_error(&xc, s);
            if s > 0 {
                prop_assert!(here <= best_s_term_error(&xc, s - 1) + 1e-12);
            }
            prop_assert!((here - best_s_term_error(&yc, s)).abs() <= shift + 1e-9);
        }
    }

    #[test]
    fn robustness_coefficient_dominates_root_ratio(seed in 0u64..1000, s in 1usize..8) {
        let a = gaussian_matrix(6, 16, &RngStream::new(seed, 0)).unwrap();
        let c = robustness_coefficient(&a, s).unwrap();
        prop_assert!(c >= (6.0 / s as f64).sqrt() * (1.0 - 1e-12));
    }
}

#[test]
fn explicit_matrices_are_accepted() {
    let a = SensingMatrix::explicit(CMatrix::identity(4));
    assert_eq!(rip_bruteforce(&a, 2).unwrap().delta, 0.0);
}
