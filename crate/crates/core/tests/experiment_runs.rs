use cslab_core::experiments::*;
use cslab_core::par;

fn fig2_config(n_values: Vec<usize>, trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::Fig2);
    cfg.trials = trials;
    cfg.seed = 11;
    cfg.experiment = ExperimentParams::Fig2(Fig2Params {
        n_values,
        ..Fig2Params::default()
    });
    cfg
}

fn small_fig1() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::Fig1);
    cfg.trials = 2;
    cfg.experiment = ExperimentParams::Fig1(Fig1Params {
        n: 64,
        sparsity: 3,
        ratios: vec![0.5, 1.0],
        ..Fig1Params::default()
    });
    cfg
}

fn small_fig3() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::Fig3);
    cfg.trials = 2;
    cfg.experiment = ExperimentParams::Fig3(Fig3Params {
        dim: 2,
        budget: 5,
        m: 12,
        eta_count: 6,
        oversample_factor: 10,
        ..Fig3Params::default()
    });
    cfg
}

fn small_sv_check() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::SvCheck);
    cfg.trials = 30;
    cfg.experiment = ExperimentParams::SvCheck(SvCheckParams {
        m_values: vec![4, 8],
        oversampling: vec![2, 4],
        ..SvCheckParams::default()
    });
    cfg
}

fn csv_bytes(records: &[ExperimentRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records).unwrap();
    buf
}

/// Replays and the sequential path reproduce the record table byte for byte, and
/// re-aggregating the CSV reproduces the summary.
fn check_reproducible(cfg: &ExperimentConfig) -> ExperimentRun {
    let run = run_experiment(cfg).unwrap();
    let again = run_experiment(cfg).unwrap();
    let seq = par::sequential(|| run_experiment(cfg).unwrap());
    let bytes = csv_bytes(&run.records);
    assert_eq!(bytes, csv_bytes(&again.records), "{}: replay differs", cfg.id());
    assert_eq!(bytes, csv_bytes(&seq.records), "{}: sequential differs", cfg.id());
    let reread = read_records_csv(bytes.as_slice()).unwrap();
    let resummary = summarize(cfg, &reread).unwrap();
    assert_eq!(resummary.body, run.summary.body, "{}: re-aggregation differs", cfg.id());
    run
}

#[test]
fn fig2_small_grid_respects_bound_and_replays() {
    let cfg = fig2_config(vec![4, 8, 16], 200);
    let run = check_reproducible(&cfg);
    assert_eq!(run.records.len(), fig2_grid(&[4, 8, 16]).len() * 200);
    let SummaryBody::Fig2(s) = &run.summary.body else { panic!() };
    assert!(s.all_hold);
    assert!(s.max_xi <= 1e-12);
    for p in &s.points {
        assert_eq!(p.bound, (p.m * p.m) as f64);
    }
}

#[test]
fn full_sampling_with_replacement_has_collisions() {
    // For N = m = 4 the Fourier Gram entries are 4 on collisions and 0 otherwise,
    // so N mu = N (largest multiplicity - 1). Its mean over all 4^4 draws is exact.
    let n = 4usize;
    let mut total = 0.0;
    for code in 0..n.pow(4) {
        let mut counts = [0usize; 4];
        let mut c = code;
        for _ in 0..4 {
            counts[c % n] += 1;
            c /= n;
        }
        total += (n * (counts.iter().max().unwrap() - 1)) as f64;
    }
    let exact = total / n.pow(4) as f64;
    let cfg = fig2_config(vec![4], 500);
    let run = run_experiment(&cfg).unwrap();
    let SummaryBody::Fig2(s) = &run.summary.body else { panic!() };
    let p = s.points.iter().find(|p| p.m == 4).unwrap();
    assert!(p.n_mu > 0.0);
    let tol = 4.0 * n as f64 * p.mu_std_error;
    assert!((p.n_mu - exact).abs() <= tol, "N mu = {} vs exact {exact} (tol {tol})", p.n_mu);
}

#[test]
fn fig1_records_and_regimes() {
    let cfg = small_fig1();
    let run = check_reproducible(&cfg);
    // ratios x trials x matrices x etas
    assert_eq!(run.records.len(), 2 * 2 * 2 * 2);
    for r in &run.records {
        assert!(r.failure.is_none(), "{:?}", r.failure);
        let regime = r.regime.unwrap();
        match r.case.as_deref() {
            Some("bp") => assert_eq!(regime, Regime::NoiseExceedsEta),
            Some("qcbp") => assert_eq!(regime, Regime::NoiseBounded),
            other => panic!("unexpected case {other:?}"),
        }
        assert_eq!(r.sigma_s, Some(0.0));
        assert!(r.error.unwrap() < 0.2, "{r:?}");
    }
    let SummaryBody::Fig1(s) = &run.summary.body else { panic!() };
    assert_eq!(s.groups.len(), 2 * 2 * 2);
    assert!(s.group(32, "fourier", 0.01).unwrap().median_error.is_some());
}

#[test]
fn fig3_small_instance() {
    let cfg = small_fig3();
    let run = check_reproducible(&cfg);
    // per trial and zeta: 6 grid points + eta_opt + eta_cv
    assert_eq!(run.records.len(), 2 * 2 * 8);
    assert!(run.summary.notes.iter().any(|n| n.contains("x_ref")));
    let SummaryBody::Fig3(s) = &run.summary.body else { panic!() };
    assert_eq!(s.curves.len(), 2);
    assert_eq!(s.trials.len(), 4);
    for c in &s.curves {
        assert_eq!(c.etas.len(), 6);
        assert!((c.etas[0] - 1e-3).abs() < 1e-15 && (c.etas[5] - 1e3).abs() < 1e-9);
    }
    for r in &run.records {
        let (Some(eta), Some(noise)) = (r.eta, r.noise_norm) else { panic!() };
        assert_eq!(r.regime, Some(Regime::classify(noise, eta)));
        assert!(r.eta_opt.is_some());
    }
}

#[test]
fn sv_check_constant_covers_every_point() {
    let run = check_reproducible(&small_sv_check());
    let SummaryBody::SvCheck(s) = &run.summary.body else { panic!() };
    assert_eq!(s.points.len(), 2 * 2 * 2);
    let c = s.fitted_constant.unwrap();
    for p in &s.points {
        assert!(p.sv_deviation <= c * p.rhs * (1.0 + 1e-12));
        if p.system == "fourier" {
            assert!(p.xi <= 1e-12);
            assert_eq!(p.rhs, deviation_bound_rhs(p.mu, p.xi, p.m));
        }
    }
}

#[test]
fn outputs_are_written_and_replay_byte_identically() {
    let cfg = fig2_config(vec![4, 8], 50);
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    write_outputs(&a, &run_experiment(&cfg).unwrap()).unwrap();
    // Re-run from the resolved config written next to the outputs.
    let resolved = ExperimentConfig::load(&a.join(CONFIG_FILE)).unwrap();
    assert_eq!(resolved, cfg);
    write_outputs(&b, &run_experiment(&resolved).unwrap()).unwrap();
    for f in [CONFIG_FILE, RECORDS_FILE, SUMMARY_FILE] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join(TIMINGS_FILE).exists());
    let text = std::fs::read_to_string(a.join(RECORDS_FILE)).unwrap();
    assert!(text.starts_with("# cslab records v1; columns: experiment,grid_index"));
}

#[test]
fn mismatched_config_is_rejected() {
    let cfg = small_fig1();
    assert!(run_fig2(&cfg).is_err());
    let run = run_experiment(&fig2_config(vec![4], 3)).unwrap();
    assert!(summarize(&cfg, &run.records).is_err());
}
