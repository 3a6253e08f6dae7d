use cvclone::benchmarks::average_fidelity;
use cvclone::cloner::heisenberg_clone_stats;
use cvclone::montecarlo::{
    compare_with_analytic, reproduce_figure3, reproduce_figure4, run_batch, run_batch_with_threads, Figure3Options,
    Figure4Options,
};
use cvclone::{Alphabet, Ancilla, ClonerConfig};

#[test]
fn same_seed_is_bit_identical_across_thread_counts() {
    let cfg = ClonerConfig::matched_imperfect(0.83, 0.95, 0.99);
    let a = Alphabet::SymmetricGaussian { v: 1.72 };
    let one = run_batch_with_threads(&cfg, &a, 5_000, 42, Some(1)).unwrap();
    let eight = run_batch_with_threads(&cfg, &a, 5_000, 42, Some(8)).unwrap();
    assert_eq!(one, eight);
    let other = run_batch_with_threads(&cfg, &a, 5_000, 43, Some(8)).unwrap();
    assert_ne!(one.records, other.records);
}

#[test]
fn standard_error_shrinks_with_root_n() {
    let cfg = ClonerConfig::matched(0.7);
    let a = Alphabet::SymmetricGaussian { v: 1.0 };
    let small = run_batch(&cfg, &a, 50_000, 3).unwrap().aggregates[0];
    let large = run_batch(&cfg, &a, 100_000, 4).unwrap().aggregates[0];
    for (s, l) in [
        (small.sigma_x.se, large.sigma_x.se),
        (small.fidelity.se, large.fidelity.se),
        (small.lambda_x.unwrap().se, large.lambda_x.unwrap().se),
    ] {
        let ratio = s / l;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "ratio {ratio}");
    }
}

#[test]
fn known_phase_fidelity_does_not_depend_on_amplitude() {
    let cfg = ClonerConfig::phase_known(Ancilla::VACUUM, Ancilla::VACUUM);
    let batch = run_batch(&cfg, &Alphabet::KnownPhase { phase: 0.0 }, 100_000, 8).unwrap();
    let groups = batch.fidelity_by_amplitude(0);
    assert_eq!(groups.len(), 4);
    let (_, reference) = groups[0];
    for &(amp, est) in &groups[1..] {
        let se = (est.se.powi(2) + reference.se.powi(2)).sqrt();
        assert!((est.value - reference.value).abs() <= 3.0 * se, "amplitude {amp}");
    }
}

#[test]
fn gaussian_batch_matches_analytic() {
    let cfg = ClonerConfig::matched(0.8329506);
    let batch = run_batch(&cfg, &Alphabet::SymmetricGaussian { v: 1.72 }, 100_000, 21).unwrap();
    let cmp = compare_with_analytic(&batch).unwrap();
    assert!(cmp.max_abs_z() <= 4.0, "{:?}", cmp.z_scores);
    assert_eq!(cmp.z_scores.len(), 10);
}

#[test]
fn width_sweep_rows() {
    let grid: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
    let rows = reproduce_figure3(&grid, &Figure3Options::default()).unwrap();
    for r in &rows {
        assert!(r.f_mc.is_none());
        assert!((r.sqrt_v * r.sqrt_v - r.v).abs() < 1e-12);
        assert!(r.f_ideal > r.f_classical);
        assert!(r.f_imperfect <= r.f_ideal);
    }
    let opts = Figure3Options { n_traj: 20_000, seed: 9, ..Default::default() };
    let rows = reproduce_figure3(&[1.72], &opts).unwrap();
    let mc = rows[0].f_mc.unwrap();
    assert!(mc.z_score(rows[0].f_imperfect).abs() <= 4.0, "{mc:?} vs {}", rows[0].f_imperfect);
}

#[test]
fn known_phase_noise_report() {
    let report = reproduce_figure4(&Figure4Options { n_traj: 20_000, seed: 2, ..Default::default() }).unwrap();
    assert!((report.noise_db_ideal - 1.7609).abs() < 1e-4);
    assert!(report.noise_db > report.noise_db_ideal);
    let f = report.mc_fidelity.unwrap();
    for est in f {
        assert!(est.z_score(report.fidelity).abs() <= 4.0, "{est:?} vs {}", report.fidelity);
    }
    let ideal = heisenberg_clone_stats(&ClonerConfig::phase_known(Ancilla::VACUUM, Ancilla::VACUUM)).unwrap();
    let f_ideal = average_fidelity(&ideal, &Alphabet::KnownPhase { phase: 0.0 }).unwrap();
    assert_eq!(report.fidelity_ideal, f_ideal);
}

#[test]
fn deterministic_estimates_score_on_rounding_scale() {
    let est = cvclone::Estimate { value: 1.5, se: 0.0 };
    assert_eq!(est.z_score(1.5), 0.0);
    assert!(est.z_score(1.5 + 1e-15).abs() < 1e-2);
    assert!(est.z_score(1.4) > 1e10);
    let tiny = cvclone::Estimate { value: 0.7071067811865475, se: 5e-18 };
    assert!(tiny.z_score(std::f64::consts::FRAC_1_SQRT_2).abs() < 1.0);
}

#[test]
fn beam_splitter_regime_batch_matches_analytic() {
    let batch = run_batch(&ClonerConfig::matched(1.0), &Alphabet::SymmetricGaussian { v: 1.0 }, 2_000, 0).unwrap();
    let cmp = compare_with_analytic(&batch).unwrap();
    assert!(cmp.max_abs_z() <= 4.0, "{:?}", cmp.z_scores);
}
