use mbl_otto::basis::{HamiltonianParams, SectorBasis};
use mbl_otto::cycle::{run_cycle, CycleParams, RealizationPair};
use mbl_otto::ensemble::{
    ensemble_mean_gap, fit_diabatic, level_statistics, make_realizations, run_ensemble, with_threads, EngineVariant,
    LevelStatsConfig, RunConfig, Sweep, SweepParam,
};
use mbl_otto::Error;
use proptest::prelude::*;

#[test]
fn realizations_are_reproducible_and_in_range() {
    let a = make_realizations(17, 1000, 12, 2.0, 20.0);
    let b = make_realizations(17, 1000, 12, 2.0, 20.0);
    assert_eq!(a, b);
    let fields: Vec<f64> = a.iter().flat_map(|r| r.fields.iter().copied()).collect();
    assert_eq!(fields.len(), 12_000);
    assert!(fields.iter().all(|h| (-1.0..=1.0).contains(h)));
    let mean = fields.iter().sum::<f64>() / fields.len() as f64;
    assert!(mean.abs() < 3.0 / (3.0f64.sqrt() * (fields.len() as f64).sqrt()));
    assert_ne!(make_realizations(18, 1, 12, 2.0, 20.0)[0].fields, a[0].fields);
}

#[test]
fn equal_endpoints_give_null_efficiency() {
    let mut c = RunConfig::new(4, 1, 3);
    c.h_eth = 5.0;
    c.h_mbl = 5.0;
    let run = run_ensemble(&c).unwrap();
    let p = &run.summary.points[0];
    assert_eq!(p.w_tot.mean, 0.0);
    assert!(p.eta.is_none());
    let r = &run.records[0][0];
    assert_eq!(r.q4, -r.q2);
}

#[test]
fn summary_means_match_records() {
    let mut c = RunConfig::new(8, 40, 21);
    c.sweep = Some(Sweep { param: SweepParam::Wb, grid: vec![1.0 / 32.0, 1.0 / 8.0] });
    let run = run_ensemble(&c).unwrap();
    let basis = SectorBasis::new(8).unwrap();
    let g = run.summary.metadata.mean_gap;
    for (point, records) in run.summary.points.iter().zip(&run.records) {
        assert_eq!(records.len(), 40);
        let mean = records.iter().map(|r| r.w_tot).sum::<f64>() / 40.0;
        assert_eq!(point.w_tot.mean, mean);
        let sd = (records.iter().map(|r| (r.w_tot - mean).powi(2)).sum::<f64>() / 39.0).sqrt();
        assert!((point.w_tot.stderr.unwrap() - sd / 40f64.sqrt()).abs() < 1e-15);
        let q4 = records.iter().map(|r| r.q4).sum::<f64>() / 40.0;
        assert!((point.eta.unwrap().mean - mean / q4).abs() < 1e-14);
        for r in records {
            let dr = mbl_otto::ensemble::realization(21, r.realization_id, 8, 2.0, 20.0);
            let params = CycleParams::adiabatic(point.wb, f64::INFINITY, 0.0);
            let direct =
                run_cycle(&basis, RealizationPair::Same(&dr), &HamiltonianParams::default(), &params, r.realization_id)
                    .unwrap();
            assert_eq!(&direct, r);
        }
        assert!((point.wb / g - 1.0 / 32.0).abs() < 1e-12 || (point.wb / g - 1.0 / 8.0).abs() < 1e-12);
    }
    assert!(run.summary.metadata.excluded.is_empty());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut c = RunConfig::new(8, 24, 5);
    c.sweep = Some(Sweep { param: SweepParam::BetaC, grid: vec![50.0, f64::INFINITY] });
    let one = with_threads(Some(1), || run_ensemble(&c)).unwrap().unwrap();
    let three = with_threads(Some(3), || run_ensemble(&c)).unwrap().unwrap();
    assert_eq!(one.summary, three.summary);
    assert_eq!(one.records, three.records);
    assert_eq!(
        serde_json::to_string(&one.summary).unwrap(),
        serde_json::to_string(&three.summary).unwrap()
    );
}

#[test]
fn mean_gap_tracks_dimension() {
    let g8 = ensemble_mean_gap(&RunConfig::new(8, 50, 0)).unwrap();
    let g10 = ensemble_mean_gap(&RunConfig::new(10, 50, 0)).unwrap();
    assert!(g8 > g10);
    // The rescale fixes the spectral variance near one.
    assert!((g10 / mbl_otto::spectra::mean_gap_from_std(1.0, 252) - 1.0).abs() < 0.05);
}

#[test]
fn config_validation() {
    let mut c = RunConfig::new(8, 0, 0);
    assert!(matches!(run_ensemble(&c), Err(Error::Parameter(_))));
    c.realizations = 1;
    c.sweep = Some(Sweep { param: SweepParam::Wb, grid: vec![] });
    assert!(c.validate().is_err());
    c.sweep = None;
    c.sites = 7;
    assert!(c.validate().is_err());
    c.sites = 8;
    c.variant = EngineVariant::EqualDisorder;
    c.cycle.speed = 0.1;
    assert!(matches!(run_ensemble(&c), Err(Error::Parameter(_))));
}

#[test]
fn diabatic_speed_below_step_limit_is_resource_error() {
    let mut c = RunConfig::new(6, 2, 0);
    c.cycle.speed = 1e-9;
    assert!(matches!(run_ensemble(&c), Err(Error::Resource(_))));
}

#[test]
fn equal_disorder_variant_runs() {
    let mut c = RunConfig::new(8, 30, 4);
    c.variant = EngineVariant::EqualDisorder;
    let run = run_ensemble(&c).unwrap();
    let p = &run.summary.points[0];
    assert!(p.w_tot.mean.is_finite());
    for r in &run.records[0] {
        assert!(((r.w1 + r.w3) - (r.q2 + r.q4)).abs() < 1e-9);
    }
}

#[test]
fn bandwidth_variant_skips_rescale() {
    let mut c = RunConfig::new(8, 10, 4);
    c.variant = EngineVariant::Bandwidth;
    let g_bare = ensemble_mean_gap(&c).unwrap();
    c.variant = EngineVariant::Standard;
    let g = ensemble_mean_gap(&c).unwrap();
    assert!(g_bare > 3.0 * g);
}

#[test]
fn twelve_sites_output_tracks_bandwidth() {
    let c = RunConfig::new(12, 8, 1);
    let run = run_ensemble(&c).unwrap();
    let p = &run.summary.points[0];
    let ratio = p.w_tot.mean / p.wb;
    assert!(ratio > 0.5 && ratio < 1.6, "W_tot / W_b = {ratio}");
}

#[test]
fn level_statistics_separates_phases() {
    let cfg = |h: f64| LevelStatsConfig { sites: 8, h, realizations: 600, master_seed: 2, window: 0.5, bins: 40 };
    let mbl = level_statistics(&cfg(20.0)).unwrap().ks.unwrap();
    let eth = level_statistics(&cfg(2.0)).unwrap().ks.unwrap();
    assert!(mbl.ks_poisson < mbl.ks_wigner, "{mbl:?}");
    assert!(eth.ks_wigner < eth.ks_poisson, "{eth:?}");
}

#[test]
fn level_statistics_variance_near_unit() {
    let s = level_statistics(&LevelStatsConfig { sites: 8, h: 20.0, realizations: 100, master_seed: 0, window: 0.5, bins: 40 })
        .unwrap();
    assert!((s.spectral_variance - 1.0).abs() < 0.1, "{}", s.spectral_variance);
    assert!(s.delta_minus.is_none());
}

#[test]
fn fit_needs_four_speeds() {
    assert!(matches!(fit_diabatic(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4], 0.1, 0.1), Err(Error::Statistics(_))));
}

#[test]
fn fit_intercept_is_zero_speed_work() {
    let speeds = [0.0, 1e-3, 1e-2, 1e-1, 1.0];
    let w: Vec<f64> = speeds.iter().map(|v: &f64| 0.5 - 0.2 * (v * 1e-2).powf(0.4) / 0.05).collect();
    let f = fit_diabatic(&speeds, &w, 1e-2, 0.05).unwrap();
    assert!((f.exponent - 0.4).abs() < 0.02);
    assert!((f.w0 - 0.5).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fit_recovers_generated_exponent(p in 0.1f64..1.5, w0 in -1.0f64..1.0, w1 in 0.01f64..1.0) {
        let speeds: Vec<f64> = (0..8).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect();
        let (dm, wb) = (2e-3, 0.01);
        let w: Vec<f64> = speeds.iter().map(|v| w0 - w1 * (v * dm).powf(p) / wb).collect();
        let f = fit_diabatic(&speeds, &w, dm, wb).unwrap();
        prop_assert!((f.exponent - p).abs() < 0.02);
    }

    #[test]
    fn ensemble_first_law(seed in any::<u64>(), wb in 0.0f64..0.3, beta_c in 1.0f64..1e4) {
        let mut c = RunConfig::new(6, 3, seed);
        c.cycle.wb = wb;
        c.cycle.beta_c = beta_c;
        let run = run_ensemble(&c).unwrap();
        for r in &run.records[0] {
            prop_assert!(((r.w1 + r.w3) - (r.q2 + r.q4)).abs() < 1e-9);
        }
    }
}
