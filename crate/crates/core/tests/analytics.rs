use mbl_otto::analytics::{
    classical_efficiencies, cold_bath_probabilities, diabatic_predictions, gap_densities, j_far, j_near,
    localization_scales, power_estimate, predicted_cycle, time_bounds, worst_case_analytic, xi_anderson,
    xi_from_zeta, zeta_from_xi, ClassicalInputs, DiabaticModel, PowerInput, PredictionInput, TimeBoundsInput,
};
use mbl_otto::Error;
use proptest::prelude::*;
use std::f64::consts::LN_2;

/// Integral of f over [0, inf) by tanh-sinh quadrature after t = x / (1 + x).
fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    quadrature::integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = t / (1.0 - t);
            f(x) / ((1.0 - t) * (1.0 - t))
        },
        0.0,
        1.0,
        1e-12,
    )
    .integral
}

fn prediction(wb: f64, beta_c: f64, beta_h: f64, mean_gap: f64) -> PredictionInput {
    PredictionInput { wb, beta_c, beta_h, mean_gap, sites: 12, eps: 1.0 }
}

#[test]
fn gap_densities_are_normalized_with_the_right_mean() {
    for g in [0.01, 0.3, 1.0, 4.0] {
        let m = |d: f64| gap_densities(d, g).unwrap().p_mbl;
        let w = |d: f64| gap_densities(d, g).unwrap().p_goe;
        assert!((half_line(m) - 1.0).abs() < 1e-6);
        assert!((half_line(w) - 1.0).abs() < 1e-6);
        assert!((half_line(|d| d * m(d)) - g).abs() < 1e-6 * g.max(1.0));
        assert!((half_line(|d| d * w(d)) - g).abs() < 1e-6 * g.max(1.0));
    }
    let z = gap_densities(0.0, 0.5).unwrap();
    assert_eq!((z.p_mbl, z.p_goe), (2.0, 0.0));
    assert!(matches!(gap_densities(0.1, 0.0), Err(Error::Parameter(_))));
}

#[test]
fn classical_efficiency_examples() {
    let c = classical_efficiencies(&ClassicalInputs {
        r: 2.0,
        gamma: 1.4,
        omega: 0.25,
        big_omega: 1.0,
        d_goe: 1.0,
        d_mbl: 0.25,
    })
    .unwrap();
    assert!((c.eta_otto - 0.242_142_1).abs() < 1e-6);
    assert_eq!(c.eta_qubit, 0.75);
    assert_eq!(c.w_qubit, 0.375);
    assert_eq!(c.eta_qho, c.eta_qubit);
    let bad = ClassicalInputs { r: 0.5, gamma: 1.4, omega: 1.0, big_omega: 2.0, d_goe: 1.0, d_mbl: 0.5 };
    assert!(classical_efficiencies(&bad).is_err());
}

#[test]
fn predicted_cycle_worked_example() {
    let p = predicted_cycle(&prediction(0.01, 1000.0, 0.0, 0.1)).unwrap();
    assert!((p.w_tot - 0.008_891_0).abs() < 1e-7, "{}", p.w_tot);
    assert_eq!(p.w_tot, p.q2_leading + p.q4);
    let zero = predicted_cycle(&prediction(0.0, f64::INFINITY, 0.0, 0.1)).unwrap();
    assert_eq!((zero.w_tot, zero.q2), (0.0, 0.0));
}

#[test]
fn efficiency_limit_at_extreme_baths() {
    for (wb, g) in [(0.01, 0.1), (0.003, 0.05), (1e-4, 2.0)] {
        let p = predicted_cycle(&prediction(wb, f64::INFINITY, 0.0, g)).unwrap();
        assert_eq!(p.eta, 1.0 - wb / (2.0 * g));
    }
}

#[test]
fn regime_flags() {
    let ok = predicted_cycle(&prediction(0.01, 1e4, 0.0, 0.1)).unwrap();
    assert!(ok.regime_ok, "{:?}", ok.violations);
    let hot = predicted_cycle(&prediction(0.01, f64::INFINITY, 1.0, 0.1)).unwrap();
    assert!(!hot.regime_ok);
    let wide = predicted_cycle(&prediction(0.05, f64::INFINITY, 0.0, 0.1)).unwrap();
    assert_eq!(wide.violations.len(), 1);
}

#[test]
fn cold_bath_probability_examples() {
    let p = cold_bath_probabilities(0.01, 1000.0, 0.1).unwrap();
    assert!((p.p_cold - 0.093_069).abs() < 1e-6);
    assert!((p.p_bar_cold - 0.006_931_5).abs() < 1e-7);
    let z = cold_bath_probabilities(0.01, f64::INFINITY, 0.1).unwrap();
    assert!((z.p_cold - 0.1).abs() < 1e-15);
    assert_eq!(z.p_bar_cold, 0.0);
}

#[test]
fn bath_probabilities_reproduce_cycle_work() {
    for (wb, beta_c, g) in [(0.01, 1000.0, 0.1), (0.02, 400.0, 0.2), (0.005, 5000.0, 0.05)] {
        let c = cold_bath_probabilities(wb, beta_c, g).unwrap();
        let p = predicted_cycle(&prediction(wb, beta_c, 0.0, g)).unwrap();
        let via = (c.p_cold - c.p_bar_cold) * g + p.q2_leading;
        assert!((via - p.w_tot).abs() < wb * wb / g);
    }
}

#[test]
fn fractional_landau_zener_example() {
    let m = DiabaticModel::new(1e-4, 1e-3, 0.01, 1.0, 12.0, 12);
    assert!((m.p_frac_lz(1e-2, 1e-2).unwrap() - 1.25e-3).abs() < 1e-15);
    assert!(matches!(m.p_frac_lz(0.0, 1e-2), Err(Error::Singularity(_))));
    let still = diabatic_predictions(&DiabaticModel::new(0.0, 1e-3, 0.01, 1.0, 12.0, 12), 1.0).unwrap();
    assert_eq!((still.w_diab_frac_lz, still.lz_correction), (0.0, 0.0));
    let fast = diabatic_predictions(&DiabaticModel::new(0.5, 1e-3, 0.01, 1.0, 12.0, 12), 1.0).unwrap();
    assert_eq!(fast.lz_correction, 0.005);
}

#[test]
fn localization_examples() {
    assert!((j_far(10.0, 10.0, 1.0) - 3.592e-4).abs() < 1e-7);
    for l in [1.0, 3.0, 7.5] {
        assert!((j_far(l, l, 2.0) / j_near(l, 2.0) - (-1f64).exp()).abs() < 1e-15);
    }
    assert_eq!(zeta_from_xi(f64::INFINITY), 1.0 / LN_2);
    assert!(matches!(xi_from_zeta(1.0 / LN_2), Err(Error::Domain(_))));
    assert!((xi_from_zeta(zeta_from_xi(3.0)).unwrap() - 3.0).abs() < 1e-12);
    assert!((xi_anderson(20.0).unwrap() - 1.0 / 20f64.ln()).abs() < 1e-15);
    let s = localization_scales(2.0, 2.0, 4.0, 1.0, 0.5).unwrap();
    assert!(s.xi_from_zeta.is_none() && s.xi_anderson.is_none());
}

#[test]
fn time_bound_examples() {
    let base = TimeBoundsInput {
        wb: 1e-3,
        delta_minus: 1e-3,
        eps: 1.0,
        mean_gap: 1e-2,
        xi_shallow: 2.0,
        xi_deep: 1.0,
        coupling: None,
    };
    let t = time_bounds(&base).unwrap();
    let seconds = t.tau_markov * mbl_otto::analytics::HBAR_EV_S;
    assert!(seconds > 1e-7 && seconds < 1e-5, "{seconds}");
    assert!(t.tau_high_order_deep <= t.tau_markov_deep);
    let far = time_bounds(&TimeBoundsInput { mean_gap: 1e12, ..base }).unwrap();
    assert!((far.g_max - 1.0).abs() < 1e-6);
}

#[test]
fn power_estimate_examples() {
    let p = power_estimate(&PowerInput::silicon_phosphorus()).unwrap();
    assert!(p.mean_gap_ev > 1e-3 * 3.0 && p.mean_gap_ev < 3e-2, "{}", p.mean_gap_ev);
    assert!(p.power_w > 1e-17 && p.power_w < 1e-15, "{}", p.power_w);
    assert!(p.power_density_w_per_m3 > 1e4 && p.power_density_w_per_m3 < 1e6);
    let off = power_estimate(&PowerInput { wb_fraction: 0.0, ..PowerInput::silicon_phosphorus() }).unwrap();
    assert_eq!(off.power_w, 0.0);
    assert!(PowerInput::preset("si-p").is_ok());
    assert!(PowerInput::preset("gaas").is_err());
}

#[test]
fn worst_case_examples() {
    let w = worst_case_analytic(0.1, 1.0).unwrap();
    assert!((w.p_worst - 1e-3).abs() < 1e-18 && (w.p_worst_tilde - 1e-2).abs() < 1e-17);
    let z = worst_case_analytic(0.0, 1.0).unwrap();
    assert_eq!((z.p_worst, z.p_worst_tilde), (0.0, 0.0));
    assert!(worst_case_analytic(1.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn worst_case_ratio(x in 0.0f64..0.99, g in 1e-3f64..10.0) {
        let w = worst_case_analytic(x * g, g).unwrap();
        if x > 0.0 {
            prop_assert!((w.p_worst / w.p_worst_tilde - x).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_bound_falls_with_bandwidth_and_repulsion(wb in 1e-4f64..1e-2, dm in 1e-4f64..1e-2, k in 1.01f64..10.0) {
        let base = TimeBoundsInput { wb, delta_minus: dm, eps: 1.0, mean_gap: 0.1, xi_shallow: 3.0, xi_deep: 1.0, coupling: None };
        let t0 = time_bounds(&base).unwrap();
        let t1 = time_bounds(&TimeBoundsInput { wb: wb * k, ..base }).unwrap();
        let t2 = time_bounds(&TimeBoundsInput { delta_minus: dm * k, ..base }).unwrap();
        prop_assert!(t1.tau_markov < t0.tau_markov);
        prop_assert!(t2.tau_markov < t0.tau_markov);
    }

    #[test]
    fn deep_bounds_ordered(xs in 0.0f64..20.0, xd in 0.1f64..20.0) {
        let t = time_bounds(&TimeBoundsInput { wb: 1e-3, delta_minus: 1e-3, eps: 1.0, mean_gap: 0.1, xi_shallow: xs.max(1e-3), xi_deep: xd, coupling: None }).unwrap();
        prop_assert!(t.tau_high_order_deep <= t.tau_markov_deep);
    }

    #[test]
    fn prediction_sums(wb in 0.0f64..0.05, beta_c in 10.0f64..1e5, g in 0.05f64..1.0) {
        let p = predicted_cycle(&prediction(wb, beta_c, 0.0, g)).unwrap();
        prop_assert!((p.w_tot - (p.q2_leading + p.q4)).abs() <= 1e-15 * p.q4.abs().max(1.0));
        let leading = wb - 2.0 * LN_2 / beta_c + 4.0 * LN_2 * wb / (beta_c * g);
        prop_assert!((p.w_tot - leading).abs() < 1e-12);
    }
}
