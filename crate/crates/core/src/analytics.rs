//! Closed-form predictions, bounds and order-of-magnitude estimates.
//!
//! hbar = k_B = 1 except in [`power_estimate`], which reports SI units.
//! Functions documented as scale estimates carry "~" semantics: only their
//! order of magnitude and monotonic trends are meaningful.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV s.
pub const HBAR_EV_S: f64 = 6.582e-16;
/// Joules per electronvolt.
pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;
/// Ratio below which a "much less than" regime condition counts as met.
pub const REGIME_RATIO: f64 = 0.3;

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {x}")))
    }
}

/// 1 / beta, with an infinite beta giving zero temperature.
pub fn temperature(beta: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        1.0 / beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapDensities {
    pub p_mbl: f64,
    pub p_goe: f64,
}

/// Poisson (localized) and Wigner-surmise (thermal) gap densities with mean `mean_gap`.
pub fn gap_densities(delta: f64, mean_gap: f64) -> Result<GapDensities> {
    positive("mean gap", mean_gap)?;
    if !(delta >= 0.0) {
        return Err(Error::param("gap must be >= 0"));
    }
    let x = delta / mean_gap;
    Ok(GapDensities {
        p_mbl: (-x).exp() / mean_gap,
        p_goe: PI / 2.0 * x / mean_gap * (-PI * x * x / 4.0).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInputs {
    /// Compression ratio.
    pub r: f64,
    /// Heat-capacity ratio.
    pub gamma: f64,
    pub omega: f64,
    pub big_omega: f64,
    pub d_goe: f64,
    pub d_mbl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalEfficiencies {
    pub eta_otto: f64,
    pub eta_qho: f64,
    pub eta_qubit: f64,
    pub w_qubit: f64,
}

pub fn classical_efficiencies(i: &ClassicalInputs) -> Result<ClassicalEfficiencies> {
    if !(i.r > 1.0 && i.gamma > 1.0) {
        return Err(Error::param("need r > 1 and gamma > 1"));
    }
    if !(i.big_omega > i.omega && i.omega > 0.0) {
        return Err(Error::param("need Omega > omega > 0"));
    }
    if !(i.d_goe > i.d_mbl && i.d_mbl > 0.0) {
        return Err(Error::param("need d_goe > d_mbl > 0"));
    }
    Ok(ClassicalEfficiencies {
        eta_otto: 1.0 - i.r.powf(1.0 - i.gamma),
        eta_qho: 1.0 - i.omega / i.big_omega,
        eta_qubit: 1.0 - i.d_mbl / i.d_goe,
        w_qubit: (i.d_goe - i.d_mbl) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInput {
    pub wb: f64,
    /// May be infinite.
    #[serde(with = "crate::beta")]
    pub beta_c: f64,
    pub beta_h: f64,
    pub mean_gap: f64,
    pub sites: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnginePrediction {
    /// Cold-stroke heat including the cold-temperature term and the hot-bath factor.
    pub q2: f64,
    /// Leading cold-stroke heat, -W_b^2 / (2 <delta>).
    pub q2_leading: f64,
    pub q4: f64,
    /// q2_leading + q4; reduces to W_b - 2 ln2 T_C + 4 ln2 W_b T_C / <delta>.
    pub w_tot: f64,
    /// 1 - phi'
    pub eta: f64,
    pub phi_prime: f64,
    /// 1 - (W_b / 2<delta>) exp(-N (beta_H eps)^2 / 4)
    pub eta_hot_corrected: f64,
    pub regime_ok: bool,
    pub violations: Vec<String>,
}

/// Average heat, work and efficiency of the mesoscale engine for small W_b and cold baths.
pub fn predicted_cycle(p: &PredictionInput) -> Result<EnginePrediction> {
    if !(p.wb >= 0.0) {
        return Err(Error::param("W_b must be >= 0"));
    }
    positive("mean gap", p.mean_gap)?;
    if !(p.beta_c > 0.0) || !(p.beta_h >= 0.0) {
        return Err(Error::param("need beta_c > 0 and beta_h >= 0"));
    }
    let (wb, d) = (p.wb, p.mean_gap);
    let tc = temperature(p.beta_c);
    let n = p.sites as f64;
    let hot = (-n * (p.beta_h * p.eps).powi(2) / 4.0).exp();
    let q2_leading = -wb * wb / (2.0 * d);
    let q2 = (q2_leading + PI * PI / 6.0 * tc * tc / d) * hot;
    let q4 = wb - 2.0 * LN_2 * tc + wb * wb / (2.0 * d) + 4.0 * LN_2 * wb * tc / d;
    let phi_prime = wb / (2.0 * d) + LN_2 * tc / d - 2.0 * LN_2 * (wb / d) * (tc / d);
    let mut violations = Vec::new();
    if wb > 0.0 && tc / wb >= REGIME_RATIO {
        violations.push(format!("T_C / W_b = {} is not << 1", tc / wb));
    }
    if wb == 0.0 && tc > 0.0 {
        violations.push("T_C > 0 with W_b = 0".to_string());
    }
    if wb / d >= REGIME_RATIO {
        violations.push(format!("W_b / <delta> = {} is not << 1", wb / d));
    }
    let hot_ratio = n.sqrt() * p.beta_h * p.eps;
    if hot_ratio >= REGIME_RATIO {
        violations.push(format!("sqrt(N) beta_H eps = {hot_ratio} is not << 1"));
    }
    Ok(EnginePrediction {
        q2,
        q2_leading,
        q4,
        w_tot: q2_leading + q4,
        eta: 1.0 - phi_prime,
        phi_prime,
        eta_hot_corrected: 1.0 - wb / (2.0 * d) * hot,
        regime_ok: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColdBathProbabilities {
    pub p_cold: f64,
    pub p_bar_cold: f64,
}

/// Probabilities that the cold bath relaxes the engine down, or excites it up, across a gap.
pub fn cold_bath_probabilities(wb: f64, beta_c: f64, mean_gap: f64) -> Result<ColdBathProbabilities> {
    positive("W_b", wb)?;
    positive("mean gap", mean_gap)?;
    let tc = temperature(beta_c);
    Ok(ColdBathProbabilities {
        p_cold: (wb - tc * LN_2) / mean_gap,
        p_bar_cold: tc * LN_2 / mean_gap,
    })
}

/// Real-valued C(n, n/2) for chains too long for integer arithmetic.
fn half_filling_dim(sites: usize) -> f64 {
    let k = sites / 2;
    (0..k).fold(1.0, |acc, i| acc * (sites - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiabaticModel {
    pub v: f64,
    pub delta_minus: f64,
    pub wb: f64,
    /// Fraction of small gaps tuned through adiabatically.
    pub theta: f64,
    pub xi_deep: f64,
    pub xi_shallow: f64,
    pub sites: usize,
}

impl DiabaticModel {
    pub fn new(v: f64, delta_minus: f64, wb: f64, xi_deep: f64, xi_shallow: f64, sites: usize) -> Self {
        Self { v, delta_minus, wb, theta: 0.5, xi_deep, xi_shallow, sites }
    }

    fn validate(&self) -> Result<()> {
        if !(self.v >= 0.0) {
            return Err(Error::param("speed must be >= 0"));
        }
        positive("delta_minus", self.delta_minus)?;
        positive("W_b", self.wb)?;
        positive("xi_deep", self.xi_deep)?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::param("theta must lie in [0, 1]"));
        }
        if !(self.xi_deep < self.xi_shallow) {
            return Err(Error::param("need xi_deep < xi_shallow"));
        }
        if self.sites < 2 {
            return Err(Error::param("need at least two sites"));
        }
        Ok(())
    }

    /// Probability of a fractional Landau-Zener excitation across a gap that
    /// opens from `delta` to `big_delta` during the reverse stroke.
    pub fn p_frac_lz(&self, delta: f64, big_delta: f64) -> Result<f64> {
        if delta == 0.0 || big_delta == 0.0 {
            return Err(Error::Singularity("fractional Landau-Zener probability diverges at zero gap".into()));
        }
        Ok((self.v * self.delta_minus).powi(2) / 16.0 * (delta.powi(-6) + big_delta.powi(-6)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiabaticPredictions {
    /// ~ (v delta_minus)^(1/3)
    pub w_diab_frac_lz: f64,
    /// W_b^3 / delta_minus
    pub v_max_frac_lz: f64,
    /// Length over which the tuning can propagate disturbances; infinite at v = 0.
    pub l_v: f64,
    /// (1 - theta) W_b once l_v < sites, else 0.
    pub lz_correction: f64,
    /// <delta>^2
    pub v_max_apt: f64,
    /// Square of the repulsion scale of an (L+1)-site chain.
    pub v_min_communication: f64,
}

pub fn diabatic_predictions(m: &DiabaticModel, eps: f64) -> Result<DiabaticPredictions> {
    m.validate()?;
    positive("eps", eps)?;
    let l_v = if m.v == 0.0 {
        f64::INFINITY
    } else {
        (eps * eps / m.v).ln() / (2.0 * (LN_2 + 1.0 / m.xi_deep))
    };
    let mean_gap = 2.0 * (PI * m.sites as f64).sqrt() * eps / half_filling_dim(m.sites);
    let l1 = (m.sites + 1) as f64;
    Ok(DiabaticPredictions {
        w_diab_frac_lz: (m.v * m.delta_minus).cbrt(),
        v_max_frac_lz: m.wb.powi(3) / m.delta_minus,
        l_v,
        lz_correction: if m.v > 0.0 && l_v < m.sites as f64 { (1.0 - m.theta) * m.wb } else { 0.0 },
        v_max_apt: mean_gap * mean_gap,
        v_min_communication: eps * eps * 2f64.powf(-2.0 * l1) * (-2.0 * l1 / m.xi_shallow).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationScales {
    /// Matrix element across L >> xi.
    pub j_far: f64,
    /// Matrix element across L <= xi.
    pub j_near: f64,
    pub xi_from_zeta: Option<f64>,
    pub zeta_from_xi: f64,
    pub xi_anderson: Option<f64>,
}

pub fn j_far(l: f64, xi: f64, eps: f64) -> f64 {
    eps * (-l / xi).exp() * 2f64.powf(-l)
}

pub fn j_near(l: f64, eps: f64) -> f64 {
    eps * 2f64.powf(-l)
}

/// MBL localization length from the l-bit decay length; needs zeta < 1/ln 2.
pub fn xi_from_zeta(zeta: f64) -> Result<f64> {
    positive("zeta", zeta)?;
    if zeta >= 1.0 / LN_2 {
        return Err(Error::Domain(format!("zeta = {zeta} must be below 1/ln 2 for a stable localized phase")));
    }
    Ok(1.0 / (1.0 / zeta - LN_2))
}

pub fn zeta_from_xi(xi: f64) -> f64 {
    1.0 / (1.0 / xi + LN_2)
}

/// Single-particle localization length 1 / ln h, defined for h > 1.
pub fn xi_anderson(h: f64) -> Result<f64> {
    if !(h > 1.0) {
        return Err(Error::Domain(format!("Anderson length needs h > 1, got {h}")));
    }
    Ok(1.0 / h.ln())
}

pub fn localization_scales(xi: f64, zeta: f64, l: f64, eps: f64, h: f64) -> Result<LocalizationScales> {
    positive("xi", xi)?;
    positive("L", l)?;
    positive("eps", eps)?;
    Ok(LocalizationScales {
        j_far: j_far(l, xi, eps),
        j_near: j_near(l, eps),
        xi_from_zeta: xi_from_zeta(zeta).ok(),
        zeta_from_xi: zeta_from_xi(xi),
        xi_anderson: xi_anderson(h).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBoundsInput {
    pub wb: f64,
    pub delta_minus: f64,
    pub eps: f64,
    pub mean_gap: f64,
    pub xi_shallow: f64,
    pub xi_deep: f64,
    /// System-bath coupling for `tau_th`; the Markov edge g = W_b when absent.
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBounds {
    /// W_b (eps / (g delta_minus))^2
    pub tau_th: f64,
    /// eps^2 / (W_b delta_minus^2)
    pub tau_markov: f64,
    /// Length over which higher-order processes must rearrange energy.
    pub high_order_length: f64,
    /// eps (delta_minus / eps)^(1/(L-1))
    pub g_max: f64,
    /// (W_b / delta_minus^2) (eps / delta_minus)^(1/(L-1))
    pub tau_high_order: f64,
    /// (10 / eps) e^{2 xi_> / xi_<} 2^{3 xi_>}
    pub tau_markov_deep: f64,
    /// (1 / (10 eps)) e^{2 xi_> / xi_<} 2^{2 xi_>}
    pub tau_high_order_deep: f64,
}

/// Cold-thermalization time scales. All are scale estimates.
pub fn time_bounds(i: &TimeBoundsInput) -> Result<TimeBounds> {
    positive("W_b", i.wb)?;
    positive("delta_minus", i.delta_minus)?;
    positive("eps", i.eps)?;
    positive("mean gap", i.mean_gap)?;
    positive("xi_shallow", i.xi_shallow)?;
    positive("xi_deep", i.xi_deep)?;
    let g = i.coupling.unwrap_or(i.wb);
    positive("coupling", g)?;
    let l = (i.mean_gap / i.wb).max(i.xi_shallow);
    let expo = if l.is_infinite() { 0.0 } else { 1.0 / (l - 1.0) };
    if !(expo >= 0.0 && expo.is_finite()) {
        return Err(Error::param(format!("high-order length {l} must exceed 1")));
    }
    let shared = (2.0 * i.xi_shallow / i.xi_deep).exp();
    Ok(TimeBounds {
        tau_th: i.wb * (i.eps / (g * i.delta_minus)).powi(2),
        tau_markov: i.eps * i.eps / (i.wb * i.delta_minus * i.delta_minus),
        high_order_length: l,
        g_max: i.eps * (i.delta_minus / i.eps).powf(expo),
        tau_high_order: i.wb / (i.delta_minus * i.delta_minus) * (i.eps / i.delta_minus).powf(expo),
        tau_markov_deep: 10.0 / i.eps * shared * 2f64.powf(3.0 * i.xi_shallow),
        tau_high_order_deep: 1.0 / (10.0 * i.eps) * shared * 2f64.powf(2.0 * i.xi_shallow),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerInput {
    /// Per-site energy scale in eV.
    pub eps_ev: f64,
    pub subengine_sites: usize,
    /// Distance between neighbouring subengines in nm.
    pub pitch_nm: f64,
    pub wb_fraction: f64,
}

impl PowerInput {
    /// Phosphorus donors in silicon.
    pub fn silicon_phosphorus() -> Self {
        Self { eps_ev: 1.0, subengine_sites: 10, pitch_nm: 100.0, wb_fraction: 0.1 }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "si-p" => Ok(Self::silicon_phosphorus()),
            other => Err(Error::param(format!("unknown preset {other:?} (known: si-p)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerEstimate {
    pub mean_gap_ev: f64,
    pub wb_ev: f64,
    pub tau_cycle_s: f64,
    pub power_w: f64,
    pub power_density_w_per_m3: f64,
}

/// Order-of-magnitude power of one subengine and of a dense array of them.
pub fn power_estimate(p: &PowerInput) -> Result<PowerEstimate> {
    positive("eps", p.eps_ev)?;
    positive("pitch", p.pitch_nm)?;
    if p.subengine_sites < 2 || p.subengine_sites % 2 != 0 {
        return Err(Error::param("subengine sites must be even and >= 2"));
    }
    if !(p.wb_fraction >= 0.0) {
        return Err(Error::param("W_b fraction must be >= 0"));
    }
    let mean_gap = p.eps_ev * (p.subengine_sites as f64).sqrt() / half_filling_dim(p.subengine_sites);
    let wb = p.wb_fraction * mean_gap;
    let tau = HBAR_EV_S * p.eps_ev * p.eps_ev / wb.powi(3);
    let power = if wb == 0.0 { 0.0 } else { wb / tau * JOULE_PER_EV };
    let volume = (p.pitch_nm * 1e-9).powi(3);
    Ok(PowerEstimate {
        mean_gap_ev: mean_gap,
        wb_ev: wb,
        tau_cycle_s: tau,
        power_w: power,
        power_density_w_per_m3: power / volume,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub p_worst: f64,
    pub p_worst_tilde: f64,
}

/// Scale estimates of the negative-work probability for the standard engine
/// and for the engine tuned between two localized realizations.
pub fn worst_case_analytic(wb: f64, mean_gap: f64) -> Result<WorstCase> {
    positive("mean gap", mean_gap)?;
    if !(wb >= 0.0 && wb < mean_gap) {
        return Err(Error::param("need 0 <= W_b < <delta>"));
    }
    let x = wb / mean_gap;
    Ok(WorstCase { p_worst: x.powi(3), p_worst_tilde: x.powi(2) })
}
