//! Comparison engines: the equal-disorder engine (two localized realizations
//! at the same strength) and the unrescaled bandwidth engine, with
//! worst-case and spread statistics against the standard engine.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::basis::{DisorderRealization, HamiltonianParams, SectorBasis, SeedTag};
use crate::cycle::{CycleEndpoints, CycleParams, RealizationPair, Tuning};
use crate::ensemble::{self, EngineVariant, Purpose, RunConfig};
use crate::error::{Error, Result};
use crate::stats::{self, Estimate, LineFit};

/// Fewest samples per engine accepted by [`compare_worst_case`].
pub const MIN_COMPARISON_SAMPLES: usize = 10_000;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Per-trial W_tot of the engine cycling between `a` and `b`, both at h_mbl.
pub fn run_equal_disorder<R: rand::Rng + ?Sized>(
    basis: &SectorBasis,
    a: &DisorderRealization,
    b: &DisorderRealization,
    hamiltonian: &HamiltonianParams,
    params: &CycleParams,
    n_trials: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    CycleEndpoints::build(basis, RealizationPair::Distinct(a, b), hamiltonian, false)?.sample_trials(params, n_trials, rng)
}

/// Trial samples over the ensemble described by `config`: `trials` per
/// realization, concatenated in realization order. Returns the samples and
/// the ensemble mean gap used to resolve W_b.
pub fn sample_ensemble_trials(config: &RunConfig, trials: usize) -> Result<(Vec<f64>, f64)> {
    config.validate()?;
    if config.sweep.is_some() {
        return Err(Error::param("trial sampling runs a single grid point"));
    }
    let basis = SectorBasis::new(config.sites)?;
    let mean_gap = ensemble::ensemble_mean_gap(config)?;
    let params = config.cycle.resolve(mean_gap);
    if params.tuning != Tuning::Adiabatic {
        return Err(Error::param("trial sampling needs adiabatic tuning"));
    }
    let ham = HamiltonianParams {
        energy_unit: config.eps,
        alpha: 0.0,
        rescale: config.variant != EngineVariant::Bandwidth,
    };
    let per: Vec<Vec<f64>> = (0..config.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let a = ensemble::realization(config.master_seed, k, config.sites, config.h_eth, config.h_mbl);
            let b;
            let pair = if config.variant == EngineVariant::EqualDisorder {
                b = ensemble::partner_realization(config.master_seed, k, config.sites, config.h_eth, config.h_mbl);
                RealizationPair::Distinct(&a, &b)
            } else {
                RealizationPair::Same(&a)
            };
            let mut rng = ensemble::stream_rng(config.master_seed, k, Purpose::Trials);
            CycleEndpoints::build(&basis, pair, &ham, false)
                .and_then(|e| e.sample_trials(&params, trials, &mut rng))
                .map_err(|e| e.with_tag(SeedTag { master_seed: config.master_seed, index: k }))
        })
        .collect::<Result<_>>()?;
    Ok((per.concat(), mean_gap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSamples {
    pub label: String,
    pub samples: usize,
    pub w_tot: Estimate,
    pub variance: f64,
    /// Fraction of trials with W_tot < 0.
    pub p_worst: f64,
    /// 95% Wilson interval of `p_worst`.
    pub p_worst_interval: (f64, f64),
}

impl EngineSamples {
    fn new(label: &str, w: &[f64]) -> Result<Self> {
        let worst = w.iter().filter(|&&x| x < 0.0).count();
        Ok(Self {
            label: label.to_string(),
            samples: w.len(),
            w_tot: Estimate::of(w),
            variance: stats::sample_variance(w).ok_or_else(|| Error::Statistics("need two samples".into()))?,
            p_worst: worst as f64 / w.len() as f64,
            p_worst_interval: stats::wilson_interval(worst, w.len(), stats::Z95),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub standard: EngineSamples,
    pub tilde: EngineSamples,
    /// p_worst(standard) < p_worst(tilde).
    pub ordered: bool,
    /// The two Wilson intervals are disjoint.
    pub intervals_disjoint: bool,
    /// Share of bootstrap resamples with var(standard) < var(tilde).
    pub variance_confidence: f64,
}

/// Contrasts the standard engine's trial samples with the equal-disorder engine's.
pub fn compare_worst_case(standard: &[f64], tilde: &[f64], bootstrap_seed: u64) -> Result<ComparisonReport> {
    if standard.len() < MIN_COMPARISON_SAMPLES || tilde.len() < MIN_COMPARISON_SAMPLES {
        return Err(Error::Statistics(format!(
            "need at least {MIN_COMPARISON_SAMPLES} samples per engine, got {} and {}",
            standard.len(),
            tilde.len()
        )));
    }
    let s = EngineSamples::new("standard", standard)?;
    let t = EngineSamples::new("equal_disorder", tilde)?;
    let mut rng = ensemble::stream_rng(bootstrap_seed, 0, Purpose::Trials);
    let variance_confidence = stats::bootstrap_variance_order(standard, tilde, BOOTSTRAP_RESAMPLES, &mut rng);
    Ok(ComparisonReport {
        ordered: s.p_worst < t.p_worst,
        intervals_disjoint: s.p_worst_interval.1 < t.p_worst_interval.0 || t.p_worst_interval.1 < s.p_worst_interval.0,
        variance_confidence,
        standard: s,
        tilde: t,
    })
}

/// Log-log slope of p_worst against W_b / <delta>; points with p_worst = 0 are dropped.
pub fn worst_case_slope(wb_fractions: &[f64], p_worst: &[f64]) -> Result<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = wb_fractions
        .iter()
        .zip(p_worst)
        .filter(|(w, p)| **w > 0.0 && **p > 0.0)
        .map(|(w, p)| (w.ln(), p.ln()))
        .unzip();
    stats::linear_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthEstimate {
    pub q2: f64,
    pub q4: f64,
    pub w_tot: f64,
    /// Standard-normal quantile of the hop fraction (about -2 at 2%).
    pub z: f64,
}

/// Scale estimate for a macroscopic engine whose bandwidth is not held fixed:
/// Q2 ~ -N, Q4 ~ sqrt(N), so W_tot ~ sqrt(N) - N.
pub fn bandwidth_engine_estimate(sites_macro: u64, hop_fraction: f64) -> Result<BandwidthEstimate> {
    if sites_macro < 1 {
        return Err(Error::param("need at least one site"));
    }
    if !(0.0..=1.0).contains(&hop_fraction) {
        return Err(Error::param("hop fraction must lie in [0, 1]"));
    }
    let n = sites_macro as f64;
    let normal = Normal::standard();
    let z = normal.inverse_cdf(hop_fraction);
    let (q2, q4) = (-n, n.sqrt());
    Ok(BandwidthEstimate { q2, q4, w_tot: q2 + q4, z })
}
