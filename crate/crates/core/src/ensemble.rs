//! Seeded disorder ensembles, parallel cycle runs, disorder averages and sweeps.
//!
//! Realization `k` draws from ChaCha20 stream `4k + purpose` of the master
//! seed, so every realization is reproducible on its own and results do not
//! depend on scheduling. Results are merged in realization order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{DisorderRealization, HamiltonianParams, HamiltonianTerms, SectorBasis, SeedTag};
use crate::cycle::{CycleEndpoints, CycleParams, CycleRecord, RealizationPair, Schedule, Tuning};
use crate::error::{Error, Result};
use crate::spectra::{self, KsDistances, SpacingHistogram};
use crate::stats::{self, Estimate};

pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), stream 4*realization + purpose";
/// Fraction of each spectrum used for spacing statistics.
pub const SPECTRAL_WINDOW: f64 = 0.5;
/// Logarithmic bins used by the turnover estimator.
pub const DELTA_MINUS_BINS: usize = 24;
/// Largest tolerated share of failed realizations.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// What a realization's random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Fields = 0,
    PartnerFields = 1,
    Trials = 2,
}

pub fn stream_rng(master_seed: u64, index: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(4 * index + purpose as u64);
    rng
}

fn draw_fields(master_seed: u64, index: u64, purpose: Purpose, sites: usize) -> Vec<f64> {
    let mut rng = stream_rng(master_seed, index, purpose);
    (0..sites).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Realization `index` of the ensemble keyed by `master_seed`.
pub fn realization(master_seed: u64, index: u64, sites: usize, h_eth: f64, h_mbl: f64) -> DisorderRealization {
    DisorderRealization {
        fields: draw_fields(master_seed, index, Purpose::Fields, sites),
        h_eth,
        h_mbl,
        seed_tag: Some(SeedTag { master_seed, index }),
    }
}

/// Independent second realization paired with `index`.
pub fn partner_realization(master_seed: u64, index: u64, sites: usize, h_eth: f64, h_mbl: f64) -> DisorderRealization {
    DisorderRealization {
        fields: draw_fields(master_seed, index, Purpose::PartnerFields, sites),
        h_eth,
        h_mbl,
        seed_tag: Some(SeedTag { master_seed, index }),
    }
}

pub fn make_realizations(master_seed: u64, n: usize, sites: usize, h_eth: f64, h_mbl: f64) -> Vec<DisorderRealization> {
    (0..n as u64).map(|k| realization(master_seed, k, sites, h_eth, h_mbl)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineVariant {
    /// One realization tuned between h_eth and h_mbl.
    Standard,
    /// Two independent realizations, both at h_mbl.
    EqualDisorder,
    /// Standard tuning without the bandwidth-fixing rescale.
    Bandwidth,
}

impl EngineVariant {
    fn hamiltonian(&self, eps: f64) -> HamiltonianParams {
        HamiltonianParams { energy_unit: eps, alpha: 0.0, rescale: *self != EngineVariant::Bandwidth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSettings {
    /// Fraction of the mean gap, or an energy when `wb_absolute`.
    pub wb: f64,
    #[serde(default)]
    pub wb_absolute: bool,
    #[serde(with = "crate::beta")]
    pub beta_c: f64,
    pub beta_h: f64,
    /// Zero selects adiabatic tuning.
    pub speed: f64,
    /// Time step in units of the mean gap.
    pub dt_factor: f64,
}

impl Default for CycleSettings {
    fn default() -> Self {
        Self { wb: 1.0 / 16.0, wb_absolute: false, beta_c: f64::INFINITY, beta_h: 0.0, speed: 0.0, dt_factor: 0.405 }
    }
}

impl CycleSettings {
    /// Absolute cycle parameters given the ensemble mean gap.
    pub fn resolve(&self, mean_gap: f64) -> CycleParams {
        let wb = if self.wb_absolute { self.wb } else { self.wb * mean_gap };
        let tuning = if self.speed == 0.0 {
            Tuning::Adiabatic
        } else {
            Tuning::Diabatic { speed: self.speed, dt: self.dt_factor * mean_gap }
        };
        CycleParams { wb, beta_c: self.beta_c, beta_h: self.beta_h, tuning }
    }

    fn validate(&self) -> Result<()> {
        if !(self.wb >= 0.0 && self.wb.is_finite()) {
            return Err(Error::param("wb must be finite and >= 0"));
        }
        if !(self.beta_c >= 0.0) || !(self.beta_h >= 0.0 && self.beta_h.is_finite()) {
            return Err(Error::param("need beta_c >= 0 (inf allowed) and finite beta_h >= 0"));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::param("speed must be finite and >= 0"));
        }
        if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
            return Err(Error::param("dt factor must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Wb,
    BetaC,
    BetaH,
    Speed,
}

impl std::str::FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wb" => Ok(Self::Wb),
            "beta_c" | "beta-c" => Ok(Self::BetaC),
            "beta_h" | "beta-h" => Ok(Self::BetaH),
            "speed" | "v" => Ok(Self::Speed),
            other => Err(format!("unknown sweep parameter {other:?} (wb, beta_c, beta_h, speed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    #[serde(with = "crate::beta::many")]
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sites: usize,
    pub h_eth: f64,
    pub h_mbl: f64,
    pub realizations: usize,
    pub master_seed: u64,
    #[serde(default = "unit")]
    pub eps: f64,
    pub cycle: CycleSettings,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub variant: EngineVariant,
}

fn unit() -> f64 {
    1.0
}

impl RunConfig {
    pub fn new(sites: usize, realizations: usize, master_seed: u64) -> Self {
        Self {
            sites,
            h_eth: 2.0,
            h_mbl: 20.0,
            realizations,
            master_seed,
            eps: 1.0,
            cycle: CycleSettings::default(),
            sweep: None,
            variant: EngineVariant::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SectorBasis::new(self.sites)?;
        if self.realizations < 1 {
            return Err(Error::param("need at least one realization"));
        }
        if !(self.h_eth >= 0.0 && self.h_mbl >= 0.0) {
            return Err(Error::param("disorder strengths must be >= 0"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::param("eps must be positive"));
        }
        self.cycle.validate()?;
        for s in self.settings() {
            s.validate()?;
            if s.speed > 0.0 && self.variant == EngineVariant::EqualDisorder {
                return Err(Error::param("the equal-disorder engine supports adiabatic tuning only"));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.grid.is_empty() {
                return Err(Error::param("sweep grid is empty"));
            }
        }
        Ok(())
    }

    /// Cycle settings of every grid point (one point without a sweep).
    pub fn settings(&self) -> Vec<CycleSettings> {
        match &self.sweep {
            None => vec![self.cycle],
            Some(sw) => sw
                .grid
                .iter()
                .map(|&x| {
                    let mut s = self.cycle;
                    match sw.param {
                        SweepParam::Wb => s.wb = x,
                        SweepParam::BetaC => s.beta_c = x,
                        SweepParam::BetaH => s.beta_h = x,
                        SweepParam::Speed => s.speed = x,
                    }
                    s
                })
                .collect(),
        }
    }

    fn pair(&self, index: u64) -> (DisorderRealization, Option<DisorderRealization>) {
        let a = realization(self.master_seed, index, self.sites, self.h_eth, self.h_mbl);
        match self.variant {
            EngineVariant::EqualDisorder => {
                let b = partner_realization(self.master_seed, index, self.sites, self.h_eth, self.h_mbl);
                (a, Some(b))
            }
            _ => (a, None),
        }
    }
}

/// Endpoint Hamiltonians' spectral standard deviations, from traces alone.
fn endpoint_std_devs(config: &RunConfig, basis: &SectorBasis, index: u64) -> Result<[f64; 2]> {
    let ham = config.variant.hamiltonian(config.eps);
    let (a, b) = config.pair(index);
    let std_of = |dr: &DisorderRealization, alpha: f64| -> Result<f64> {
        let t = HamiltonianTerms::new(basis, &dr.fields)?;
        let (c, h) = t.coefficients(dr, &ham.at(alpha))?;
        let (t1, t2) = t.trace_moments(c, h);
        let n = t.dim() as f64;
        Ok((t2 / n - (t1 / n).powi(2)).max(0.0).sqrt())
    };
    match &b {
        None => Ok([std_of(&a, 0.0)?, std_of(&a, 1.0)?]),
        Some(b) => Ok([std_of(&a, 1.0)?, std_of(b, 1.0)?]),
    }
}

/// Mean gap of the ensemble from the disorder-averaged endpoint spectral width.
pub fn ensemble_mean_gap(config: &RunConfig) -> Result<f64> {
    let basis = SectorBasis::new(config.sites)?;
    let sds = (0..config.realizations as u64)
        .into_par_iter()
        .map(|k| endpoint_std_devs(config, &basis, k))
        .collect::<Result<Vec<_>>>()?;
    let sigma = sds.iter().flatten().sum::<f64>() / (2 * sds.len()) as f64;
    Ok(spectra::mean_gap_from_std(sigma, basis.dim()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRealization {
    pub index: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub wb: f64,
    #[serde(with = "crate::beta")]
    pub beta_c: f64,
    pub beta_h: f64,
    pub speed: f64,
    pub realizations: usize,
    pub w1: Estimate,
    pub q2: Estimate,
    pub w3: Estimate,
    pub q4: Estimate,
    pub w_tot: Estimate,
    /// <W_tot> / <Q4>; absent when <Q4> <= 0.
    pub eta: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub software: String,
    pub version: String,
    pub rng: String,
    pub master_seed: u64,
    pub dim: usize,
    pub mean_gap: f64,
    pub delta_minus: Option<f64>,
    pub spectral_window: f64,
    pub excluded: Vec<ExcludedRealization>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub config: RunConfig,
    pub points: Vec<GridPoint>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub summary: EnsembleSummary,
    /// Per grid point, successful realizations in index order.
    pub records: Vec<Vec<CycleRecord>>,
}

struct RealizationOutcome {
    records: Vec<CycleRecord>,
    spacings: Vec<f64>,
}

fn run_realization(
    config: &RunConfig,
    basis: &SectorBasis,
    params: &[CycleParams],
    index: u64,
) -> Result<RealizationOutcome> {
    let ham = config.variant.hamiltonian(config.eps);
    let with_vectors = params.iter().any(|p| matches!(p.tuning, Tuning::Diabatic { .. }));
    let (a, b) = config.pair(index);
    let pair = match &b {
        None => RealizationPair::Same(&a),
        Some(b) => RealizationPair::Distinct(&a, b),
    };
    let tag = SeedTag { master_seed: config.master_seed, index };
    let endpoints = CycleEndpoints::build(basis, pair, &ham, with_vectors).map_err(|e| e.with_tag(tag))?;
    let records = params
        .iter()
        .map(|p| endpoints.run(p, index))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_tag(tag))?;
    let spacings = spectra::central_spacings(&endpoints.end.energies, SPECTRAL_WINDOW)?;
    Ok(RealizationOutcome { records, spacings })
}

fn summarize(records: &[CycleRecord], p: &CycleParams) -> GridPoint {
    let col = |f: fn(&CycleRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let (w_tot, q4) = (col(|r| r.w_tot), col(|r| r.q4));
    let speed = match p.tuning {
        Tuning::Adiabatic => 0.0,
        Tuning::Diabatic { speed, .. } => speed,
    };
    GridPoint {
        wb: p.wb,
        beta_c: p.beta_c,
        beta_h: p.beta_h,
        speed,
        realizations: records.len(),
        w1: Estimate::of(&col(|r| r.w1)),
        q2: Estimate::of(&col(|r| r.q2)),
        w3: Estimate::of(&col(|r| r.w3)),
        q4: Estimate::of(&q4),
        w_tot: Estimate::of(&w_tot),
        eta: stats::ratio_of_means(&w_tot, &q4),
    }
}

/// Runs every realization at every grid point on the current rayon pool.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleRun> {
    config.validate()?;
    let basis = SectorBasis::new(config.sites)?;
    let mean_gap = ensemble_mean_gap(config)?;
    let params: Vec<CycleParams> = config.settings().iter().map(|s| s.resolve(mean_gap)).collect();
    let probe = DisorderRealization { fields: vec![], h_eth: config.h_eth, h_mbl: config.h_mbl, seed_tag: None };
    for p in &params {
        if let Tuning::Diabatic { speed, dt } = p.tuning {
            Schedule::new(&probe, config.eps, speed, dt)?;
        }
    }
    let outcomes: Vec<Result<RealizationOutcome>> = (0..config.realizations as u64)
        .into_par_iter()
        .map(|k| run_realization(config, &basis, &params, k))
        .collect();

    let mut excluded = Vec::new();
    let mut per_point: Vec<Vec<CycleRecord>> = vec![Vec::with_capacity(config.realizations); params.len()];
    let mut spacings = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                for (slot, r) in per_point.iter_mut().zip(o.records) {
                    slot.push(r);
                }
                spacings.extend(o.spacings);
            }
            Err(e) => excluded.push(ExcludedRealization { index: k as u64, error: e.to_string() }),
        }
    }
    if excluded.len() as f64 > MAX_FAILURE_FRACTION * config.realizations as f64 {
        return Err(Error::FailureThreshold { failed: excluded.len(), total: config.realizations });
    }
    let delta_minus = if spacings.len() >= spectra::MIN_DELTA_MINUS_SPACINGS {
        Some(spectra::estimate_delta_minus_with_reference(&spacings, mean_gap, DELTA_MINUS_BINS)?)
    } else {
        None
    };
    let points = per_point.iter().zip(&params).map(|(r, p)| summarize(r, p)).collect();
    Ok(EnsembleRun {
        summary: EnsembleSummary {
            config: config.clone(),
            points,
            metadata: Metadata {
                software: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                rng: RNG_ALGORITHM.to_string(),
                master_seed: config.master_seed,
                dim: basis.dim(),
                mean_gap,
                delta_minus,
                spectral_window: SPECTRAL_WINDOW,
                excluded,
            },
        },
        records: per_point,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiabaticFit {
    /// Intercept with the exponent free.
    pub w0: f64,
    pub w1: f64,
    pub exponent: f64,
    /// Intercept and slope with the exponent fixed at 1/3.
    pub w0_third: f64,
    pub w1_third: f64,
}

/// Fits W_tot = W0 - W1 (v delta_minus)^p / W_b over a speed grid.
pub fn fit_diabatic(speeds: &[f64], w_tot: &[f64], delta_minus: f64, wb: f64) -> Result<DiabaticFit> {
    if speeds.len() != w_tot.len() {
        return Err(Error::param("speed and work vectors differ in length"));
    }
    if speeds.iter().filter(|&&v| v > 0.0).count() < 4 {
        return Err(Error::Statistics("diabatic fit needs at least four points with v > 0".into()));
    }
    if !(delta_minus > 0.0 && wb > 0.0) {
        return Err(Error::param("delta_minus and W_b must be positive"));
    }
    let fit_at = |p: f64| {
        let x: Vec<f64> = speeds.iter().map(|v| (v * delta_minus).powf(p) / wb).collect();
        stats::linear_fit(&x, w_tot)
    };
    let sse = |p: f64| fit_at(p).map(|f| f.sse).unwrap_or(f64::INFINITY);
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..=400 {
        let p = 0.005 * k as f64;
        let s = sse(p);
        if s < best.0 {
            best = (s, p);
        }
    }
    let (mut lo, mut hi) = ((best.1 - 0.005).max(1e-6), best.1 + 0.005);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if sse(a) < sse(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let p = (lo + hi) / 2.0;
    let free = fit_at(p)?;
    let third = fit_at(1.0 / 3.0)?;
    Ok(DiabaticFit {
        w0: free.intercept,
        w1: -free.slope,
        exponent: p,
        w0_third: third.intercept,
        w1_third: -third.slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStatsConfig {
    pub sites: usize,
    pub h: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub window: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStatistics {
    pub config: LevelStatsConfig,
    pub mean_gap: f64,
    pub spectral_variance: f64,
    pub spacings: usize,
    pub ks: Option<KsDistances>,
    pub delta_minus: Option<f64>,
    /// Unfolded spacings on log bins over [1e-4, 1].
    pub histogram: SpacingHistogram,
}

/// Spacing statistics of the rescaled Hamiltonian at fixed disorder strength.
pub fn level_statistics(config: &LevelStatsConfig) -> Result<LevelStatistics> {
    let basis = SectorBasis::new(config.sites)?;
    if config.realizations < 1 {
        return Err(Error::param("need at least one realization"));
    }
    let ham = HamiltonianParams::default();
    let energies = (0..config.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let dr = realization(config.master_seed, k, config.sites, config.h, config.h);
            let t = HamiltonianTerms::new(&basis, &dr.fields)?;
            let (c, h) = t.coefficients(&dr, &ham)?;
            spectra::eigenvalues(&t.to_dense(c, h), 0.0).map(|s| s.energies)
        })
        .collect::<Result<Vec<_>>>()?;
    let sds: Vec<f64> = energies.iter().map(|e| spectra::std_dev(e)).collect();
    let sigma = stats::mean(&sds);
    let variance = stats::mean(&sds.iter().map(|s| s * s).collect::<Vec<_>>());
    let mean_gap = spectra::mean_gap_from_std(sigma, basis.dim());
    let unfolded = spectra::unfolded_spacings(energies.iter().map(|e| e.as_slice()), config.window)?;
    let ks = spectra::spacing_distances(&unfolded).ok();
    let delta_minus = if unfolded.len() >= spectra::MIN_DELTA_MINUS_SPACINGS {
        let mut raw = Vec::new();
        for e in &energies {
            raw.extend(spectra::central_spacings(e, config.window)?);
        }
        Some(spectra::estimate_delta_minus_with_reference(&raw, mean_gap, config.bins)?)
    } else {
        None
    };
    let histogram = SpacingHistogram::logarithmic(&unfolded, 1e-4, 1.0, config.bins)?;
    Ok(LevelStatistics {
        config: config.clone(),
        mean_gap,
        spectral_variance: variance,
        spacings: unfolded.len(),
        ks,
        delta_minus,
        histogram,
    })
}
