//! One Otto cycle per disorder realization.
//!
//! Strokes: hot Gibbs state at alpha = 0, tune to alpha = 1, cold cluster
//! thermalization, tune back to alpha = 0, hot reset. Work is counted positive
//! when output, heat positive when absorbed.
//!
//! Between strokes the state is always diagonal in the current eigenbasis
//! (adiabatic maps keep it so and diabatic strokes end with dephasing), so the
//! cycle itself is run on occupation vectors. The density-matrix operations
//! are exposed separately for direct use and for cross-checks.

use std::collections::HashMap;
use std::ops::Range;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{DisorderRealization, HamiltonianParams, HamiltonianTerms, SectorBasis};
use crate::error::{Error, Result};
use crate::spectra::{self, Spectrum};

/// Diabatic strokes longer than this are refused.
pub const MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Tuning {
    Adiabatic,
    /// Stepwise tuning at speed `speed` with time step `dt`.
    Diabatic { speed: f64, dt: f64 },
}

/// Cycle parameters in absolute energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleParams {
    pub wb: f64,
    /// May be `f64::INFINITY`.
    pub beta_c: f64,
    pub beta_h: f64,
    pub tuning: Tuning,
}

impl CycleParams {
    pub fn adiabatic(wb: f64, beta_c: f64, beta_h: f64) -> Self {
        Self { wb, beta_c, beta_h, tuning: Tuning::Adiabatic }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wb >= 0.0 && self.wb.is_finite()) {
            return Err(Error::param(format!("W_b must be finite and >= 0, got {}", self.wb)));
        }
        if !(self.beta_c >= 0.0) {
            return Err(Error::param("beta_c must be >= 0 (inf allowed)"));
        }
        if !(self.beta_h >= 0.0 && self.beta_h.is_finite()) {
            return Err(Error::param("beta_h must be finite and >= 0"));
        }
        if let Tuning::Diabatic { speed, dt } = self.tuning {
            if !(speed > 0.0 && speed.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("diabatic tuning needs positive finite speed and dt"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub realization_id: u64,
    /// E(t0) .. E(t4)
    pub boundary_energies: [f64; 5],
    pub w1: f64,
    pub q2: f64,
    pub w3: f64,
    pub q4: f64,
    pub w_tot: f64,
}

impl CycleRecord {
    pub fn from_energies(realization_id: u64, e: [f64; 5]) -> Self {
        let w1 = e[0] - e[1];
        let q2 = e[2] - e[1];
        let w3 = e[2] - e[3];
        let q4 = e[4] - e[3];
        Self { realization_id, boundary_energies: e, w1, q2, w3, q4, w_tot: w1 + w3 }
    }
}

fn dot(p: &[f64], e: &[f64]) -> f64 {
    p.iter().zip(e).map(|(a, b)| a * b).sum()
}

fn to_complex(m: &Mat<f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

fn trace(rho: &Mat<C64>) -> C64 {
    (0..rho.nrows()).map(|i| rho[(i, i)]).sum()
}

fn check_dims(rho: &Mat<C64>, s: &Spectrum) -> Result<()> {
    if rho.nrows() != s.dim() || rho.ncols() != s.dim() {
        return Err(Error::param("density matrix and spectrum dimensions differ"));
    }
    Ok(())
}

/// Carries eigenlevel j of `from` onto eigenlevel j of `to`.
pub fn adiabatic_map(rho: &Mat<C64>, from: &Spectrum, to: &Spectrum) -> Result<Mat<C64>> {
    check_dims(rho, from)?;
    check_dims(rho, to)?;
    let u = to_complex(&(to.vectors()? * from.vectors()?.transpose()));
    let out = &u * rho * u.adjoint();
    let tr = trace(&out);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-6 {
        return Err(Error::State(format!("trace drifted to {tr}")));
    }
    Ok(out)
}

/// Occupations of the eigenlevels of `spectrum` (the diagonal ensemble).
pub fn dephase(rho: &Mat<C64>, spectrum: &Spectrum) -> Result<Vec<f64>> {
    check_dims(rho, spectrum)?;
    let v = to_complex(spectrum.vectors()?);
    let r = v.adjoint() * rho * &v;
    Ok((0..r.nrows()).map(|i| r[(i, i)].re).collect())
}

/// Occupations of `rho`, refusing states with coherences above `tol` in the eigenbasis.
pub fn diagonal_populations(rho: &Mat<C64>, spectrum: &Spectrum, tol: f64) -> Result<Vec<f64>> {
    check_dims(rho, spectrum)?;
    let v = to_complex(spectrum.vectors()?);
    let r = v.adjoint() * rho * &v;
    let n = r.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && r[(i, j)].norm() > tol {
                return Err(Error::State("state is not diagonal in the eigenbasis; dephase first".into()));
            }
        }
    }
    Ok((0..n).map(|i| r[(i, i)].re).collect())
}

/// sum_j p_j |E_j><E_j|
pub fn populations_to_matrix(p: &[f64], spectrum: &Spectrum) -> Result<Mat<C64>> {
    let v = spectrum.vectors()?;
    if p.len() != spectrum.dim() {
        return Err(Error::param("population vector and spectrum dimensions differ"));
    }
    let n = p.len();
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * p[j]);
    Ok(to_complex(&(scaled * v.transpose())))
}

/// Maximal runs of levels whose consecutive gaps are all below `wb`.
pub fn clusters(energies: &[f64], wb: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        if i == energies.len() || !(energies[i] - energies[i - 1] < wb) {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Boltzmann weights within one group of levels; infinite beta puts everything on the lowest.
fn cluster_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    if beta.is_infinite() {
        let mut w = vec![0.0; energies.len()];
        w[0] = 1.0;
        return w;
    }
    let lo = energies[0];
    let raw: Vec<f64> = energies.iter().map(|e| (-beta * (e - lo)).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

/// Redistributes the weight of each cluster over its levels in Gibbs proportions.
pub fn cold_thermalize(populations: &[f64], energies: &[f64], wb: f64, beta_c: f64) -> Result<Vec<f64>> {
    if populations.len() != energies.len() {
        return Err(Error::param("population vector and spectrum dimensions differ"));
    }
    if !(beta_c >= 0.0) {
        return Err(Error::param("beta_c must be >= 0"));
    }
    let mut out = populations.to_vec();
    for c in clusters(energies, wb) {
        if c.len() < 2 {
            continue;
        }
        let total: f64 = populations[c.clone()].iter().sum();
        for (k, w) in c.clone().zip(cluster_weights(&energies[c], beta_c)) {
            out[k] = total * w;
        }
    }
    Ok(out)
}

/// Density-matrix form of [`cold_thermalize`]; the input must already be dephased.
pub fn cold_thermalize_matrix(rho: &Mat<C64>, spectrum: &Spectrum, wb: f64, beta_c: f64) -> Result<Mat<C64>> {
    let p = diagonal_populations(rho, spectrum, 1e-9)?;
    populations_to_matrix(&cold_thermalize(&p, &spectrum.energies, wb, beta_c)?, spectrum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gibbs {
    pub populations: Vec<f64>,
    pub ln_z: f64,
}

pub fn gibbs(energies: &[f64], beta: f64) -> Result<Gibbs> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param("Gibbs state needs finite beta >= 0"));
    }
    let n = energies.len();
    if beta == 0.0 {
        return Ok(Gibbs { populations: vec![1.0 / n as f64; n], ln_z: (n as f64).ln() });
    }
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies.iter().map(|e| (-beta * (e - lo)).exp()).collect();
    let z: f64 = raw.iter().sum();
    Ok(Gibbs { populations: raw.into_iter().map(|x| x / z).collect(), ln_z: z.ln() - beta * lo })
}

/// Hot-bath reset: e^{-beta_h H(0)} / Z, returned as occupations of `spectrum`.
pub fn hot_thermalize(spectrum: &Spectrum, beta_h: f64) -> Result<Gibbs> {
    gibbs(&spectrum.energies, beta_h)
}

/// M_p = (1 - p) I + p g 1^T
pub fn partial_swap(p: f64, gibbs: &[f64]) -> Result<Mat<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("swap probability must lie in [0, 1], got {p}")));
    }
    if gibbs.iter().any(|g| !(*g > 0.0)) || (gibbs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::param("Gibbs vector must be positive and sum to 1"));
    }
    let n = gibbs.len();
    Ok(Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 - p } else { 0.0 };
        id + p * gibbs[i]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// alpha from 0 to 1
    Forward,
    /// alpha from 1 to 0
    Reverse,
}

/// Time grid of a stepwise tuning stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub steps: u64,
    pub dt: f64,
    pub duration: f64,
}

impl Schedule {
    /// Duration eps (h_mbl - h_eth) / v, split into ceil(duration / dt) steps.
    pub fn new(dr: &DisorderRealization, eps: f64, speed: f64, dt: f64) -> Result<Self> {
        if !(speed > 0.0) || !(dt > 0.0) {
            return Err(Error::param("speed and dt must be positive"));
        }
        let duration = eps * (dr.h_mbl - dr.h_eth).abs() / speed;
        let steps = (duration / dt).ceil().max(1.0);
        if steps > MAX_STEPS as f64 {
            return Err(Error::Resource(format!(
                "{steps} time steps exceed the limit of {MAX_STEPS}; lower the speed bound or use adiabatic tuning"
            )));
        }
        Ok(Self { steps: steps as u64, dt, duration })
    }

    /// alpha during step k (held constant for the whole step).
    pub fn alpha(&self, k: u64, direction: Direction) -> f64 {
        let a = if self.duration > 0.0 { (k as f64 * self.dt / self.duration).min(1.0) } else { 0.0 };
        match direction {
            Direction::Forward => a,
            Direction::Reverse => 1.0 - a,
        }
    }
}

/// Full stroke unitary, built from each step's eigendecomposition.
pub fn diabatic_unitary(
    basis: &SectorBasis,
    dr: &DisorderRealization,
    params: &HamiltonianParams,
    direction: Direction,
    speed: f64,
    dt: f64,
) -> Result<Mat<C64>> {
    let terms = HamiltonianTerms::new(basis, &dr.fields)?;
    let schedule = Schedule::new(dr, params.energy_unit, speed, dt)?;
    let n = basis.dim();
    let mut u = Mat::<C64>::identity(n, n);
    for k in 0..schedule.steps {
        let (c, h) = terms.coefficients(dr, &params.at(schedule.alpha(k, direction)))?;
        let s = spectra::diagonalize(&terms.to_dense(c, h), 0.0)?;
        let v = s.vectors()?;
        let phased = Mat::from_fn(n, n, |i, j| v[(i, j)] * C64::from_polar(1.0, -s.energies[j] * dt));
        let step = phased * to_complex(v).transpose();
        u = step * u;
    }
    Ok(u)
}

/// Applies a stepwise stroke to state vectors with a truncated Taylor series
/// on the sparse Hamiltonian. Cheaper than the eigendecomposition route when
/// only a few columns of the stroke unitary are needed.
pub struct StrokePropagator<'a> {
    terms: &'a HamiltonianTerms,
    steps: Vec<(f64, f64)>,
    dt: f64,
}

impl<'a> StrokePropagator<'a> {
    pub fn new(
        terms: &'a HamiltonianTerms,
        dr: &DisorderRealization,
        params: &HamiltonianParams,
        direction: Direction,
        speed: f64,
        dt: f64,
    ) -> Result<Self> {
        let schedule = Schedule::new(dr, params.energy_unit, speed, dt)?;
        let steps = (0..schedule.steps)
            .map(|k| terms.coefficients(dr, &params.at(schedule.alpha(k, direction))))
            .collect::<Result<_>>()?;
        Ok(Self { terms, steps, dt })
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    fn apply_h(&self, c: f64, diag: &[f64], x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = x[i] * diag[i];
            let mut hop = C64::new(0.0, 0.0);
            for &j in self.terms.neighbours(i) {
                hop += x[j as usize];
            }
            acc += hop * 2.0;
            *yi = acc * c;
        }
    }

    /// exp(-i H tau) psi for H = c [hop + diag].
    fn exp_step(&self, c: f64, diag: &[f64], bound: f64, tau: f64, psi: &mut [C64], work: &mut [Vec<C64>; 2]) {
        let sub = (bound * tau / 2.0).ceil().max(1.0) as usize;
        let t = tau / sub as f64;
        let [term, next] = work;
        for _ in 0..sub {
            term.copy_from_slice(psi);
            for k in 1..64 {
                self.apply_h(c, diag, term, next);
                let f = C64::new(0.0, -t / k as f64);
                let mut norm = 0.0;
                for (a, b) in term.iter_mut().zip(next.iter()) {
                    *a = b * f;
                    norm += a.norm_sqr();
                }
                for (p, a) in psi.iter_mut().zip(term.iter()) {
                    *p += a;
                }
                if norm < 1e-34 {
                    break;
                }
            }
        }
    }

    /// Runs every step of the stroke on each state in `states`.
    pub fn propagate(&self, states: &mut [Vec<C64>]) {
        let n = self.terms.dim();
        let mut work = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
        for &(c, h) in &self.steps {
            let diag: Vec<f64> = self
                .terms
                .zz_diagonal()
                .iter()
                .zip(self.terms.field_diagonal())
                .map(|(z, f)| z + h * f)
                .collect();
            let bound = self.terms.norm_bound(c, h);
            for psi in states.iter_mut() {
                self.exp_step(c, &diag, bound, self.dt, psi, &mut work);
            }
        }
    }
}

/// Most frequent value in `p`, compared bitwise.
fn modal_value(p: &[f64]) -> f64 {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for x in p {
        *counts.entry(x.to_bits()).or_default() += 1;
    }
    let best = counts.into_iter().max_by_key(|&(bits, n)| (n, std::cmp::Reverse(bits))).map(|(b, _)| b);
    best.map_or(0.0, f64::from_bits)
}

/// Occupations of `to` after a diabatic stroke from a state diagonal in `from`,
/// followed by dephasing. Writes rho = r I + sum_j (p_j - r)|E_j><E_j| with r
/// the most common occupation and propagates only the levels with p_j != r.
pub fn diabatic_transfer(
    propagator: &StrokePropagator<'_>,
    from: &Spectrum,
    to: &Spectrum,
    populations: &[f64],
) -> Result<Vec<f64>> {
    let vf = from.vectors()?;
    let vt = to.vectors()?;
    let n = from.dim();
    let r = modal_value(populations);
    let active: Vec<usize> = (0..n).filter(|&j| populations[j] != r).collect();
    let mut states: Vec<Vec<C64>> =
        active.iter().map(|&j| (0..n).map(|i| C64::new(vf[(i, j)], 0.0)).collect()).collect();
    propagator.propagate(&mut states);
    let mut out = vec![r; n];
    for (psi, &j) in states.iter().zip(&active) {
        let dp = populations[j] - r;
        for (k, o) in out.iter_mut().enumerate() {
            let mut amp = C64::new(0.0, 0.0);
            for i in 0..n {
                amp += psi[i] * vt[(i, k)];
            }
            *o += dp * amp.norm_sqr();
        }
    }
    Ok(out)
}

/// Which realizations supply the two ends of the cycle.
#[derive(Debug, Clone, Copy)]
pub enum RealizationPair<'a> {
    /// One realization tuned from h_eth to h_mbl.
    Same(&'a DisorderRealization),
    /// Two realizations, both taken at their h_mbl.
    Distinct(&'a DisorderRealization, &'a DisorderRealization),
}

struct Dynamics {
    terms: HamiltonianTerms,
    dr: DisorderRealization,
    params: HamiltonianParams,
}

/// Endpoint spectra of one cycle, plus what a diabatic stroke needs.
pub struct CycleEndpoints {
    pub start: Spectrum,
    pub end: Spectrum,
    dynamics: Option<Dynamics>,
}

impl CycleEndpoints {
    pub fn new(start: Spectrum, end: Spectrum) -> Result<Self> {
        if start.dim() != end.dim() {
            return Err(Error::param("endpoint spectra have different dimensions"));
        }
        Ok(Self { start, end, dynamics: None })
    }

    /// Diagonalizes both ends; eigenvectors are kept only when `with_vectors`.
    pub fn build(
        basis: &SectorBasis,
        pair: RealizationPair<'_>,
        params: &HamiltonianParams,
        with_vectors: bool,
    ) -> Result<Self> {
        let solve = |m: &Mat<f64>, a: f64| {
            if with_vectors {
                spectra::diagonalize(m, a)
            } else {
                spectra::eigenvalues(m, a)
            }
        };
        match pair {
            RealizationPair::Same(dr) => {
                let terms = HamiltonianTerms::new(basis, &dr.fields)?;
                let (c0, h0) = terms.coefficients(dr, &params.at(0.0))?;
                let (c1, h1) = terms.coefficients(dr, &params.at(1.0))?;
                let start = solve(&terms.to_dense(c0, h0), 0.0)?;
                let end = solve(&terms.to_dense(c1, h1), 1.0)?;
                let dynamics = with_vectors.then(|| Dynamics { terms, dr: dr.clone(), params: *params });
                Ok(Self { start, end, dynamics })
            }
            RealizationPair::Distinct(a, b) => {
                if a.h_mbl != b.h_mbl {
                    return Err(Error::param("paired realizations must share h_mbl"));
                }
                let ta = HamiltonianTerms::new(basis, &a.fields)?;
                let tb = HamiltonianTerms::new(basis, &b.fields)?;
                let (ca, ha) = ta.coefficients(a, &params.at(1.0))?;
                let (cb, hb) = tb.coefficients(b, &params.at(1.0))?;
                Ok(Self {
                    start: solve(&ta.to_dense(ca, ha), 0.0)?,
                    end: solve(&tb.to_dense(cb, hb), 1.0)?,
                    dynamics: None,
                })
            }
        }
    }

    fn tune(&self, populations: &[f64], tuning: Tuning, direction: Direction) -> Result<Vec<f64>> {
        match tuning {
            Tuning::Adiabatic => Ok(populations.to_vec()),
            Tuning::Diabatic { speed, dt } => {
                let d = self.dynamics.as_ref().ok_or_else(|| {
                    Error::param("diabatic tuning needs a single realization with eigenvectors")
                })?;
                let prop = StrokePropagator::new(&d.terms, &d.dr, &d.params, direction, speed, dt)?;
                let (from, to) = match direction {
                    Direction::Forward => (&self.start, &self.end),
                    Direction::Reverse => (&self.end, &self.start),
                };
                diabatic_transfer(&prop, from, to, populations)
            }
        }
    }

    /// Runs the four strokes and returns the energy accounting.
    pub fn run(&self, params: &CycleParams, realization_id: u64) -> Result<CycleRecord> {
        params.validate()?;
        let e0s = &self.start.energies;
        let e1s = &self.end.energies;
        let p0 = gibbs(e0s, params.beta_h)?.populations;
        let p1 = self.tune(&p0, params.tuning, Direction::Forward)?;
        let p2 = cold_thermalize(&p1, e1s, params.wb, params.beta_c)?;
        let p3 = self.tune(&p2, params.tuning, Direction::Reverse)?;
        let p4 = gibbs(e0s, params.beta_h)?.populations;
        let e = [dot(&p0, e0s), dot(&p1, e1s), dot(&p2, e1s), dot(&p3, e0s), dot(&p4, e0s)];
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric { msg: "non-finite boundary energy".into(), tag: None });
        }
        Ok(CycleRecord::from_energies(realization_id, e))
    }

    /// Trial-resolved adiabatic cycles; each entry is one trial's W_tot.
    pub fn sample_trials<R: Rng + ?Sized>(&self, params: &CycleParams, n_trials: usize, rng: &mut R) -> Result<Vec<f64>> {
        params.validate()?;
        if n_trials < 1 {
            return Err(Error::param("need at least one trial"));
        }
        if params.tuning != Tuning::Adiabatic {
            return Err(Error::param("trial sampling needs adiabatic tuning"));
        }
        let e0s = &self.start.energies;
        let e1s = &self.end.energies;
        let n = e0s.len();
        let start = gibbs(e0s, params.beta_h)?.populations;
        let start_cdf = cumulative(&start);
        let groups = clusters(e1s, params.wb);
        let mut owner = vec![0usize; n];
        for (g, r) in groups.iter().enumerate() {
            owner[r.clone()].iter_mut().for_each(|o| *o = g);
        }
        let group_cdf: Vec<Vec<f64>> =
            groups.iter().map(|r| cumulative(&cluster_weights(&e1s[r.clone()], params.beta_c))).collect();
        let uniform_start = params.beta_h == 0.0;
        let mut out = Vec::with_capacity(n_trials);
        for _ in 0..n_trials {
            let j = if uniform_start { rng.random_range(0..n) } else { draw(&start_cdf, rng) };
            let g = owner[j];
            let r = &groups[g];
            let k = if r.len() == 1 {
                j
            } else if params.beta_c.is_infinite() {
                r.start
            } else {
                r.start + draw(&group_cdf[g], rng)
            };
            out.push((e0s[j] - e0s[k]) - (e1s[j] - e1s[k]));
        }
        Ok(out)
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Builds the endpoints of one realization and runs a cycle.
pub fn run_cycle(
    basis: &SectorBasis,
    pair: RealizationPair<'_>,
    hamiltonian: &HamiltonianParams,
    params: &CycleParams,
    realization_id: u64,
) -> Result<CycleRecord> {
    let with_vectors = matches!(params.tuning, Tuning::Diabatic { .. });
    CycleEndpoints::build(basis, pair, hamiltonian, with_vectors)?.run(params, realization_id)
}

/// Trial-resolved counterpart of [`run_cycle`].
pub fn sample_trials<R: Rng + ?Sized>(
    basis: &SectorBasis,
    pair: RealizationPair<'_>,
    hamiltonian: &HamiltonianParams,
    params: &CycleParams,
    n_trials: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    CycleEndpoints::build(basis, pair, hamiltonian, false)?.sample_trials(params, n_trials, rng)
}
