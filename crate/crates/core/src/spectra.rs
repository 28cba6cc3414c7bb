//! Exact diagonalization and level statistics.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Once;

use faer::{Mat, Par, Side};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fewest spacings accepted by the KS comparison.
pub const MIN_KS_SPACINGS: usize = 100;
/// Fewest spacings accepted by the turnover estimator.
pub const MIN_DELTA_MINUS_SPACINGS: usize = 10_000;
/// Histogram bins are merged left to right until each holds this many counts.
pub const MIN_BIN_COUNT: u64 = 400;
/// Noise allowance, in standard errors, when testing for a nonincreasing density.
const DENSITY_TOLERANCE: f64 = 2.0;

static SEQUENTIAL: Once = Once::new();

/// Eigensolves run single-threaded so results never depend on worker count.
fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub alpha: f64,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column j is the eigenvector of `energies[j]`; absent for eigenvalue-only solves.
    pub eigenvectors: Option<Mat<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vectors(&self) -> Result<&Mat<f64>> {
        self.eigenvectors
            .as_ref()
            .ok_or_else(|| Error::State("spectrum was computed without eigenvectors".into()))
    }

    /// Population standard deviation of the eigenvalues.
    pub fn std_dev(&self) -> f64 {
        std_dev(&self.energies)
    }
}

fn check_symmetric(h: &Mat<f64>) -> Result<()> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::param("matrix is not square"));
    }
    for j in 0..n {
        for i in j + 1..n {
            if h[(i, j)] != h[(j, i)] {
                return Err(Error::param(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric { msg: "eigensolver produced non-finite values".into(), tag: None })
    }
}

/// Full eigendecomposition, energies ascending.
pub fn diagonalize(h: &Mat<f64>, alpha: f64) -> Result<Spectrum> {
    check_symmetric(h)?;
    ensure_sequential();
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric { msg: format!("eigensolver failed: {e:?}"), tag: None })?;
    let s = evd.S().column_vector();
    let energies: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    check_finite(&energies)?;
    let u = evd.U();
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let vectors = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]);
    let energies = order.iter().map(|&k| energies[k]).collect();
    Ok(Spectrum { alpha, energies, eigenvectors: Some(vectors) })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &Mat<f64>, alpha: f64) -> Result<Spectrum> {
    check_symmetric(h)?;
    ensure_sequential();
    let mut energies = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric { msg: format!("eigensolver failed: {e:?}"), tag: None })?;
    check_finite(&energies)?;
    energies.sort_by(f64::total_cmp);
    Ok(Spectrum { alpha, energies, eigenvectors: None })
}

pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n).sqrt()
}

/// Mean gap of a Gaussian density of states with standard deviation `sigma`
/// spread over `dim` levels: 2 sqrt(pi) sigma / dim.
pub fn mean_gap_from_std(sigma: f64, dim: usize) -> f64 {
    2.0 * PI.sqrt() * sigma / dim as f64
}

/// Same inversion with the analytic variance N eps^2 of an N-site chain.
pub fn analytic_mean_gap(sites: usize, eps: f64, dim: usize) -> f64 {
    2.0 * (PI * sites as f64).sqrt() * eps / dim as f64
}

/// Mean gap estimated from the disorder-averaged spectral standard deviation.
pub fn mean_gap(spectra: &[Spectrum]) -> Result<f64> {
    let first = spectra.first().ok_or_else(|| Error::param("empty ensemble"))?;
    let dim = first.dim();
    if spectra.iter().any(|s| s.dim() != dim) {
        return Err(Error::param("spectra have different dimensions"));
    }
    let sigma = spectra.iter().map(Spectrum::std_dev).sum::<f64>() / spectra.len() as f64;
    Ok(mean_gap_from_std(sigma, dim))
}

/// Consecutive gaps within the central `window` fraction of an ascending spectrum.
pub fn central_spacings(energies: &[f64], window: f64) -> Result<Vec<f64>> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::param(format!("window must lie in (0, 1], got {window}")));
    }
    let n = energies.len();
    let skip = ((n as f64) * (1.0 - window) / 2.0).floor() as usize;
    let kept = &energies[skip..n - skip];
    Ok(kept.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Pools central-window spacings of every spectrum and scales them to unit mean.
pub fn unfolded_spacings<'a, I>(spectra: I, window: f64) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut all = Vec::new();
    for e in spectra {
        all.extend(central_spacings(e, window)?);
    }
    if all.is_empty() {
        return Err(Error::Statistics("no spacings in window".into()));
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Statistics("mean spacing is not positive".into()));
    }
    for s in &mut all {
        *s /= mean;
    }
    Ok(all)
}

/// Unit-mean Poisson spacing density.
pub fn poisson_density(s: f64) -> f64 {
    (-s).exp()
}

/// Unit-mean Wigner-surmise spacing density.
pub fn wigner_density(s: f64) -> f64 {
    PI / 2.0 * s * (-PI * s * s / 4.0).exp()
}

pub fn poisson_cdf(s: f64) -> f64 {
    -(-s).exp_m1()
}

pub fn wigner_cdf(s: f64) -> f64 {
    -(-PI * s * s / 4.0).exp_m1()
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsDistances {
    pub ks_poisson: f64,
    pub ks_wigner: f64,
}

/// KS distances of unit-mean spacings to the Poisson and Wigner forms.
pub fn spacing_distances(spacings: &[f64]) -> Result<KsDistances> {
    if spacings.len() < MIN_KS_SPACINGS {
        return Err(Error::Statistics(format!(
            "{} spacings is too few for a KS comparison (need {MIN_KS_SPACINGS})",
            spacings.len()
        )));
    }
    Ok(KsDistances {
        ks_poisson: ks_statistic(spacings, poisson_cdf),
        ks_wigner: ks_statistic(spacings, wigner_cdf),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// count / (total samples * bin width)
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingHistogram {
    pub total: usize,
    pub bins: Vec<HistogramBin>,
}

impl SpacingHistogram {
    /// Logarithmically spaced bins over [lo, hi].
    pub fn logarithmic(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || bins == 0 {
            return Err(Error::param("histogram needs 0 < lo < hi and at least one bin"));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let edges: Vec<f64> = (0..=bins)
            .map(|k| match k {
                0 => lo,
                k if k == bins => hi,
                k => (llo + (lhi - llo) * k as f64 / bins as f64).exp(),
            })
            .collect();
        let mut counts = vec![0u64; bins];
        for &s in samples {
            if s < lo || s >= hi {
                continue;
            }
            let k = edges.partition_point(|&e| e <= s) - 1;
            counts[k.min(bins - 1)] += 1;
        }
        Ok(Self::from_counts(&edges, &counts, samples.len()))
    }

    fn from_counts(edges: &[f64], counts: &[u64], total: usize) -> Self {
        let bins = counts
            .iter()
            .enumerate()
            .map(|(k, &count)| HistogramBin {
                bin_left: edges[k],
                bin_right: edges[k + 1],
                count,
                density: count as f64 / (total as f64 * (edges[k + 1] - edges[k])),
            })
            .collect();
        Self { total, bins }
    }

    /// Merges bins left to right until each holds at least `min_count` samples.
    /// A short remainder joins the last merged bin.
    pub fn merged(&self, min_count: u64) -> Self {
        let mut edges = vec![];
        let mut counts: Vec<u64> = vec![];
        let mut acc = 0;
        let mut left = None;
        for b in &self.bins {
            left.get_or_insert(b.bin_left);
            acc += b.count;
            if acc >= min_count {
                edges.push(left.take().unwrap());
                counts.push(acc);
                acc = 0;
            }
        }
        let right = self.bins.last().map_or(0.0, |b| b.bin_right);
        if let Some(l) = left {
            if counts.is_empty() {
                edges.push(l);
                counts.push(acc);
            } else {
                *counts.last_mut().unwrap() += acc;
            }
        }
        edges.push(right);
        Self::from_counts(&edges, &counts, self.total)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in &self.bins {
            w.serialize(b)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Level-repulsion scale from the turnover of the spacing density, using the
/// sample mean as the reference gap.
pub fn estimate_delta_minus(spacings: &[f64], bins: usize) -> Result<f64> {
    let reference = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;
    estimate_delta_minus_with_reference(spacings, reference, bins)
}

/// Histograms spacings on log bins over [1e-4 reference, reference] and returns
/// the left edge of the first bin from which the density stops rising for three
/// consecutive bins. Sparse bins are merged first and a rise smaller than the
/// counting noise does not count as a rise.
pub fn estimate_delta_minus_with_reference(spacings: &[f64], reference: f64, bins: usize) -> Result<f64> {
    if spacings.len() < MIN_DELTA_MINUS_SPACINGS {
        return Err(Error::Statistics(format!(
            "{} spacings is too few to locate the turnover (need {MIN_DELTA_MINUS_SPACINGS})",
            spacings.len()
        )));
    }
    if !(reference > 0.0) {
        return Err(Error::param("reference gap must be positive"));
    }
    let hist = SpacingHistogram::logarithmic(spacings, 1e-4 * reference, reference, bins)?.merged(MIN_BIN_COUNT);
    let b = &hist.bins;
    let sigma = |x: &HistogramBin| x.density / (x.count.max(1) as f64).sqrt();
    let not_rising = |k: usize| {
        b[k + 1].density <= b[k].density + DENSITY_TOLERANCE * sigma(&b[k]).hypot(sigma(&b[k + 1]))
    };
    for i in 0..b.len().saturating_sub(2) {
        if b[i].count > 0 && not_rising(i) && not_rising(i + 1) {
            return Ok(b[i].bin_left);
        }
    }
    let peak = b
        .iter()
        .max_by(|x, y| x.density.total_cmp(&y.density))
        .ok_or_else(|| Error::Statistics("empty histogram".into()))?;
    Ok(peak.bin_left)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapStatistics {
    #[serde(skip)]
    pub spacings: Vec<f64>,
    pub mean_gap: f64,
    pub delta_minus: Option<f64>,
    pub window: f64,
}

/// Raw central-window spacings, Gaussian-inversion mean gap, and the turnover
/// scale when enough spacings are available.
pub fn gap_statistics(spectra: &[Spectrum], window: f64, bins: usize) -> Result<GapStatistics> {
    let mean_gap = mean_gap(spectra)?;
    let mut spacings = Vec::new();
    for s in spectra {
        spacings.extend(central_spacings(&s.energies, window)?);
    }
    let delta_minus = if spacings.len() >= MIN_DELTA_MINUS_SPACINGS {
        Some(estimate_delta_minus_with_reference(&spacings, mean_gap, bins)?)
    } else {
        None
    };
    Ok(GapStatistics { spacings, mean_gap, delta_minus, window })
}
