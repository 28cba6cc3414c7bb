//! Small statistics helpers shared by the ensemble and comparison code.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; `None` for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Mean with standard error (sample standard deviation over sqrt(n)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        Self { mean: mean(xs), stderr: sample_variance(xs).map(|v| (v / xs.len() as f64).sqrt()) }
    }
}

/// Ratio of means a/b with a delta-method standard error; `None` unless mean(b) > 0.
pub fn ratio_of_means(a: &[f64], b: &[f64]) -> Option<Estimate> {
    let (ma, mb) = (mean(a), mean(b));
    if !(mb > 0.0) {
        return None;
    }
    let r = ma / mb;
    let stderr = match (sample_variance(a), sample_variance(b)) {
        (Some(va), Some(vb)) => {
            let n = a.len() as f64;
            let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0);
            let rel = va / (ma * ma) + vb / (mb * mb) - 2.0 * cov / (ma * mb);
            if ma == 0.0 {
                Some((va / n).sqrt() / mb)
            } else {
                Some(r.abs() * (rel.max(0.0) / n).sqrt())
            }
        }
        _ => None,
    };
    Some(Estimate { mean: r, stderr })
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Fraction of paired bootstrap resamples in which var(a) < var(b).
pub fn bootstrap_variance_order<R: Rng + ?Sized>(a: &[f64], b: &[f64], resamples: usize, rng: &mut R) -> f64 {
    let resampled_var = |xs: &[f64], rng: &mut R| {
        let n = xs.len();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = xs[rng.random_range(0..n)];
            s += x;
            s2 += x * x;
        }
        let m = s / n as f64;
        (s2 - n as f64 * m * m) / (n - 1) as f64
    };
    let wins = (0..resamples).filter(|_| resampled_var(a, rng) < resampled_var(b, rng)).count();
    wins as f64 / resamples as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub sse: f64,
}

/// Ordinary least-squares line through (x, y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Statistics("line fit needs at least two paired points".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 1e-300) || !sxx.is_finite() {
        return Err(Error::Statistics("singular design: all x values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(LineFit { slope, intercept, sse })
}
