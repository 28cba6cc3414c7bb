//! Half-filling sector of an open spin-1/2 chain and the random-field
//! Heisenberg Hamiltonian restricted to it.
//!
//! Site `j` (1-based) is bit `j - 1` of a basis pattern; a set bit is spin up.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain the dense representation is meant for.
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 || sites % 2 != 0 || sites > MAX_SITES {
            return Err(Error::param(format!(
                "sites must be even and in 2..={MAX_SITES}, got {sites}"
            )));
        }
        let half = (sites / 2) as u32;
        let states = (0u32..(1u32 << sites))
            .filter(|s| s.count_ones() == half)
            .collect();
        Ok(Self { sites, states })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, pattern: u32) -> Option<usize> {
        self.states.binary_search(&pattern).ok()
    }

    /// sigma^z eigenvalue (+1 up, -1 down) of 0-based site `site` in `pattern`.
    pub fn spin(pattern: u32, site: usize) -> f64 {
        if pattern >> site & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn enumerate_basis(sites: usize) -> Result<SectorBasis> {
    SectorBasis::new(sites)
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Disorder-averaged rescaling factor Q(h) for an L-site chain.
pub fn rescale_factor(h: f64, sites: usize) -> Result<f64> {
    if sites < 2 {
        return Err(Error::param("rescale factor needs at least two sites"));
    }
    if !(h >= 0.0) {
        return Err(Error::param(format!("disorder strength must be >= 0, got {h}")));
    }
    let l = sites as f64;
    Ok((3.0 * l - 2.0 + (l - 2.0) / (l - 1.0) + l * h * h / 3.0).sqrt())
}

/// Identifies the RNG substream a realization was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTag {
    pub master_seed: u64,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub fields: Vec<f64>,
    pub h_eth: f64,
    pub h_mbl: f64,
    pub seed_tag: Option<SeedTag>,
}

impl DisorderRealization {
    pub fn new(fields: Vec<f64>, h_eth: f64, h_mbl: f64) -> Result<Self> {
        if let Some(bad) = fields.iter().find(|f| !(f.abs() <= 1.0)) {
            return Err(Error::param(format!("field {bad} outside [-1, 1]")));
        }
        if !(h_eth >= 0.0 && h_mbl >= 0.0) {
            return Err(Error::param("disorder strengths must be >= 0"));
        }
        Ok(Self { fields, h_eth, h_mbl, seed_tag: None })
    }

    pub fn sites(&self) -> usize {
        self.fields.len()
    }

    /// h(alpha) = (1 - alpha) h_eth + alpha h_mbl, so alpha = 0 is the thermal side.
    pub fn strength(&self, alpha: f64) -> f64 {
        (1.0 - alpha) * self.h_eth + alpha * self.h_mbl
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub energy_unit: f64,
    pub alpha: f64,
    pub rescale: bool,
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        Self { energy_unit: 1.0, alpha: 0.0, rescale: true }
    }
}

impl HamiltonianParams {
    pub fn at(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.energy_unit > 0.0) {
            return Err(Error::param("energy unit must be positive"));
        }
        Ok(())
    }
}

/// Sparse pieces of the Hamiltonian in the sector basis:
/// H(alpha) = c(alpha) [hop + diag(zz) + h(alpha) diag(field)].
///
/// Every off-diagonal entry equals 2 (a flipped antiparallel neighbour pair).
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    sites: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    zz: Vec<f64>,
    field: Vec<f64>,
}

impl HamiltonianTerms {
    pub fn new(basis: &SectorBasis, fields: &[f64]) -> Result<Self> {
        if fields.len() != basis.sites() {
            return Err(Error::param(format!(
                "realization has {} fields but the basis has {} sites",
                fields.len(),
                basis.sites()
            )));
        }
        let l = basis.sites();
        let dim = basis.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut zz = Vec::with_capacity(dim);
        let mut field = Vec::with_capacity(dim);
        row_ptr.push(0);
        for &s in basis.states() {
            let mut d = 0.0;
            for j in 0..l - 1 {
                let a = s >> j & 1;
                let b = s >> (j + 1) & 1;
                if a == b {
                    d += 1.0;
                } else {
                    d -= 1.0;
                    let t = s ^ (0b11 << j);
                    cols.push(basis.index_of(t).expect("flip stays in sector") as u32);
                }
            }
            zz.push(d);
            field.push((0..l).map(|j| fields[j] * SectorBasis::spin(s, j)).sum());
            row_ptr.push(cols.len());
        }
        Ok(Self { sites: l, row_ptr, cols, zz, field })
    }

    pub fn dim(&self) -> usize {
        self.zz.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Off-diagonal neighbours of basis state `row`.
    pub fn neighbours(&self, row: usize) -> &[u32] {
        &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    /// Sum_j s_j s_{j+1} for every basis state.
    pub fn zz_diagonal(&self) -> &[f64] {
        &self.zz
    }

    /// Sum_j h_j s_j for every basis state.
    pub fn field_diagonal(&self) -> &[f64] {
        &self.field
    }

    /// Overall prefactor and disorder strength of H at `params.alpha`.
    pub fn coefficients(&self, dr: &DisorderRealization, params: &HamiltonianParams) -> Result<(f64, f64)> {
        params.validate()?;
        let h = dr.strength(params.alpha);
        let c = if params.rescale {
            params.energy_unit / rescale_factor(h, self.sites)?
        } else {
            params.energy_unit
        };
        Ok((c, h))
    }

    pub fn diagonal(&self, c: f64, h: f64) -> Vec<f64> {
        self.zz.iter().zip(&self.field).map(|(z, f)| c * (z + h * f)).collect()
    }

    pub fn to_dense(&self, c: f64, h: f64) -> Mat<f64> {
        let n = self.dim();
        let diag = self.diagonal(c, h);
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            for &j in self.neighbours(i) {
                m[(i, j as usize)] = 2.0 * c;
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius of c [hop + diag(zz + h field)].
    pub fn norm_bound(&self, c: f64, h: f64) -> f64 {
        (0..self.dim())
            .map(|i| {
                let deg = (self.row_ptr[i + 1] - self.row_ptr[i]) as f64;
                2.0 * deg + (self.zz[i] + h * self.field[i]).abs()
            })
            .fold(0.0, f64::max)
            * c.abs()
    }

    /// (Tr H, Tr H^2) without forming the matrix.
    pub fn trace_moments(&self, c: f64, h: f64) -> (f64, f64) {
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        for (z, f) in self.zz.iter().zip(&self.field) {
            let d = z + h * f;
            t1 += d;
            t2 += d * d;
        }
        t2 += 4.0 * self.cols.len() as f64;
        (c * t1, c * c * t2)
    }
}

/// Dense H(alpha) for one realization.
pub fn build_hamiltonian(
    basis: &SectorBasis,
    dr: &DisorderRealization,
    params: &HamiltonianParams,
) -> Result<Mat<f64>> {
    let terms = HamiltonianTerms::new(basis, &dr.fields)?;
    let (c, h) = terms.coefficients(dr, params)?;
    Ok(terms.to_dense(c, h))
}

/// Closed-form sector traces for neighbouring sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorTraces {
    /// Tr(sigma^z_j sigma^z_{j+1})
    pub zz: f64,
    /// Tr((sigma^+_j sigma^-_j)(sigma^-_{j+1} sigma^+_{j+1}))
    pub up_down: f64,
    /// Tr(sigma^z_1 sigma^z_2 sigma^z_3 sigma^z_4); absent for L = 2.
    pub four_point: Option<f64>,
}

pub fn sector_traces(sites: usize) -> Result<SectorTraces> {
    if sites < 2 || sites % 2 != 0 {
        return Err(Error::param(format!("sector traces need even L >= 2, got {sites}")));
    }
    let n = binomial(sites as u64, sites as u64 / 2) as f64;
    let l = sites as f64;
    Ok(SectorTraces {
        zz: -n / (l - 1.0),
        up_down: n * l / (4.0 * (l - 1.0)),
        four_point: (sites >= 4).then(|| 3.0 * n / ((l - 1.0) * (l - 3.0))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn realization(fields: Vec<f64>, h: f64) -> DisorderRealization {
        DisorderRealization::new(fields, h, h).unwrap()
    }

    #[test]
    fn small_sectors() {
        let b = enumerate_basis(2).unwrap();
        assert_eq!(b.states(), &[0b01, 0b10]);
        assert_eq!(enumerate_basis(4).unwrap().dim(), 6);
        assert_eq!(enumerate_basis(12).unwrap().dim(), 924);
        assert!(enumerate_basis(3).is_err());
        assert!(enumerate_basis(0).is_err());
        assert!(enumerate_basis(18).is_err());
    }

    #[test]
    fn rescale_values() {
        let q = rescale_factor(20.0, 12).unwrap();
        assert!((q * q - 1634.909_090_909_090_9).abs() < 1e-9);
        assert!((q - 40.434).abs() < 1e-3);
        let q = rescale_factor(2.0, 12).unwrap();
        assert!((q * q - 50.909_090_909_090_9).abs() < 1e-11);
        assert!((q - 7.1351).abs() < 1e-4);
        assert!(rescale_factor(1.0, 1).is_err());
    }

    #[test]
    fn two_site_singlet_triplet() {
        let b = enumerate_basis(2).unwrap();
        let dr = realization(vec![0.3, -0.7], 0.0);
        let p = HamiltonianParams { rescale: false, ..Default::default() };
        let h = build_hamiltonian(&b, &dr, &p).unwrap();
        assert_eq!(h[(0, 0)], -1.0);
        assert_eq!(h[(1, 1)], -1.0);
        assert_eq!(h[(0, 1)], 2.0);
        assert_eq!(h[(1, 0)], 2.0);
    }

    #[test]
    fn mismatched_sites_rejected() {
        let b = enumerate_basis(4).unwrap();
        let dr = realization(vec![0.1; 6], 1.0);
        assert!(build_hamiltonian(&b, &dr, &HamiltonianParams::default()).is_err());
    }

    #[test]
    fn trace_moments_match_dense() {
        let b = enumerate_basis(6).unwrap();
        let dr = realization(vec![0.1, -0.9, 0.4, 0.8, -0.2, 0.5], 3.0);
        let t = HamiltonianTerms::new(&b, &dr.fields).unwrap();
        let (c, h) = (0.37, 3.0);
        let m = t.to_dense(c, h);
        let n = b.dim();
        let tr: f64 = (0..n).map(|i| m[(i, i)]).sum();
        let tr2: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * m[(j, i)]).sum();
        let (a1, a2) = t.trace_moments(c, h);
        assert!((a1 - tr).abs() < 1e-12);
        assert!((a2 - tr2).abs() < 1e-10);
    }

    #[test]
    fn trace_closed_forms() {
        let t = sector_traces(4).unwrap();
        assert_eq!(t.zz, -2.0);
        assert_eq!(t.up_down, 2.0);
        assert_eq!(sector_traces(6).unwrap().four_point, Some(4.0));
        assert_eq!(sector_traces(2).unwrap().four_point, None);
        assert!(sector_traces(3).is_err());
    }
}
