//! Fractional Brownian environment: exact covariance algebra and reproducible
//! sampling of the space-time Gaussian field.
//!
//! The environment is a family {B^x} of independent fractional Brownian
//! motions indexed by lattice sites x ∈ ℤ^d, each with Hurst index H and
//! covariance R_H(t,s) = ½(t^{2H} + s^{2H} − |t−s|^{2H}). Everything a solver
//! needs is the joint law of the grid increments ΔB^x_k at one site, which is
//! an exact dense Gram matrix — no kernel discretization is involved, so the
//! sampled field has the exact target law up to floating-point rounding.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::digest::hex_digest;
use crate::error::{PolymerError, Result};
use crate::numeric::{rng_domain, substream};

/// Hurst index, constrained to the open interval (0,1).
///
/// H = 1/2 is standard Brownian motion; H > 1/2 gives positively correlated
/// increments and H < 1/2 negatively correlated ones. The regime is always
/// derived from the stored value, never cached separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(PolymerError::Domain(format!(
                "Hurst index must lie in (0,1), got {h}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    /// True in the positively-correlated regime H > 1/2.
    #[inline]
    pub fn is_upper(self) -> bool {
        self.0 > 0.5
    }

    /// True exactly at the Brownian point H = 1/2.
    #[inline]
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for Hurst {
    type Error = PolymerError;
    fn try_from(h: f64) -> Result<Self> {
        Hurst::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

/// fBm covariance R_H(t,s) = ½(t^{2H} + s^{2H} − |t−s|^{2H}) for t, s ≥ 0.
///
/// At H = 1/2 the closed form collapses to min(t,s); that branch is taken
/// exactly so Brownian identities hold to the last bit.
pub fn r_h(t: f64, s: f64, hurst: Hurst) -> Result<f64> {
    if !(t >= 0.0) || !(s >= 0.0) {
        return Err(PolymerError::Domain(format!(
            "r_h needs nonnegative times, got ({t}, {s})"
        )));
    }
    if hurst.is_brownian() {
        return Ok(t.min(s));
    }
    let two_h = hurst.two_h();
    Ok(0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Covariance of two fBm increments, Cov(B_b − B_a, B_d − B_c), via the
/// bilinear expansion R(b,d) − R(b,c) − R(a,d) + R(a,c).
///
/// For disjoint intervals the sign equals sign(H − 1/2): positive for H>1/2,
/// exactly zero at H=1/2, negative for H<1/2. An identical pair short-cuts to
/// the variance (b−a)^{2H}.
pub fn increment_cov(a: f64, b: f64, c: f64, d: f64, hurst: Hurst) -> Result<f64> {
    if !(0.0 <= a && a <= b) || !(0.0 <= c && c <= d) {
        return Err(PolymerError::Domain(format!(
            "increment_cov needs ordered nonnegative intervals, got [{a},{b}], [{c},{d}]"
        )));
    }
    if a == c && b == d {
        // Variance of a single increment: stationarity gives (b−a)^{2H}.
        return Ok((b - a).powf(hurst.two_h()));
    }
    if hurst.is_brownian() {
        // Independent increments: covariance is the overlap length.
        let lo = a.max(c);
        let hi = b.min(d);
        return Ok((hi - lo).max(0.0));
    }
    let bd = r_h(b, d, hurst)?;
    let bc = r_h(b, c, hurst)?;
    let ad = r_h(a, d, hurst)?;
    let ac = r_h(a, c, hurst)?;
    Ok(((bd - bc) - ad) + ac)
}

/// Exact Gaussian covariance matrix of the increments over a list of
/// (start, end) intervals on one fBm. Symmetric positive semidefinite;
/// duplicate intervals are legitimate and make it singular.
#[derive(Debug, Clone)]
pub struct IncrementGram {
    matrix: DMatrix<f64>,
}

/// Eigenvalues are allowed to undershoot zero by this much before the Gram
/// is declared broken (numerical noise on a genuinely PSD matrix).
const PSD_TOLERANCE: f64 = 1e-9;

/// The one permitted diagonal jitter before factorization failure is reported.
const PSD_JITTER: f64 = 1e-12;

impl IncrementGram {
    pub fn new(intervals: &[(f64, f64)], hurst: Hurst) -> Result<Self> {
        if intervals.is_empty() {
            return Err(PolymerError::Domain(
                "increment_gram needs at least one interval".into(),
            ));
        }
        let n = intervals.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let (a, b) = intervals[i];
                let (c, d) = intervals[j];
                let cov = increment_cov(a, b, c, d, hurst)?;
                m[(i, j)] = cov;
                m[(j, i)] = cov;
            }
        }
        Ok(IncrementGram { matrix: m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Symmetric square root A with A·Aᵀ = Gram, via eigendecomposition with
    /// tiny negative eigenvalues clamped to zero. Handles the PSD-singular
    /// case (duplicate intervals) that a plain Cholesky would reject. If the
    /// spectrum undershoots −1e-9, one diagonal jitter of 1e-12 is tried
    /// before giving up.
    pub fn sqrt(&self) -> Result<DMatrix<f64>> {
        match psd_sqrt(&self.matrix) {
            Ok(a) => Ok(a),
            Err(_) => {
                let jittered =
                    &self.matrix + DMatrix::identity(self.dim(), self.dim()) * PSD_JITTER;
                psd_sqrt(&jittered)
            }
        }
    }

    /// Smallest eigenvalue, for PSD diagnostics.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Symmetric PSD square root via eigendecomposition: V·diag(√λ⁺)·Vᵀ.
pub(crate) fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eigen = m.clone().symmetric_eigen();
    let min = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE {
        return Err(PolymerError::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let sqrt_vals = eigen.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eigen.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose())
}

/// Convenience wrapper returning the raw matrix.
pub fn increment_gram(intervals: &[(f64, f64)], hurst: Hurst) -> Result<IncrementGram> {
    IncrementGram::new(intervals, hurst)
}

/// Memory guard: total stored increments (sites × cells) per field.
const FIELD_SIZE_GUARD: usize = 100_000_000;

/// Configuration of a frozen environment realization: which sites, which
/// time grid, and which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub hurst: Hurst,
    pub dimension: usize,
    /// Sites are all x ∈ ℤ^d with sup-norm ≤ box_radius.
    pub box_radius: usize,
    pub t_max: f64,
    pub grid_step: f64,
    pub seed: u64,
}

impl EnvConfig {
    /// Number of grid cells m = t_max / grid_step; errors unless that ratio
    /// is a positive integer (within 1e-9).
    pub fn cells(&self) -> Result<usize> {
        if !(self.t_max > 0.0) || !(self.grid_step > 0.0) {
            return Err(PolymerError::InvalidConfig(format!(
                "t_max and grid_step must be positive, got {} and {}",
                self.t_max, self.grid_step
            )));
        }
        let ratio = self.t_max / self.grid_step;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 || m < 1.0 {
            return Err(PolymerError::InvalidConfig(format!(
                "t_max / grid_step = {ratio} is not a positive integer"
            )));
        }
        Ok(m as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(PolymerError::InvalidConfig("dimension must be ≥ 1".into()));
        }
        let m = self.cells()?;
        let sites = self.site_count()?;
        if sites.saturating_mul(m) > FIELD_SIZE_GUARD {
            return Err(PolymerError::InvalidConfig(format!(
                "field of {sites} sites × {m} cells exceeds the size guard"
            )));
        }
        Ok(())
    }

    /// (2L+1)^d, guarded against overflow.
    pub fn site_count(&self) -> Result<usize> {
        let side = 2 * self.box_radius + 1;
        let mut total: usize = 1;
        for _ in 0..self.dimension {
            total = total.checked_mul(side).ok_or_else(|| {
                PolymerError::InvalidConfig("site box overflows usize".into())
            })?;
            if total > FIELD_SIZE_GUARD {
                return Err(PolymerError::InvalidConfig(
                    "site box exceeds the size guard".into(),
                ));
            }
        }
        Ok(total)
    }

    /// All sites of the box in a fixed lexicographic order (last coordinate
    /// fastest). This order defines site indices everywhere in the crate.
    pub fn sites(&self) -> Result<Vec<Vec<i32>>> {
        let n = self.site_count()?;
        let l = self.box_radius as i32;
        let d = self.dimension;
        let mut out = Vec::with_capacity(n);
        let mut current = vec![-l; d];
        loop {
            out.push(current.clone());
            // odometer increment
            let mut k = d;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                if current[k] < l {
                    current[k] += 1;
                    for c in current.iter_mut().skip(k + 1) {
                        *c = -l;
                    }
                    break;
                }
            }
        }
    }

    /// Index of a site in the `sites()` order, or None if outside the box.
    pub fn site_index(&self, site: &[i32]) -> Option<usize> {
        if site.len() != self.dimension {
            return None;
        }
        let l = self.box_radius as i32;
        let side = (2 * self.box_radius + 1) as usize;
        let mut idx = 0usize;
        for &x in site {
            if x < -l || x > l {
                return None;
            }
            idx = idx * side + (x + l) as usize;
        }
        Some(idx)
    }

    /// The grid cells as intervals [(k·h, (k+1)·h)].
    pub fn grid_intervals(&self) -> Result<Vec<(f64, f64)>> {
        let m = self.cells()?;
        let h = self.grid_step;
        Ok((0..m)
            .map(|k| (k as f64 * h, (k + 1) as f64 * h))
            .collect())
    }

    /// Hex digest of the full configuration, embedded in serialized fields
    /// and output rows for cache validation.
    pub fn digest(&self) -> String {
        hex_digest(self)
    }
}

/// A frozen realization of the environment: per site, the m jointly Gaussian
/// grid increments ΔB^x_k = B^x_{(k+1)h} − B^x_{kh}. Distinct sites are
/// independent. Immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvField {
    config: EnvConfig,
    /// increments[site_index][cell]
    increments: Vec<Vec<f64>>,
}

/// Serialized form: self-describing JSON blob with the digest embedded.
#[derive(Serialize, Deserialize)]
struct EnvFieldBlob {
    config: EnvConfig,
    digest: String,
    sites: Vec<Vec<i32>>,
    increments: Vec<Vec<f64>>,
}

impl EnvField {
    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// The all-zero field with the given geometry, used as the degenerate
    /// test environment (partition functions collapse to their combinatorial
    /// part).
    pub fn zeros(config: EnvConfig) -> Result<EnvField> {
        config.validate()?;
        let m = config.cells()?;
        let n = config.site_count()?;
        Ok(EnvField {
            config,
            increments: vec![vec![0.0; m]; n],
        })
    }

    /// Assemble a field from already-sampled increments in canonical site
    /// order. Internal: correlated-environment samplers use this.
    pub(crate) fn from_parts(config: EnvConfig, increments: Vec<Vec<f64>>) -> EnvField {
        EnvField { config, increments }
    }

    /// Grid increments at a site, None outside the box.
    pub fn increments_at(&self, site: &[i32]) -> Option<&[f64]> {
        let idx = self.config.site_index(site)?;
        Some(&self.increments[idx])
    }

    /// Grid increments by site index (the `EnvConfig::sites()` order).
    pub fn by_index(&self, site_index: usize) -> &[f64] {
        &self.increments[site_index]
    }

    pub fn to_json(&self) -> Result<String> {
        let blob = EnvFieldBlob {
            config: self.config.clone(),
            digest: self.config.digest(),
            sites: self.config.sites()?,
            increments: self.increments.clone(),
        };
        Ok(serde_json::to_string(&blob)?)
    }

    pub fn from_json(s: &str) -> Result<EnvField> {
        let blob: EnvFieldBlob = serde_json::from_str(s)?;
        if blob.digest != blob.config.digest() {
            return Err(PolymerError::InvalidConfig(format!(
                "field blob digest {} does not match its configuration (expected {})",
                blob.digest,
                blob.config.digest()
            )));
        }
        let m = blob.config.cells()?;
        let n = blob.config.site_count()?;
        if blob.increments.len() != n || blob.increments.iter().any(|v| v.len() != m) {
            return Err(PolymerError::InvalidConfig(
                "field blob increment shape does not match its configuration".into(),
            ));
        }
        if blob.sites != blob.config.sites()? {
            return Err(PolymerError::InvalidConfig(
                "field blob site list does not match the canonical box order".into(),
            ));
        }
        Ok(EnvField {
            config: blob.config,
            increments: blob.increments,
        })
    }
}

/// Reusable sampler: factorizes the time Gram once, then draws any number of
/// replicas. Each (replica, site) pair owns a dedicated RNG substream, so
/// replicas may be drawn concurrently and in any order with identical
/// results.
pub struct EnvSampler {
    config: EnvConfig,
    factor: DMatrix<f64>,
    n_sites: usize,
    cells: usize,
}

impl EnvSampler {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let gram = IncrementGram::new(&config.grid_intervals()?, config.hurst)?;
        let factor = gram.sqrt()?;
        let n_sites = config.site_count()?;
        let cells = config.cells()?;
        Ok(EnvSampler {
            config,
            factor,
            n_sites,
            cells,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// Draw replica number `replica`. Bit-identical for identical
    /// (config, seed, replica).
    pub fn sample(&self, replica: u64) -> EnvField {
        let mut increments = Vec::with_capacity(self.n_sites);
        for site_idx in 0..self.n_sites {
            let mut rng = substream(
                self.config.seed,
                rng_domain::ENV,
                replica,
                site_idx as u64,
            );
            let z: Vec<f64> = (0..self.cells)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let zv = nalgebra::DVector::from_vec(z);
            let inc = &self.factor * zv;
            increments.push(inc.iter().copied().collect());
        }
        EnvField {
            config: self.config.clone(),
            increments,
        }
    }
}

/// One-shot sampling; prefer `EnvSampler` when drawing many replicas.
pub fn sample_env(config: &EnvConfig, replica: u64) -> Result<EnvField> {
    Ok(EnvSampler::new(config.clone())?.sample(replica))
}
