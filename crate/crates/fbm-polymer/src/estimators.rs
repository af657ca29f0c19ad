//! Statistical layer over the exact per-environment solvers: Monte Carlo
//! estimates of Û(t) = 𝔼 log û(t), Lyapunov traces with weighted
//! least-squares slopes, super-additivity defects, the almost-super-additive
//! limit diagnostic, the concentration tail check, and the quantization
//! sandwich between integer horizons.
//!
//! The unit of parallelism is the environment replica: each replica samples
//! a field, runs the dynamic program, and returns one log partition value.
//! Reductions are fixed-order pairwise sums over the replica-ordered vector,
//! so results are bit-identical at any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::digest::hex_digest;
use crate::env::{EnvConfig, EnvField, EnvSampler, Hurst};
use crate::error::{PolymerError, Result};
use crate::numeric::{mean_and_se, mix64};
use crate::polymer::dp_partition;
use crate::walk::{jump_cap, TruncationSpec};

/// One Monte Carlo estimate with its provenance: the seed and a digest of
/// every parameter that influenced the number.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRecord {
    pub value: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub seed: u64,
    pub config_digest: String,
}

/// Model parameters shared by every estimator: the environment law, the
/// walk's jump rate and dimension, the time discretization, and the
/// zero-field test injection that replaces sampled fields by zeros.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimatorParams {
    pub hurst: Hurst,
    pub kappa: f64,
    pub dimension: usize,
    pub grid_step: f64,
    pub zero_field: bool,
}

#[derive(Serialize)]
struct EstimateKey<'a> {
    op: &'static str,
    t: f64,
    params: &'a EstimatorParams,
    env_replicas: u64,
    seed: u64,
    truncated: bool,
}

/// Environment geometry for horizon `t`: the box radius is exactly the
/// walk's maximal reach min(cap, cells), so no probability mass is clipped
/// and no unused sites are sampled. Also returns the jump cap for `t`.
///
/// The environment seed is derived from (seed, cells) so that estimates at
/// different horizons use statistically independent fields, while truncated
/// and untruncated runs at the same horizon share fields replica-by-replica.
pub(crate) fn env_config_for(t: f64, params: &EstimatorParams, seed: u64) -> Result<(EnvConfig, u64)> {
    let spec = TruncationSpec::new(params.hurst, params.kappa)?;
    let cap = jump_cap(t, &spec)?;
    let cells = t / params.grid_step;
    let cells_round = cells.round();
    if (cells - cells_round).abs() > 1e-9 || cells_round < 1.0 {
        return Err(PolymerError::InvalidConfig(format!(
            "horizon {t} is not a whole number of grid cells of step {}",
            params.grid_step
        )));
    }
    let cells = cells_round as usize;
    let radius = (cap as usize).min(cells);
    let config = EnvConfig {
        hurst: params.hurst,
        dimension: params.dimension,
        box_radius: radius,
        t_max: t,
        grid_step: params.grid_step,
        seed: mix64(seed ^ mix64(cells as u64)),
    };
    config.validate()?;
    Ok((config, cap))
}

/// Per-replica log partition values at horizon `t`, replica-ordered. The
/// cap, when given, is applied inside the solver; `None` gives the
/// untruncated u(t).
pub fn replica_log_partitions(
    t: f64,
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
    cap: Option<u64>,
) -> Result<Vec<f64>> {
    if env_replicas < 2 {
        return Err(PolymerError::Domain(
            "need at least 2 environment replicas for a spread estimate".into(),
        ));
    }
    let (config, _) = env_config_for(t, params, seed)?;
    if params.zero_field {
        let env = EnvField::zeros(config)?;
        let log_u = dp_partition(&env, params.kappa, cap)?.log_u;
        return Ok(vec![log_u; env_replicas as usize]);
    }
    let sampler = EnvSampler::new(config)?;
    (0..env_replicas)
        .into_par_iter()
        .map(|rep| {
            let env = sampler.sample(rep);
            Ok(dp_partition(&env, params.kappa, cap)?.log_u)
        })
        .collect()
}

/// Û(t) (or U(t) with `truncated = false`): the mean over environment
/// replicas of log dp_partition, with the cap 𝔑_t from the truncation rule.
#[allow(non_snake_case)] // named after the quantity U(t) = E log u(t)
pub fn estimate_U(
    t: f64,
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
    truncated: bool,
) -> Result<EstimateRecord> {
    let (_, cap) = env_config_for(t, params, seed)?;
    let logs = replica_log_partitions(t, params, env_replicas, seed, truncated.then_some(cap))?;
    let (value, std_error) = mean_and_se(&logs);
    Ok(EstimateRecord {
        value,
        std_error,
        replicas: env_replicas,
        seed,
        config_digest: hex_digest(&EstimateKey {
            op: "estimate_U",
            t,
            params,
            env_replicas,
            seed,
            truncated,
        }),
    })
}

/// A Lyapunov trace: per-horizon estimates of (1/t)·Û(t) and the weighted
/// least-squares line fitted to Û(t) against t.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovTrace {
    pub t_grid: Vec<f64>,
    /// Records of (1/t)·Û(t); `value·t` recovers Û(t).
    pub per_t: Vec<EstimateRecord>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    /// 95% confidence interval for the slope (±1.96 standard errors).
    pub slope_ci95: (f64, f64),
}

impl LyapunovTrace {
    /// Û(t) values (undoing the 1/t normalization of the records).
    pub fn u_hat(&self) -> Vec<f64> {
        self.t_grid
            .iter()
            .zip(&self.per_t)
            .map(|(t, r)| t * r.value)
            .collect()
    }

    /// The (1/(t·√log t))-normalized trace, the §-free boundedness
    /// diagnostic for sub-(t√log t) growth. Requires t > 1 throughout.
    pub fn sqrt_log_normalized(&self) -> Vec<(f64, f64)> {
        self.t_grid
            .iter()
            .zip(&self.per_t)
            .map(|(&t, r)| (t, r.value / t.ln().sqrt()))
            .collect()
    }
}

/// Weighted least squares of y against x with per-point standard errors.
/// Returns (slope, intercept, slope standard error). Zero errors (exact
/// points) are floored at 1e-12 to keep weights finite.
pub fn wls_line(x: &[f64], y: &[f64], se: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() != se.len() || x.len() < 3 {
        return Err(PolymerError::Domain(
            "weighted fit needs at least 3 points with matching lengths".into(),
        ));
    }
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let sigma = se[i].max(1e-12);
        let w = 1.0 / (sigma * sigma);
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    let delta = s * sxx - sx * sx;
    if delta <= 0.0 {
        return Err(PolymerError::Domain("degenerate abscissa grid in fit".into()));
    }
    let slope = (s * sxy - sx * sy) / delta;
    let intercept = (sxx * sy - sx * sxy) / delta;
    let slope_se = (s / delta).sqrt();
    Ok((slope, intercept, slope_se))
}

/// Per-horizon truncated estimates plus a weighted least-squares fit of
/// Û(t) against t. The grid must be strictly increasing and within the desk
/// guard t ≤ 32.
pub fn lyapunov_trace(
    t_grid: &[f64],
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
) -> Result<LyapunovTrace> {
    if t_grid.len() < 3 {
        return Err(PolymerError::Domain("need at least 3 horizons".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(PolymerError::Domain("horizon grid must be strictly increasing".into()));
        }
    }
    if t_grid.iter().any(|&t| t > 32.0) {
        return Err(PolymerError::Domain("horizon grid exceeds the desk guard t ≤ 32".into()));
    }
    let per_t: Vec<EstimateRecord> = t_grid
        .iter()
        .map(|&t| -> Result<EstimateRecord> {
            let rec = estimate_U(t, params, env_replicas, seed, true)?;
            Ok(EstimateRecord {
                value: rec.value / t,
                std_error: rec.std_error / t,
                ..rec
            })
        })
        .collect::<Result<_>>()?;
    let u_hat: Vec<f64> = t_grid.iter().zip(&per_t).map(|(t, r)| t * r.value).collect();
    let u_se: Vec<f64> = t_grid.iter().zip(&per_t).map(|(t, r)| t * r.std_error).collect();
    let (slope, intercept, slope_se) = wls_line(t_grid, &u_hat, &u_se)?;
    Ok(LyapunovTrace {
        t_grid: t_grid.to_vec(),
        per_t,
        slope,
        intercept,
        slope_std_error: slope_se,
        slope_ci95: (slope - 1.96 * slope_se, slope + 1.96 * slope_se),
    })
}

/// One super-additivity defect D = Û(n+m+1) − Û(n) − Û(m) together with its
/// normalization by (n+m)^H·√log(n+m). The three estimates use disjoint
/// seed lanes (fields at different horizons are independent), so the defect
/// standard error is the root sum of squares.
#[derive(Debug, Clone, Serialize)]
pub struct DefectRecord {
    pub n: u64,
    pub m: u64,
    pub u_n: EstimateRecord,
    pub u_m: EstimateRecord,
    pub u_joint: EstimateRecord,
    pub defect: f64,
    pub defect_std_error: f64,
    pub normalized_defect: f64,
    pub normalized_std_error: f64,
}

/// Super-additivity defect at integer horizons n, m ≥ 2. A lower bound
/// −c·(n+m)^H√log(n+m) on the defect is the almost-super-additivity the
/// partition function obeys; the normalized defect is therefore expected to
/// be bounded below by a single constant −c across (n,m).
pub fn superadditivity_defect(
    n: u64,
    m: u64,
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
) -> Result<DefectRecord> {
    if n < 2 || m < 2 {
        return Err(PolymerError::Domain("defect needs n, m ≥ 2".into()));
    }
    if n + m + 1 > 32 {
        return Err(PolymerError::Domain("joint horizon exceeds the desk guard t ≤ 32".into()));
    }
    let u_n = estimate_U(n as f64, params, env_replicas, seed, true)?;
    let u_m = estimate_U(m as f64, params, env_replicas, seed, true)?;
    let u_joint = estimate_U((n + m + 1) as f64, params, env_replicas, seed, true)?;
    let defect = u_joint.value - u_n.value - u_m.value;
    let defect_se = (u_joint.std_error.powi(2) + u_n.std_error.powi(2) + u_m.std_error.powi(2))
        .sqrt();
    let scale = ((n + m) as f64).powf(params.hurst.two_h() / 2.0)
        * ((n + m) as f64).ln().sqrt();
    Ok(DefectRecord {
        n,
        m,
        defect,
        defect_std_error: defect_se,
        normalized_defect: defect / scale,
        normalized_std_error: defect_se / scale,
        u_n,
        u_m,
        u_joint,
    })
}

/// Trend report for a sequence f(1..N) that is super-additive up to an
/// error sequence ε: the f(n)/n trace with running extrema, the ε(n)/n
/// decay diagnostic, the dyadic partial sums Σ_{k≤K} ε(2^k)/2^k, and a
/// desk-scale divergence flag for f(n)/n.
#[derive(Debug, Clone, Serialize)]
pub struct FeketeDiagnostic {
    pub ratios: Vec<f64>,
    pub running_max: Vec<f64>,
    pub running_min: Vec<f64>,
    pub limit_estimate: f64,
    pub eps_over_n: Vec<f64>,
    pub eps_over_n_final: f64,
    pub dyadic_partial_sums: Vec<f64>,
    pub diverging: bool,
}

/// Almost-super-additive limit diagnostic. `values[i]` is f(i+1) and
/// `eps[i]` is ε(i+1). The divergence flag compares successive dyadic
/// increments of f(n)/n: a convergent sequence has decaying increments,
/// while e.g. f(n) = n·log n gains a constant ln 2 per doubling.
pub fn fekete_limit_diagnostic(values: &[f64], eps: &[f64]) -> Result<FeketeDiagnostic> {
    let n = values.len();
    if n < 4 || eps.len() != n {
        return Err(PolymerError::Domain(
            "limit diagnostic needs matched sequences of length ≥ 4".into(),
        ));
    }
    let ratios: Vec<f64> = values.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).collect();
    let mut running_max = Vec::with_capacity(n);
    let mut running_min = Vec::with_capacity(n);
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for &r in &ratios {
        hi = hi.max(r);
        lo = lo.min(r);
        running_max.push(hi);
        running_min.push(lo);
    }
    let eps_over_n: Vec<f64> = eps.iter().enumerate().map(|(i, e)| e / (i + 1) as f64).collect();
    let mut dyadic_partial_sums = Vec::new();
    let mut acc = 0.0;
    let mut k = 1usize; // 2^0 = 1 is f(1); condition (ii) sums ε(2^k)/2^k
    while k <= n {
        acc += eps[k - 1] / k as f64;
        dyadic_partial_sums.push(acc);
        k *= 2;
    }
    // Dyadic increments of f(n)/n: convergence needs them to decay.
    let mut dyadic_ratios = Vec::new();
    let mut k = 1usize;
    while k <= n {
        dyadic_ratios.push(ratios[k - 1]);
        k *= 2;
    }
    let diffs: Vec<f64> = dyadic_ratios.windows(2).map(|w| w[1] - w[0]).collect();
    let diverging = match diffs.len() {
        0 | 1 => false,
        l => {
            let last = diffs[l - 1];
            let prev = diffs[l - 2];
            // Positive increments that are not shrinking by at least 5% per
            // doubling signal a non-summable (diverging) trend.
            last > 1e-12 && last >= 0.95 * prev
        }
    };
    Ok(FeketeDiagnostic {
        limit_estimate: ratios[n - 1],
        ratios,
        running_max,
        running_min,
        eps_over_n_final: eps_over_n[n - 1],
        eps_over_n,
        dyadic_partial_sums,
        diverging,
    })
}

/// Fraction of values outside [center−threshold, center+threshold].
pub fn exceedance_frequency(values: &[f64], center: f64, threshold: f64) -> f64 {
    let count = values.iter().filter(|v| (*v - center).abs() > threshold).count();
    count as f64 / values.len() as f64
}

/// Concentration tail check at integer horizon n: the frequency of
/// |log û(n) − pooled mean| > 2·n^H·√log n across environment replicas is
/// compared against the tail estimate 2·n^{−2} plus 3 binomial standard
/// errors. The pooled sample mean stands in for the unknown Û(n); its
/// O(1/√replicas) bias is negligible against the threshold.
pub fn concentration_check(
    n: u64,
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
) -> Result<BoundReport> {
    if env_replicas < 200 {
        return Err(PolymerError::Domain(
            "concentration check needs at least 200 replicas".into(),
        ));
    }
    if n < 2 {
        return Err(PolymerError::Domain("concentration check needs n ≥ 2".into()));
    }
    let t = n as f64;
    let (_, cap) = env_config_for(t, params, seed)?;
    let logs = replica_log_partitions(t, params, env_replicas, seed, Some(cap))?;
    let (center, _) = mean_and_se(&logs);
    let threshold = 2.0 * t.powf(params.hurst.value()) * t.ln().sqrt();
    let freq = exceedance_frequency(&logs, center, threshold);
    let bound = 2.0 * t.powi(-2);
    let binomial_se = (freq * (1.0 - freq) / env_replicas as f64).sqrt();
    Ok(BoundReport::new(
        "concentration_tail",
        format!(
            "n={n} H={} kappa={} replicas={env_replicas} threshold={threshold:.6}",
            params.hurst.value(),
            params.kappa
        ),
        bound,
        freq,
        3.0 * binomial_se,
    ))
}

/// The quantization sandwich at a non-integer horizon t with n = ⌊t⌋:
/// Û(n) − K√log n ≤ Û(t) ≤ Û(n+1) + K√log t. `min_feasible_k` is the
/// smallest K ≥ 0 making both sides hold for this t.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichRecord {
    pub t: f64,
    pub u_floor: EstimateRecord,
    pub u_t: EstimateRecord,
    pub u_ceil: EstimateRecord,
    pub min_feasible_k: f64,
}

impl SandwichRecord {
    /// Pass/fail against a fitted budget for K̂ (shared across a test grid).
    pub fn report(&self, k_budget: f64) -> BoundReport {
        BoundReport::new(
            "quantization_sandwich",
            format!("t={}", self.t),
            k_budget,
            self.min_feasible_k,
            0.0,
        )
    }
}

/// Estimates the three horizons of the sandwich and the minimal feasible K̂.
/// Requires n = ⌊t⌋ ≥ 2; integer t degenerates to K̂ = 0 on the left side.
pub fn quantization_sandwich(
    t: f64,
    params: &EstimatorParams,
    env_replicas: u64,
    seed: u64,
) -> Result<SandwichRecord> {
    let n = t.floor();
    if n < 2.0 {
        return Err(PolymerError::Domain("sandwich needs ⌊t⌋ ≥ 2".into()));
    }
    let u_floor = estimate_U(n, params, env_replicas, seed, true)?;
    let u_t = estimate_U(t, params, env_replicas, seed, true)?;
    let u_ceil = estimate_U(n + 1.0, params, env_replicas, seed, true)?;
    let left_need = (u_floor.value - u_t.value) / n.ln().sqrt();
    let right_need = (u_t.value - u_ceil.value) / t.ln().sqrt();
    Ok(SandwichRecord {
        t,
        u_floor,
        u_t,
        u_ceil,
        min_feasible_k: left_need.max(right_need).max(0.0),
    })
}
