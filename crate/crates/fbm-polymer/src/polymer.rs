//! The polymer action, its exact Gaussian law per path, and exact partition
//! solvers on the grid-discretized model.
//!
//! For a fixed walk path the action ∫₀ᵗ dB^{X(s)}_s is the sum of environment
//! increments over the occupied segments; it is Gaussian with a variance that
//! only same-site segment pairs contribute to (distinct sites are
//! independent). The partition function u(t) = E^X[exp(action)] is computed
//! exactly on the Bernoulli-per-cell discretization two independent ways — a
//! forward dynamic program in log domain, and brute-force enumeration — which
//! must agree to near machine precision.

use rayon::prelude::*;
use serde::Serialize;

use crate::digest::hex_digest;
use crate::env::{increment_cov, EnvField, Hurst};
use crate::error::{PolymerError, Result};
use crate::estimators::EstimateRecord;
use crate::numeric::{logsumexp, logsumexp2, mean_and_se, rng_domain, substream};
use crate::walk::{enumerate_grid_paths, sample_path, segments, skeleton_positions, WalkPath};

/// The Gaussian sum ∫₀ᵗ dB^{X(s)}_s for one path in one environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAction {
    pub value: f64,
}

/// A partition-function value. `log_u` is the primary representation; `u`
/// may overflow to infinity for strong environments and long horizons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValue {
    pub u: f64,
    pub log_u: f64,
    /// Whether the jump-count indicator 𝟙{jumps ≤ cap} was requested.
    pub truncated: bool,
}

impl PartitionValue {
    fn from_log(log_u: f64, truncated: bool) -> PartitionValue {
        PartitionValue {
            u: log_u.exp(),
            log_u,
            truncated,
        }
    }
}

/// Largest admissible per-cell jump probability p = κ·h. Beyond this the
/// Bernoulli-per-cell model drifts too far from the Poisson clock it
/// discretizes.
pub const MAX_P_JUMP: f64 = 0.2;

/// Grid tolerance when snapping path jump times to environment cells.
const GRID_SNAP_TOL: f64 = 1e-9;

/// Sum the environment increments along a path whose jump times lie on the
/// environment grid. Errors on off-grid jump times, horizons beyond the
/// field, or sites outside the box.
pub fn path_action(path: &WalkPath, env: &EnvField) -> Result<PathAction> {
    let cfg = env.config();
    let h = cfg.grid_step;
    let m_env = cfg.cells()?;
    let ratio = path.horizon / h;
    let m_path = ratio.round();
    if (ratio - m_path).abs() > GRID_SNAP_TOL || m_path < 1.0 {
        return Err(PolymerError::OffGrid(format!(
            "horizon {} is not a whole number of grid cells of step {h}",
            path.horizon
        )));
    }
    let m_path = m_path as usize;
    if m_path > m_env {
        return Err(PolymerError::OffGrid(format!(
            "path horizon {} exceeds the field horizon {}",
            path.horizon, cfg.t_max
        )));
    }
    for &t in &path.jump_times {
        let k = (t / h).round();
        if (t / h - k).abs() > GRID_SNAP_TOL {
            return Err(PolymerError::OffGrid(format!(
                "jump time {t} does not lie on the grid of step {h}"
            )));
        }
    }
    let mut value = 0.0;
    let mut j = 0usize;
    for k in 0..m_path {
        let cell_start = k as f64 * h;
        while j < path.jump_times.len() && path.jump_times[j] <= cell_start + GRID_SNAP_TOL {
            j += 1;
        }
        let site = &path.sites[j];
        let increments = env.increments_at(site).ok_or_else(|| {
            PolymerError::OffGrid(format!("site {site:?} lies outside the environment box"))
        })?;
        value += increments[k];
    }
    Ok(PathAction { value })
}

/// Exact Var(path action) from the continuous-time segment layout: the
/// double sum of increment covariances over same-site segment pairs, using
/// exact jump times (no grid involved).
pub fn path_variance(path: &WalkPath, hurst: Hurst) -> Result<f64> {
    let segs = segments(path);
    let mut var = 0.0;
    for intervals in segs.values() {
        for (i, &(a, b)) in intervals.iter().enumerate() {
            var += increment_cov(a, b, a, b, hurst)?;
            for &(c, d) in intervals.iter().skip(i + 1) {
                var += 2.0 * increment_cov(a, b, c, d, hurst)?;
            }
        }
    }
    Ok(var)
}

/// Shared validation for the grid solvers: returns (cells, p_jump, reach).
fn solver_geometry(env: &EnvField, kappa: f64, cap: Option<u64>) -> Result<(usize, f64, usize)> {
    let cfg = env.config();
    let m = cfg.cells()?;
    if !(kappa > 0.0) {
        return Err(PolymerError::Domain(format!(
            "jump rate must be positive, got {kappa}"
        )));
    }
    let p = kappa * cfg.grid_step;
    if p > MAX_P_JUMP {
        return Err(PolymerError::InvalidConfig(format!(
            "per-cell jump probability κ·h = {p} exceeds the guard {MAX_P_JUMP}"
        )));
    }
    // The walk makes at most one jump per cell, so it can never travel
    // further than min(cap, m); the box must contain that reach exactly so
    // no probability mass is clipped.
    let reach = cap.map(|c| (c as usize).min(m)).unwrap_or(m);
    if cfg.box_radius < reach {
        return Err(PolymerError::BoxTooSmall {
            radius: cfg.box_radius,
            reach,
        });
    }
    Ok((m, p, reach))
}

/// Neighbour site indices (2d per site, None where the neighbour leaves the
/// box) in the canonical site order.
fn neighbour_table(env: &EnvField) -> Result<Vec<Vec<Option<usize>>>> {
    let cfg = env.config();
    let sites = cfg.sites()?;
    let d = cfg.dimension;
    let mut table = Vec::with_capacity(sites.len());
    for site in &sites {
        let mut row = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [1i32, -1] {
                let mut n = site.clone();
                n[axis] += step;
                row.push(cfg.site_index(&n));
            }
        }
        table.push(row);
    }
    Ok(table)
}

/// Exact E^X[exp(action)·𝟙{jumps ≤ cap}] on the grid model by forward
/// recursion in log domain.
///
/// The decision at the start of cell k either keeps the walk in place
/// (probability 1−p) or moves it to one of the 2d neighbours (p/(2d) each),
/// after which the walk collects the increment of the occupied site for that
/// cell. A cap ≥ m can never bind (at most one jump per cell) and is treated
/// exactly like no cap, including the arithmetic, so truncated and
/// untruncated runs are bit-identical in that regime.
pub fn dp_partition(env: &EnvField, kappa: f64, cap: Option<u64>) -> Result<PartitionValue> {
    let (m, p, _) = solver_geometry(env, kappa, cap)?;
    let effective_cap = cap.filter(|&c| (c as usize) < m);
    let log_u = match effective_cap {
        None => dp_uncapped(env, m, p)?,
        Some(c) => dp_capped(env, m, p, c as usize)?,
    };
    Ok(PartitionValue::from_log(log_u, cap.is_some()))
}

fn dp_uncapped(env: &EnvField, m: usize, p: f64) -> Result<f64> {
    let cfg = env.config();
    let n_sites = cfg.site_count()?;
    let neighbours = neighbour_table(env)?;
    let log_stay = (1.0 - p).ln();
    let log_jump = (p / (2.0 * cfg.dimension as f64)).ln();
    let origin = cfg
        .site_index(&vec![0; cfg.dimension])
        .expect("origin is always inside the box");

    let mut logw = vec![f64::NEG_INFINITY; n_sites];
    logw[origin] = 0.0;
    let mut next = vec![f64::NEG_INFINITY; n_sites];
    for k in 0..m {
        for x in 0..n_sites {
            let mut acc = if logw[x] > f64::NEG_INFINITY {
                logw[x] + log_stay
            } else {
                f64::NEG_INFINITY
            };
            for y in neighbours[x].iter().flatten() {
                if logw[*y] > f64::NEG_INFINITY {
                    acc = logsumexp2(acc, logw[*y] + log_jump);
                }
            }
            next[x] = if acc > f64::NEG_INFINITY {
                acc + env.by_index(x)[k]
            } else {
                f64::NEG_INFINITY
            };
        }
        std::mem::swap(&mut logw, &mut next);
    }
    Ok(logsumexp(&logw))
}

fn dp_capped(env: &EnvField, m: usize, p: f64, cap: usize) -> Result<f64> {
    let cfg = env.config();
    let n_sites = cfg.site_count()?;
    let neighbours = neighbour_table(env)?;
    let log_stay = (1.0 - p).ln();
    let log_jump = (p / (2.0 * cfg.dimension as f64)).ln();
    let origin = cfg
        .site_index(&vec![0; cfg.dimension])
        .expect("origin is always inside the box");

    let width = cap + 1;
    // state (site, jumps used): logw[site * width + j]
    let mut logw = vec![f64::NEG_INFINITY; n_sites * width];
    logw[origin * width] = 0.0;
    let mut next = vec![f64::NEG_INFINITY; n_sites * width];
    for k in 0..m {
        for x in 0..n_sites {
            let field = env.by_index(x)[k];
            for j in 0..width {
                let mut acc = if logw[x * width + j] > f64::NEG_INFINITY {
                    logw[x * width + j] + log_stay
                } else {
                    f64::NEG_INFINITY
                };
                if j > 0 {
                    for y in neighbours[x].iter().flatten() {
                        let w = logw[y * width + (j - 1)];
                        if w > f64::NEG_INFINITY {
                            acc = logsumexp2(acc, w + log_jump);
                        }
                    }
                }
                next[x * width + j] = if acc > f64::NEG_INFINITY {
                    acc + field
                } else {
                    f64::NEG_INFINITY
                };
            }
        }
        std::mem::swap(&mut logw, &mut next);
        next.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
    }
    Ok(logsumexp(&logw))
}

/// Exhaustive Σ_paths probability · exp(action) · 𝟙{jumps ≤ cap}: the
/// enumeration oracle the dynamic program is checked against.
pub fn brute_force_partition(
    env: &EnvField,
    kappa: f64,
    cap: Option<u64>,
) -> Result<PartitionValue> {
    let (m, p, _) = solver_geometry(env, kappa, cap)?;
    let cfg = env.config();
    let d = cfg.dimension;
    let log_stay = (1.0 - p).ln();
    let log_jump = (p / (2.0 * d as f64)).ln();
    let mut terms = Vec::new();
    for (decisions, _) in enumerate_grid_paths(m, d, p)? {
        let jumps = decisions.iter().filter(|&&c| c != 0).count();
        if let Some(c) = cap {
            if jumps as u64 > c {
                continue;
            }
        }
        // Same log-probability expression as the DP, for bit-level parity.
        let log_prob = (m - jumps) as f64 * log_stay + jumps as f64 * log_jump;
        let mut action = 0.0;
        for (k, site) in skeleton_positions(&decisions, d).iter().enumerate() {
            let increments = env.increments_at(site).ok_or_else(|| {
                PolymerError::OffGrid(format!(
                    "site {site:?} lies outside the environment box"
                ))
            })?;
            action += increments[k];
        }
        terms.push(log_prob + action);
    }
    Ok(PartitionValue::from_log(logsumexp(&terms), cap.is_some()))
}

#[derive(Serialize)]
struct AnnealedKey {
    op: &'static str,
    kappa: f64,
    t: f64,
    hurst: Hurst,
    dimension: usize,
    replicas: u64,
    seed: u64,
}

/// Monte Carlo over walk paths of exp(½·Var(action)), which equals the
/// annealed mean 𝔼u(t) exactly in expectation: the Gaussian environment is
/// integrated out analytically per path, so the only randomness left is the
/// walk. At H = 1/2 every path has variance exactly t and the estimator is
/// deterministic.
pub fn annealed_mean(
    kappa: f64,
    t: f64,
    hurst: Hurst,
    dimension: usize,
    replicas: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    if replicas == 0 {
        return Err(PolymerError::Domain("annealed_mean needs replicas ≥ 1".into()));
    }
    let values = (0..replicas)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = substream(seed, rng_domain::WALK, rep, 0);
            let path = sample_path(kappa, t, dimension, &mut rng)?;
            Ok((0.5 * path_variance(&path, hurst)?).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = mean_and_se(&values);
    Ok(EstimateRecord {
        value: mean,
        std_error: se,
        replicas,
        seed,
        config_digest: hex_digest(&AnnealedKey {
            op: "annealed_mean",
            kappa,
            t,
            hurst,
            dimension,
            replicas,
            seed,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, EnvField, EnvSampler};
    use approx::assert_abs_diff_eq;

    fn h(v: f64) -> Hurst {
        Hurst::new(v).unwrap()
    }

    fn config(hv: f64, radius: usize, m: usize, step: f64, seed: u64) -> EnvConfig {
        EnvConfig {
            hurst: h(hv),
            dimension: 1,
            box_radius: radius,
            t_max: m as f64 * step,
            grid_step: step,
            seed,
        }
    }

    #[test]
    fn action_on_zero_environment_vanishes() {
        let env = EnvField::zeros(config(0.75, 3, 6, 0.2, 0)).unwrap();
        let path = WalkPath {
            horizon: 1.2,
            jump_times: vec![0.2, 0.6],
            sites: vec![vec![0], vec![1], vec![0]],
        };
        assert_eq!(path_action(&path, &env).unwrap().value, 0.0);
    }

    #[test]
    fn action_of_lazy_path_is_origin_sum() {
        let sampler = EnvSampler::new(config(0.75, 2, 5, 0.2, 3)).unwrap();
        let env = sampler.sample(0);
        let path = WalkPath::constant(1.0, 1);
        let expected: f64 = env.increments_at(&[0]).unwrap().iter().sum();
        assert_abs_diff_eq!(
            path_action(&path, &env).unwrap().value,
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn action_matches_segmentwise_resummation() {
        // Independent oracle: resum increments segment by segment.
        let sampler = EnvSampler::new(config(0.3, 4, 8, 0.25, 11)).unwrap();
        let env = sampler.sample(1);
        let path = WalkPath {
            horizon: 2.0,
            jump_times: vec![0.25, 1.0, 1.75],
            sites: vec![vec![0], vec![1], vec![2], vec![1]],
        };
        let by_segments: f64 = segments(&path)
            .iter()
            .map(|(site, intervals)| {
                let inc = env.increments_at(site).unwrap();
                intervals
                    .iter()
                    .map(|&(a, b)| {
                        let k0 = (a / 0.25).round() as usize;
                        let k1 = (b / 0.25).round() as usize;
                        inc[k0..k1].iter().sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum();
        assert_abs_diff_eq!(
            path_action(&path, &env).unwrap().value,
            by_segments,
            epsilon = 1e-12
        );
    }

    #[test]
    fn action_rejects_off_grid_and_out_of_box() {
        let env = EnvField::zeros(config(0.5, 1, 4, 0.25, 0)).unwrap();
        let off_grid = WalkPath {
            horizon: 1.0,
            jump_times: vec![0.3],
            sites: vec![vec![0], vec![1]],
        };
        assert!(matches!(
            path_action(&off_grid, &env),
            Err(PolymerError::OffGrid(_))
        ));
        let out_of_box = WalkPath {
            horizon: 1.0,
            jump_times: vec![0.25, 0.5],
            sites: vec![vec![0], vec![1], vec![2]],
        };
        assert!(matches!(
            path_action(&out_of_box, &env),
            Err(PolymerError::OffGrid(_))
        ));
    }

    #[test]
    fn variance_frozen_values() {
        // Single site: Var = t^{2H}, the extremal case for H > 1/2.
        let lazy = WalkPath::constant(2.0, 1);
        assert_abs_diff_eq!(
            path_variance(&lazy, h(0.75)).unwrap(),
            2.0f64.powf(1.5),
            epsilon = 1e-12
        );
        // Brownian: variance is total time regardless of the path.
        let one_jump = WalkPath {
            horizon: 2.0,
            jump_times: vec![1.0],
            sites: vec![vec![0], vec![1]],
        };
        assert_abs_diff_eq!(path_variance(&one_jump, h(0.5)).unwrap(), 2.0, epsilon = 1e-14);
        // Round trip 0 → e₁ → 0 over [0,3] at H = 3/4: the origin is
        // occupied on [0,1] and [2,3], so the full double sum gives
        // 4 + 3^{1.5} − 2·2^{1.5} ≈ 3.5393.
        let round_trip = WalkPath {
            horizon: 3.0,
            jump_times: vec![1.0, 2.0],
            sites: vec![vec![0], vec![1], vec![0]],
        };
        let expected = 4.0 + 3.0f64.powf(1.5) - 2.0 * 2.0f64.powf(1.5);
        assert_abs_diff_eq!(
            path_variance(&round_trip, h(0.75)).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dp_on_zero_environment_is_jump_count_mass() {
        // With a zero field the partition function is the probability mass
        // the solver keeps: everything without a cap, P(Binomial(m,p) ≤ cap)
        // with one.
        let env = EnvField::zeros(config(0.75, 6, 6, 0.2, 0)).unwrap();
        for cap in [None, Some(10u64)] {
            let v = dp_partition(&env, 1.0, cap).unwrap();
            assert_abs_diff_eq!(v.log_u, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v.u, 1.0, epsilon = 1e-12);
        }
        let (m, p) = (6i32, 0.2f64);
        let binom_tail: f64 = (0..=2)
            .map(|j| {
                let choose = match j {
                    0 => 1.0,
                    1 => 6.0,
                    _ => 15.0,
                };
                choose * p.powi(j) * (1.0 - p).powi(m - j)
            })
            .sum();
        let v = dp_partition(&env, 1.0, Some(2)).unwrap();
        assert_abs_diff_eq!(v.u, binom_tail, epsilon = 1e-12);
    }

    #[test]
    fn dp_cap_zero_closed_form() {
        let sampler = EnvSampler::new(config(0.75, 6, 6, 0.2, 21)).unwrap();
        let env = sampler.sample(0);
        let p = 0.2;
        let expected: f64 =
            env.increments_at(&[0]).unwrap().iter().sum::<f64>() + 6.0 * (1.0f64 - p).ln();
        let v = dp_partition(&env, 1.0, Some(0)).unwrap();
        assert!(v.truncated);
        assert_abs_diff_eq!(v.log_u, expected, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_m1_closed_form() {
        let sampler = EnvSampler::new(config(0.3, 1, 1, 0.2, 5)).unwrap();
        let env = sampler.sample(0);
        let p = 0.2;
        let u = (1.0 - p) * env.increments_at(&[0]).unwrap()[0].exp()
            + (p / 2.0) * env.increments_at(&[1]).unwrap()[0].exp()
            + (p / 2.0) * env.increments_at(&[-1]).unwrap()[0].exp();
        let v = brute_force_partition(&env, 1.0, None).unwrap();
        assert_abs_diff_eq!(v.u, u, epsilon = 1e-12);
    }

    #[test]
    fn dp_agrees_with_enumeration_across_caps() {
        // 40 random environments, m ≤ 6, capped and uncapped.
        for seed in 0..40u64 {
            let m = 3 + (seed % 4) as usize; // 3..=6
            let hv = [0.3, 0.5, 0.75][(seed % 3) as usize];
            let sampler = EnvSampler::new(config(hv, m, m, 0.2, seed)).unwrap();
            let env = sampler.sample(seed);
            for cap in [None, Some(0u64), Some(1), Some(2), Some(m as u64)] {
                let dp = dp_partition(&env, 1.0, cap).unwrap();
                let bf = brute_force_partition(&env, 1.0, cap).unwrap();
                assert!(
                    (dp.log_u - bf.log_u).abs() <= 1e-12,
                    "seed {seed} cap {cap:?}: dp {} vs enumeration {}",
                    dp.log_u,
                    bf.log_u
                );
            }
        }
    }

    #[test]
    fn dp_monotone_in_cap() {
        let sampler = EnvSampler::new(config(0.75, 6, 6, 0.2, 9)).unwrap();
        let env = sampler.sample(2);
        let mut last = f64::NEG_INFINITY;
        for cap in 0..=6u64 {
            let v = dp_partition(&env, 1.0, Some(cap)).unwrap();
            assert!(v.log_u >= last - 1e-13, "cap {cap} decreased the value");
            last = v.log_u;
        }
        let uncapped = dp_partition(&env, 1.0, None).unwrap();
        // cap = m can never bind, so it matches the uncapped value exactly.
        assert_eq!(last, uncapped.log_u);
    }

    #[test]
    fn dp_rejects_small_box_and_large_p() {
        let env = EnvField::zeros(config(0.5, 2, 6, 0.2, 0)).unwrap();
        assert!(matches!(
            dp_partition(&env, 1.0, None),
            Err(PolymerError::BoxTooSmall { .. })
        ));
        let env = EnvField::zeros(config(0.5, 6, 6, 0.2, 0)).unwrap();
        assert!(matches!(
            dp_partition(&env, 1.5, None),
            Err(PolymerError::InvalidConfig(_))
        ));
    }

    #[test]
    fn annealed_is_deterministic_at_brownian_point() {
        // Var = t for every path, so the estimator is e^{t/2} with zero
        // spread; Monte Carlo only shuffles identical values.
        let rec = annealed_mean(1.0, 2.0, h(0.5), 1, 500, 7).unwrap();
        assert_abs_diff_eq!(rec.value, std::f64::consts::E, epsilon = 1e-12);
        assert!(rec.std_error <= 1e-12);
    }

    #[test]
    fn annealed_respects_single_site_envelope_for_upper_regime() {
        // At H = 3/4 every path variance is at most t^{2H} (the lazy path is
        // extremal), so each Monte Carlo term is ≤ e^{t^{2H}/2}, and at least
        // 1 since variances are nonnegative.
        let rec = annealed_mean(1.0, 1.0, h(0.75), 1, 2000, 13).unwrap();
        assert!(rec.value <= (0.5f64).exp() * (1.0 + 1e-12));
        assert!(rec.value >= 1.0);
    }
}
