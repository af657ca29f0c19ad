//! Continuous-time simple symmetric random walk on ℤ^d: path sampling,
//! occupation segments, the jump-count truncation, and the Bernoulli-per-cell
//! grid discretization used by the exact solvers.
//!
//! A path jumps at the events of a rate-κ Poisson process and moves to one of
//! the 2d nearest neighbours uniformly. The truncation level 𝔑_t caps the
//! jump count when estimating the truncated partition function: ⌊t²⌋ in the
//! positively-correlated regime H > 1/2, and ⌊ρκt⌋ with ρ = max{e⁶, 1/κ}
//! otherwise.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::env::Hurst;
use crate::error::{PolymerError, Result};

/// A piecewise-constant lattice trajectory over [0, horizon]: strictly
/// increasing jump times in (0, horizon) and the visited sites, starting at
/// the origin, consecutive sites differing by one unit step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub horizon: f64,
    pub jump_times: Vec<f64>,
    /// sites.len() == jump_times.len() + 1; sites[0] is the origin.
    pub sites: Vec<Vec<i32>>,
}

impl WalkPath {
    /// A path that never jumps.
    pub fn constant(horizon: f64, dimension: usize) -> WalkPath {
        WalkPath {
            horizon,
            jump_times: Vec::new(),
            sites: vec![vec![0; dimension]],
        }
    }

    pub fn jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn dimension(&self) -> usize {
        self.sites[0].len()
    }

    /// Check every structural invariant; used by tests and on deserialized
    /// input.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(PolymerError::Domain("horizon must be positive".into()));
        }
        if self.sites.len() != self.jump_times.len() + 1 {
            return Err(PolymerError::Domain(
                "a path needs exactly one more site than jump times".into(),
            ));
        }
        if self.sites[0].iter().any(|&c| c != 0) {
            return Err(PolymerError::Domain("paths start at the origin".into()));
        }
        let d = self.dimension();
        for w in self.jump_times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(PolymerError::Domain(
                    "jump times must be strictly increasing".into(),
                ));
            }
        }
        if let (Some(&first), Some(&last)) = (self.jump_times.first(), self.jump_times.last()) {
            if !(first > 0.0) || !(last < self.horizon) {
                return Err(PolymerError::Domain(
                    "jump times must lie strictly inside (0, horizon)".into(),
                ));
            }
        }
        for pair in self.sites.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.len() != d || b.len() != d {
                return Err(PolymerError::Domain("site dimension mismatch".into()));
            }
            let l1: i64 = a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| ((x as i64) - (y as i64)).abs())
                .sum();
            if l1 != 1 {
                return Err(PolymerError::Domain(
                    "consecutive sites must differ by one unit step".into(),
                ));
            }
        }
        Ok(())
    }

    /// One-line JSON encoding (horizon, jump times, unit-step deltas) for
    /// debugging and replay.
    pub fn to_json_line(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            horizon: f64,
            dimension: usize,
            jump_times: &'a [f64],
            site_deltas: Vec<Vec<i32>>,
        }
        let deltas = self
            .sites
            .windows(2)
            .map(|w| w[1].iter().zip(w[0].iter()).map(|(&b, &a)| b - a).collect())
            .collect();
        Ok(serde_json::to_string(&Line {
            horizon: self.horizon,
            dimension: self.dimension(),
            jump_times: &self.jump_times,
            site_deltas: deltas,
        })?)
    }

    pub fn from_json_line(s: &str) -> Result<WalkPath> {
        #[derive(Deserialize)]
        struct Line {
            horizon: f64,
            dimension: usize,
            jump_times: Vec<f64>,
            site_deltas: Vec<Vec<i32>>,
        }
        let line: Line = serde_json::from_str(s)?;
        if line.site_deltas.len() != line.jump_times.len() {
            return Err(PolymerError::Domain(
                "replay line needs one delta per jump".into(),
            ));
        }
        if line.site_deltas.iter().any(|d| d.len() != line.dimension) {
            return Err(PolymerError::Domain(
                "replay delta dimension mismatch".into(),
            ));
        }
        let mut sites = vec![vec![0i32; line.dimension]];
        for delta in &line.site_deltas {
            let prev = sites.last().unwrap();
            let next: Vec<i32> = prev.iter().zip(delta.iter()).map(|(&p, &dd)| p + dd).collect();
            sites.push(next);
        }
        let path = WalkPath {
            horizon: line.horizon,
            jump_times: line.jump_times,
            sites,
        };
        path.validate()?;
        Ok(path)
    }
}

/// Occupation segments regrouped by site: site → ascending list of
/// [enter, leave) intervals whose lengths partition [0, horizon].
pub type SegmentList = BTreeMap<Vec<i32>, Vec<(f64, f64)>>;

/// Regroup a path into per-site occupation intervals. The polymer action is
/// a sum of environment increments over these segments, and same-site
/// segment pairs carry all the covariance.
pub fn segments(path: &WalkPath) -> SegmentList {
    let mut map: SegmentList = BTreeMap::new();
    let mut start = 0.0;
    for (i, site) in path.sites.iter().enumerate() {
        let end = if i < path.jump_times.len() {
            path.jump_times[i]
        } else {
            path.horizon
        };
        map.entry(site.clone()).or_default().push((start, end));
        start = end;
    }
    map
}

/// Truncation parameters: Hurst regime, jump rate, and ρ = max{e⁶, 1/κ}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub hurst: Hurst,
    pub kappa: f64,
    pub rho: f64,
}

impl TruncationSpec {
    pub fn new(hurst: Hurst, kappa: f64) -> Result<TruncationSpec> {
        if !(kappa > 0.0) {
            return Err(PolymerError::Domain(format!(
                "jump rate must be positive, got {kappa}"
            )));
        }
        let rho = (6.0f64).exp().max(1.0 / kappa);
        Ok(TruncationSpec { hurst, kappa, rho })
    }
}

/// The jump-count cap 𝔑_t: ⌊t²⌋ for H > 1/2, else ⌊ρκt⌋.
pub fn jump_cap(t: f64, spec: &TruncationSpec) -> Result<u64> {
    if !(t > 0.0) {
        return Err(PolymerError::Domain(format!(
            "truncation horizon must be positive, got {t}"
        )));
    }
    let cap = if spec.hurst.is_upper() {
        (t * t).floor()
    } else {
        (spec.rho * spec.kappa * t).floor()
    };
    Ok(cap as u64)
}

/// Sample one continuous-time walk path: Poisson(κt) jumps placed as uniform
/// order statistics on (0,t), each direction uniform over the 2d unit steps.
pub fn sample_path<R: Rng>(kappa: f64, t: f64, d: usize, rng: &mut R) -> Result<WalkPath> {
    if !(kappa > 0.0) || !(t > 0.0) || d == 0 {
        return Err(PolymerError::Domain(format!(
            "sample_path needs kappa > 0, t > 0, d ≥ 1; got ({kappa}, {t}, {d})"
        )));
    }
    let poisson = Poisson::new(kappa * t)
        .map_err(|e| PolymerError::Domain(format!("invalid Poisson rate: {e}")))?;
    let n = poisson.sample(rng) as usize;
    let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..t)).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup(); // ties have probability zero; drop them defensively
    let mut sites = Vec::with_capacity(times.len() + 1);
    sites.push(vec![0i32; d]);
    for _ in 0..times.len() {
        let dir = rng.random_range(0..2 * d);
        let axis = dir / 2;
        let step = if dir % 2 == 0 { 1 } else { -1 };
        let mut next = sites.last().unwrap().clone();
        next[axis] += step;
        sites.push(next);
    }
    Ok(WalkPath {
        horizon: t,
        jump_times: times,
        sites,
    })
}

/// Guard on exhaustive enumeration: (2d+1)^m must not exceed this.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// Exhaustive iterator over grid-walk skeletons: per cell the walk either
/// stays (probability 1−p) or takes one of the 2d unit steps (probability
/// p/(2d) each). Yields every decision sequence with its exact probability;
/// the probabilities sum to 1.
///
/// Decision encoding per cell: 0 = stay, 2k+1 = +e_{k+1}, 2k+2 = −e_{k+1}.
pub struct GridPathIter {
    m: usize,
    d: usize,
    log_stay: f64,
    log_jump: f64,
    state: Option<Vec<u8>>,
}

impl GridPathIter {
    fn probability(&self, decisions: &[u8]) -> f64 {
        let jumps = decisions.iter().filter(|&&c| c != 0).count() as f64;
        let stays = decisions.len() as f64 - jumps;
        (stays * self.log_stay + jumps * self.log_jump).exp()
    }
}

impl Iterator for GridPathIter {
    type Item = (Vec<u8>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.state.take()?;
        let prob = self.probability(&current);
        // odometer in base 2d+1, last cell fastest
        let mut next = current.clone();
        let base = (2 * self.d + 1) as u8;
        let mut k = self.m;
        let advanced = loop {
            if k == 0 {
                break false;
            }
            k -= 1;
            if next[k] + 1 < base {
                next[k] += 1;
                for c in next.iter_mut().skip(k + 1) {
                    *c = 0;
                }
                break true;
            }
        };
        if advanced {
            self.state = Some(next);
        }
        Some((current, prob))
    }
}

/// Enumerate all (2d+1)^m grid skeletons, guarded against explosion.
pub fn enumerate_grid_paths(m: usize, d: usize, p_jump: f64) -> Result<GridPathIter> {
    if d == 0 || m == 0 {
        return Err(PolymerError::Domain(
            "enumeration needs m ≥ 1 cells and d ≥ 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_jump) {
        return Err(PolymerError::Domain(format!(
            "jump probability {p_jump} outside [0,1]"
        )));
    }
    let size = (2 * d as u128 + 1)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if size > ENUMERATION_GUARD {
        return Err(PolymerError::EnumerationGuard {
            size,
            guard: ENUMERATION_GUARD,
        });
    }
    Ok(GridPathIter {
        m,
        d,
        log_stay: (1.0 - p_jump).ln(),
        log_jump: (p_jump / (2.0 * d as f64)).ln(),
        state: Some(vec![0u8; m]),
    })
}

/// Positions occupied per cell for a decision sequence: the decision at the
/// start of cell k moves the walk first, then the walk occupies that cell.
pub fn skeleton_positions(decisions: &[u8], d: usize) -> Vec<Vec<i32>> {
    let mut pos = vec![0i32; d];
    let mut out = Vec::with_capacity(decisions.len());
    for &c in decisions {
        if c != 0 {
            let axis = ((c - 1) / 2) as usize;
            let step = if c % 2 == 1 { 1 } else { -1 };
            pos[axis] += step;
        }
        out.push(pos.clone());
    }
    out
}
