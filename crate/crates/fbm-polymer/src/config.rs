//! Run configuration: a flat TOML file, command-line overrides, and a
//! single environment variable. Precedence is config file < flags <
//! `FBM_POLYMER_SEED` (the environment can override only the seed).
//!
//! Unknown keys in the file are rejected so typos fail loudly instead of
//! silently running defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::digest::hex_digest;
use crate::env::Hurst;
use crate::error::{PolymerError, Result};
use crate::estimators::EstimatorParams;
use crate::report::OutputFormat;

/// Name of the only environment variable the tool reads.
pub const SEED_ENV_VAR: &str = "FBM_POLYMER_SEED";

/// Everything a run can be told. All fields have defaults, so an empty file
/// (or no file) is a valid configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Hurst index of the environment, in (0, 1).
    pub hurst: f64,
    /// Walk jump rate κ > 0.
    pub kappa: f64,
    /// Lattice dimension d ≥ 1.
    pub dimension: usize,
    /// Time-grid step h; κ·h may not exceed the per-cell jump budget.
    pub grid_step: f64,
    /// Single horizon, used by `sample-field`, `partition`, `estimate-U`,
    /// and `concentration` (as its integer horizon when `n` is unset there).
    pub t: f64,
    /// Horizon grid for `lyapunov` and `circle`; empty means the
    /// subcommand's default grid.
    pub t_grid: Vec<f64>,
    /// Integer horizon for `concentration`.
    pub n: u64,
    /// First-block horizons for `superadd`.
    pub n_values: Vec<u64>,
    /// Second-block horizons for `superadd`.
    pub m_values: Vec<u64>,
    /// Excursion counts m for `lower-bound`.
    pub excursions: Vec<u64>,
    /// Block lengths n for the window-ratio scan in `residue`.
    pub scan_n: Vec<u64>,
    /// Points per unit window in the ratio scan.
    pub window_points: usize,
    /// Explicit environment box radius; default is the walk's reach.
    pub box_radius: Option<usize>,
    /// Explicit jump cap for `partition`; default compares capped and
    /// uncapped solvers at the rule cap.
    pub jump_cap: Option<u64>,
    /// Environment replicas per Monte Carlo estimate.
    pub env_replicas: u64,
    /// Walk-path replicas for sampling-based bound checks.
    pub path_replicas: u64,
    /// Base RNG seed.
    pub seed: u64,
    /// Worker threads; 0 means one per core. Never affects output bytes.
    pub workers: usize,
    /// Replace every sampled field by zeros (closed-form regression mode).
    pub zero_field: bool,
    /// Whether `estimate-U` caps the jump count at the truncation rule.
    pub truncated: bool,
    /// Fourier cosine coefficients [a₀, a₁, …] of the circle kernel.
    pub fourier: Vec<f64>,
    /// Output format (csv or json lines).
    pub format: OutputFormat,
    /// Output path; stdout when unset.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hurst: 0.5,
            kappa: 1.0,
            dimension: 1,
            grid_step: 0.2,
            t: 4.0,
            t_grid: Vec::new(),
            n: 4,
            n_values: vec![2, 3, 4],
            m_values: vec![2, 3, 4],
            excursions: vec![1, 2, 3],
            scan_n: vec![4, 8, 16, 32],
            window_points: 5,
            box_radius: None,
            jump_cap: None,
            env_replicas: 200,
            path_replicas: 2000,
            seed: 0,
            workers: 0,
            zero_field: false,
            truncated: true,
            fourier: vec![0.0, 1.0],
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

/// The reproducibility-relevant view of a configuration: everything that can
/// change a computed number. Output plumbing (format, path, worker count) is
/// deliberately excluded — those must never change results.
#[derive(Serialize)]
struct ScienceKey<'a> {
    subcommand: &'a str,
    hurst: f64,
    kappa: f64,
    dimension: usize,
    grid_step: f64,
    t: f64,
    t_grid: &'a [f64],
    n: u64,
    n_values: &'a [u64],
    m_values: &'a [u64],
    excursions: &'a [u64],
    scan_n: &'a [u64],
    window_points: usize,
    box_radius: Option<usize>,
    jump_cap: Option<u64>,
    env_replicas: u64,
    path_replicas: u64,
    seed: u64,
    zero_field: bool,
    truncated: bool,
    fourier: &'a [f64],
}

impl RunConfig {
    /// Load from a TOML file, or defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    PolymerError::InvalidConfig(format!("cannot read {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    PolymerError::InvalidConfig(format!("{}: {e}", p.display()))
                })
            }
        }
    }

    /// Apply the seed from `FBM_POLYMER_SEED` if set — the highest-
    /// precedence seed source and the only environment input.
    pub fn apply_env_override(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            self.seed = raw.trim().parse().map_err(|_| {
                PolymerError::InvalidConfig(format!(
                    "{SEED_ENV_VAR} must be an unsigned integer, got {raw:?}"
                ))
            })?;
        }
        Ok(())
    }

    /// The Hurst index as a validated domain object.
    pub fn hurst(&self) -> Result<Hurst> {
        Hurst::new(self.hurst)
    }

    /// The shared estimator parameter block.
    pub fn estimator_params(&self) -> Result<EstimatorParams> {
        Ok(EstimatorParams {
            hurst: self.hurst()?,
            kappa: self.kappa,
            dimension: self.dimension,
            grid_step: self.grid_step,
            zero_field: self.zero_field,
        })
    }

    /// Digest of the science-relevant configuration for a subcommand. Rows
    /// carry this so that appended outputs can be checked for compatibility.
    pub fn digest(&self, subcommand: &str) -> String {
        hex_digest(&ScienceKey {
            subcommand,
            hurst: self.hurst,
            kappa: self.kappa,
            dimension: self.dimension,
            grid_step: self.grid_step,
            t: self.t,
            t_grid: &self.t_grid,
            n: self.n,
            n_values: &self.n_values,
            m_values: &self.m_values,
            excursions: &self.excursions,
            scan_n: &self.scan_n,
            window_points: self.window_points,
            box_radius: self.box_radius,
            jump_cap: self.jump_cap,
            env_replicas: self.env_replicas,
            path_replicas: self.path_replicas,
            seed: self.seed,
            zero_field: self.zero_field,
            truncated: self.truncated,
            fourier: &self.fourier,
        })
    }
}
