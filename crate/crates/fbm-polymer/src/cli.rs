//! Command-line interface. Ten subcommands cover the pipeline from raw
//! environment samples to the combinatorial lower-bound experiment; all of
//! them honor the global flags `--config`, `--seed`, `--out`, `--format`,
//! `--workers`, and `--zero-field`, plus `--append` and `--plot-data`.
//!
//! Exit codes: 0 on success, 1 when a checked invariant is violated (the
//! rows are still written), 2 on configuration or validation errors.
//!
//! Worker count, output path, and format never influence computed values;
//! rerunning any subcommand with the same configuration and seed gives
//! byte-identical output at any `--workers` setting.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::Rng;
use serde::Serialize;

use crate::bounds::{
    emax_two_gaussians, exact_poisson_tail, lower_bound_experiment, poisson_tail_bound,
    stirling_pm, u_hat_linear_bound, variance_upper, BoundReport,
};
use crate::circle::{circle_linear_growth, PeriodicKernel};
use crate::config::RunConfig;
use crate::env::{r_h, sample_env, EnvConfig, EnvField, Hurst};
use crate::error::{PolymerError, Result};
use crate::estimators::{
    concentration_check, env_config_for, estimate_U, lyapunov_trace, superadditivity_defect,
};
use crate::numeric::{mean_and_se, rng_domain, substream};
use crate::polymer::{brute_force_partition, dp_partition, path_variance, MAX_P_JUMP};
use crate::report::{write_plot_data, write_rows, OutputFormat};
use crate::residue::{decomposition_variance_check, kernel_isometry, lipschitz_ratio_scan};
use crate::walk::{jump_cap, sample_path, TruncationSpec};

#[derive(Debug, Parser)]
#[command(
    name = "fbm-polymer",
    version,
    about = "Directed-polymer partition functions in a fractional Brownian environment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base RNG seed (FBM_POLYMER_SEED overrides even this).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, value_name = "csv|json")]
    pub format: Option<OutputFormat>,
    /// Worker threads (0 = one per core). Never changes output bytes.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Replace sampled environments by zeros (closed-form regression mode).
    #[arg(long = "zero-field", global = true)]
    pub zero_field: bool,
    /// Append to --out instead of overwriting; the existing file must carry
    /// the same configuration digest.
    #[arg(long, global = true)]
    pub append: bool,
    /// Also write a reduced numeric view for plotting to this path.
    #[arg(long = "plot-data", global = true, value_name = "PATH")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one environment field and emit its grid increments.
    #[command(name = "sample-field")]
    SampleField,
    /// Cross-check the dynamic-programming solver against path enumeration.
    #[command(name = "partition")]
    Partition,
    /// Estimate U(t) = E log u(t) at one horizon.
    #[command(name = "estimate-U")]
    EstimateU,
    /// Estimate U(t)/t over a horizon grid and fit the growth line.
    #[command(name = "lyapunov")]
    Lyapunov,
    /// Super-additivity defects U(n+m+1) − U(n) − U(m) over a grid of (n, m).
    #[command(name = "superadd")]
    Superadd,
    /// Check the concentration tail bound at one integer horizon.
    #[command(name = "concentration")]
    Concentration,
    /// Run the analytic-bound battery (Poisson tails, variance envelope,
    /// linear growth bound, Gaussian max identity, mass floors).
    #[command(name = "bounds")]
    Bounds,
    /// Volterra kernel isometry, window-ratio scan, and the residue
    /// variance decomposition.
    #[command(name = "residue")]
    Residue,
    /// Linear-growth diagnostic for the circle polymer (H > 1/2).
    #[command(name = "circle")]
    Circle,
    /// Excursion-restricted lower-bound experiment.
    #[command(name = "lower-bound")]
    LowerBound,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SampleField => "sample-field",
            Command::Partition => "partition",
            Command::EstimateU => "estimate-U",
            Command::Lyapunov => "lyapunov",
            Command::Superadd => "superadd",
            Command::Concentration => "concentration",
            Command::Bounds => "bounds",
            Command::Residue => "residue",
            Command::Circle => "circle",
            Command::LowerBound => "lower-bound",
        }
    }
}

/// Reduced numeric view for `--plot-data`.
struct PlotView {
    headers: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

struct Outcome {
    violation: bool,
    plot: PlotView,
}

/// Run a parsed invocation. Returns the process exit code (0 or 1); errors
/// map to exit code 2 in `main`.
pub fn run(cli: Cli) -> Result<i32> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if cli.zero_field {
        config.zero_field = true;
    }
    config.apply_env_override()?;
    let digest = config.digest(cli.command.name());
    let outcome = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| PolymerError::InvalidConfig(format!("cannot build thread pool: {e}")))?;
        pool.install(|| dispatch(&cli.command, &config, &digest, cli.append))
    } else {
        dispatch(&cli.command, &config, &digest, cli.append)
    }?;
    if let Some(path) = &cli.plot_data {
        write_plot_data(path, config.format, &outcome.plot.headers, &outcome.plot.rows)?;
    }
    Ok(if outcome.violation { 1 } else { 0 })
}

fn dispatch(command: &Command, config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    match command {
        Command::SampleField => cmd_sample_field(config, digest, append),
        Command::Partition => cmd_partition(config, digest, append),
        Command::EstimateU => cmd_estimate_u(config, digest, append),
        Command::Lyapunov => cmd_lyapunov(config, digest, append),
        Command::Superadd => cmd_superadd(config, digest, append),
        Command::Concentration => cmd_concentration(config, digest, append),
        Command::Bounds => cmd_bounds(config, digest, append),
        Command::Residue => cmd_residue(config, digest, append),
        Command::Circle => cmd_circle(config, digest, append),
        Command::LowerBound => cmd_lower_bound(config, digest, append),
    }
}

/// Environment geometry for the single-horizon subcommands: the estimator
/// geometry at `config.t`, with an explicit `box_radius` override honored.
fn single_horizon_env(config: &RunConfig) -> Result<(EnvConfig, u64)> {
    let params = config.estimator_params()?;
    let (mut env_cfg, cap) = env_config_for(config.t, &params, config.seed)?;
    if let Some(radius) = config.box_radius {
        env_cfg.box_radius = radius;
        env_cfg.validate()?;
    }
    Ok((env_cfg, cap))
}

fn site_label(site: &[i32]) -> String {
    site.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct FieldRow {
    site: String,
    cell: usize,
    t_start: f64,
    t_end: f64,
    increment: f64,
    digest: String,
}

fn cmd_sample_field(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let (env_cfg, _) = single_horizon_env(config)?;
    let h = env_cfg.grid_step;
    let field = if config.zero_field {
        EnvField::zeros(env_cfg.clone())?
    } else {
        sample_env(&env_cfg, 0)?
    };
    let sites = env_cfg.sites()?;
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for (idx, site) in sites.iter().enumerate() {
        let label = site_label(site);
        for (cell, &increment) in field.by_index(idx).iter().enumerate() {
            rows.push(FieldRow {
                site: label.clone(),
                cell,
                t_start: cell as f64 * h,
                t_end: (cell + 1) as f64 * h,
                increment,
                digest: digest.to_string(),
            });
            if site.iter().all(|&c| c == 0) {
                plot_rows.push(vec![(cell + 1) as f64 * h, increment]);
            }
        }
    }
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation: false,
        plot: PlotView {
            headers: vec!["t_end", "origin_increment"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct PartitionRow {
    replica: u64,
    cap: String,
    log_u_dp: f64,
    log_u_enum: f64,
    abs_diff: f64,
    within_tol: bool,
    digest: String,
}

fn cmd_partition(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let (mut env_cfg, _) = single_horizon_env(config)?;
    let cap = config.jump_cap;
    // The cross-check runs the solver with the configured jump cap (or no
    // cap at all), so unless a radius was pinned explicitly the box must
    // cover that reach, not the truncated estimator's.
    if config.box_radius.is_none() {
        let cells = env_cfg.cells()?;
        env_cfg.box_radius = cap.map_or(cells, |c| (c as usize).min(cells));
        env_cfg.validate()?;
    }
    let cap_label = cap.map_or_else(|| "none".to_string(), |c| c.to_string());
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    let mut violation = false;
    for replica in 0..config.env_replicas {
        let field = if config.zero_field {
            EnvField::zeros(env_cfg.clone())?
        } else {
            sample_env(&env_cfg, replica)?
        };
        let dp = dp_partition(&field, config.kappa, cap)?;
        let brute = brute_force_partition(&field, config.kappa, cap)?;
        let abs_diff = (dp.log_u - brute.log_u).abs();
        let within_tol = abs_diff <= TOL;
        violation |= !within_tol;
        plot_rows.push(vec![replica as f64, abs_diff]);
        rows.push(PartitionRow {
            replica,
            cap: cap_label.clone(),
            log_u_dp: dp.log_u,
            log_u_enum: brute.log_u,
            abs_diff,
            within_tol,
            digest: digest.to_string(),
        });
    }
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation,
        plot: PlotView {
            headers: vec!["replica", "abs_diff"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct EstimateRow {
    t: f64,
    u_hat: f64,
    u_hat_per_time: f64,
    std_error: f64,
    replicas: u64,
    truncated: bool,
    jump_cap: u64,
    seed: u64,
    digest: String,
}

fn cmd_estimate_u(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let params = config.estimator_params()?;
    let record = estimate_U(config.t, &params, config.env_replicas, config.seed, config.truncated)?;
    let cap = jump_cap(config.t, &TruncationSpec::new(params.hurst, params.kappa)?)?;
    let row = EstimateRow {
        t: config.t,
        u_hat: record.value,
        u_hat_per_time: record.value / config.t,
        std_error: record.std_error,
        replicas: record.replicas,
        truncated: config.truncated,
        jump_cap: cap,
        seed: record.seed,
        digest: digest.to_string(),
    };
    let plot_rows = vec![vec![row.t, row.u_hat_per_time, row.std_error / config.t]];
    write_rows(&[row], config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation: false,
        plot: PlotView {
            headers: vec!["t", "u_hat_per_time", "std_error"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct LyapunovRow {
    t: f64,
    u_hat: f64,
    u_hat_per_time: f64,
    std_error_per_time: f64,
    slope: f64,
    slope_std_error: f64,
    slope_ci_lo: f64,
    slope_ci_hi: f64,
    seed: u64,
    digest: String,
}

fn cmd_lyapunov(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let params = config.estimator_params()?;
    let grid: Vec<f64> = if config.t_grid.is_empty() {
        (2..=12).map(|t| t as f64).collect()
    } else {
        config.t_grid.clone()
    };
    let trace = lyapunov_trace(&grid, &params, config.env_replicas, config.seed)?;
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for (&t, record) in trace.t_grid.iter().zip(&trace.per_t) {
        plot_rows.push(vec![t, record.value, record.std_error]);
        rows.push(LyapunovRow {
            t,
            u_hat: t * record.value,
            u_hat_per_time: record.value,
            std_error_per_time: record.std_error,
            slope: trace.slope,
            slope_std_error: trace.slope_std_error,
            slope_ci_lo: trace.slope_ci95.0,
            slope_ci_hi: trace.slope_ci95.1,
            seed: config.seed,
            digest: digest.to_string(),
        });
    }
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation: false,
        plot: PlotView {
            headers: vec!["t", "u_hat_per_time", "std_error"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct SuperaddRow {
    n: u64,
    m: u64,
    u_n: f64,
    u_m: f64,
    u_joint: f64,
    defect: f64,
    defect_std_error: f64,
    normalized_defect: f64,
    normalized_std_error: f64,
    c_hat: f64,
    seed: u64,
    digest: String,
}

fn cmd_superadd(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let params = config.estimator_params()?;
    let mut records = Vec::new();
    for &n in &config.n_values {
        for &m in &config.m_values {
            records.push(superadditivity_defect(n, m, &params, config.env_replicas, config.seed)?);
        }
    }
    // The common lower-bound constant: the worst normalized defect over the
    // grid, reported as ĉ ≥ 0 with defect ≥ −ĉ·(n+m)^H√log(n+m).
    let c_hat = records
        .iter()
        .map(|r| -r.normalized_defect)
        .fold(0.0f64, f64::max);
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for r in &records {
        plot_rows.push(vec![(r.n + r.m) as f64, r.normalized_defect, r.normalized_std_error]);
        rows.push(SuperaddRow {
            n: r.n,
            m: r.m,
            u_n: r.u_n.value,
            u_m: r.u_m.value,
            u_joint: r.u_joint.value,
            defect: r.defect,
            defect_std_error: r.defect_std_error,
            normalized_defect: r.normalized_defect,
            normalized_std_error: r.normalized_std_error,
            c_hat,
            seed: config.seed,
            digest: digest.to_string(),
        });
    }
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation: false,
        plot: PlotView {
            headers: vec!["n_plus_m", "normalized_defect", "normalized_std_error"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct ConcentrationRow {
    n: u64,
    replicas: u64,
    bound_value: f64,
    empirical_value: f64,
    slack: f64,
    margin: f64,
    satisfied: bool,
    seed: u64,
    digest: String,
}

fn cmd_concentration(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let params = config.estimator_params()?;
    let report = concentration_check(config.n, &params, config.env_replicas, config.seed)?;
    let row = ConcentrationRow {
        n: config.n,
        replicas: config.env_replicas,
        bound_value: report.bound_value,
        empirical_value: report.empirical_value,
        slack: report.slack,
        margin: report.margin,
        satisfied: report.satisfied,
        seed: config.seed,
        digest: digest.to_string(),
    };
    let violation = !report.satisfied;
    let plot_rows = vec![vec![
        config.n as f64,
        report.empirical_value,
        report.bound_value + report.slack,
    ]];
    write_rows(&[row], config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation,
        plot: PlotView {
            headers: vec!["n", "empirical_frequency", "allowed"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct BoundRow {
    name: String,
    params: String,
    bound_value: f64,
    empirical_value: f64,
    slack: f64,
    margin: f64,
    satisfied: bool,
    digest: String,
}

impl BoundRow {
    fn from_report(report: BoundReport, digest: &str) -> BoundRow {
        BoundRow {
            name: report.name,
            params: report.params,
            bound_value: report.bound_value,
            empirical_value: report.empirical_value,
            slack: report.slack,
            margin: report.margin,
            satisfied: report.satisfied,
            digest: digest.to_string(),
        }
    }
}

fn cmd_bounds(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let mut reports: Vec<BoundReport> = Vec::new();

    // Poisson upper-tail bound P(N ≥ n) ≤ e^{−λ}(eλ/n)^n against the exact
    // tail, over a small (λ, n) grid.
    for lambda in [0.5f64, 1.0, 2.0, 4.0] {
        for extra in [1u64, 2, 4, 8] {
            let n = lambda.ceil() as u64 + extra;
            reports.push(BoundReport::new(
                "poisson_tail",
                format!("lambda={lambda} n={n}"),
                poisson_tail_bound(lambda, n)?,
                exact_poisson_tail(lambda, n)?,
                0.0,
            ));
        }
    }

    // Path-variance envelope: Var of the sampled action never exceeds
    // t^{2H} (upper regime) or (N+1)^{1−2H}·t^{2H} (lower regime).
    for (lane, h) in [0.3, 0.5, 0.75].into_iter().enumerate() {
        let hurst = Hurst::new(h)?;
        let mut worst = f64::NEG_INFINITY;
        for replica in 0..config.path_replicas {
            let mut rng = substream(config.seed, rng_domain::WALK, replica, lane as u64);
            let path = sample_path(config.kappa, config.t, config.dimension, &mut rng)?;
            let var = path_variance(&path, hurst)?;
            let envelope = variance_upper(config.t, path.jumps() as u64, hurst)?;
            worst = worst.max(var - envelope);
        }
        reports.push(BoundReport::new(
            "variance_envelope",
            format!(
                "H={h} t={} kappa={} d={} paths={}",
                config.t, config.kappa, config.dimension, config.path_replicas
            ),
            0.0,
            worst,
            1e-9,
        ));
    }

    // Linear growth bound Û(T) ≤ (ρT+1)/2 at H = 0.3 (lower regime only).
    {
        let hurst = Hurst::new(0.3)?;
        let mut params = config.estimator_params()?;
        params.hurst = hurst;
        let record = estimate_U(config.t, &params, config.env_replicas, config.seed, true)?;
        reports.push(BoundReport::new(
            "linear_growth",
            format!(
                "H=0.3 T={} kappa={} replicas={}",
                config.t, config.kappa, config.env_replicas
            ),
            u_hat_linear_bound(config.t, config.kappa, hurst)?,
            record.value,
            2.0 * record.std_error,
        ));
    }

    // E max{Y₁,Y₂} = σ/√π, checked as a two-sided identity within 3 SE.
    {
        let sigma = 1.0;
        let expected = emax_two_gaussians(sigma)?;
        let maxima: Vec<f64> = (0..config.path_replicas)
            .map(|replica| {
                let mut rng = substream(config.seed, rng_domain::PAIRS, replica, 0);
                let y1: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma;
                let y2: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma;
                y1.max(y2)
            })
            .collect();
        let (mean, se) = mean_and_se(&maxima);
        reports.push(BoundReport::new(
            "max_of_two_gaussians",
            format!("sigma={sigma} pairs={}", config.path_replicas),
            0.0,
            (mean - expected).abs(),
            3.0 * se,
        ));
    }

    // Poisson mass floor: the probability of exactly 2md jumps in mean-2md
    // Poisson dominates 1/(2e√(πmd)).
    for m in 1..=8u64 {
        for d in 1..=2u64 {
            let (exact, floor) = stirling_pm(m, d)?;
            reports.push(BoundReport::new(
                "poisson_mass_floor",
                format!("m={m} d={d}"),
                exact,
                floor,
                0.0,
            ));
        }
    }

    let violation = reports.iter().any(|r| !r.satisfied);
    let plot_rows: Vec<Vec<f64>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i as f64, r.margin])
        .collect();
    let rows: Vec<BoundRow> = reports
        .into_iter()
        .map(|r| BoundRow::from_report(r, digest))
        .collect();
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation,
        plot: PlotView {
            headers: vec!["index", "margin"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct ResidueRow {
    check: String,
    hurst: f64,
    a: f64,
    b: f64,
    c: f64,
    value: f64,
    reference: f64,
    error: f64,
    within_tol: bool,
    digest: String,
}

fn cmd_residue(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    const ISO_TOL: f64 = 1e-5;
    const DECOMP_TOL: f64 = 1e-5;
    let mut rows = Vec::new();
    let mut violation = false;

    // Kernel isometry ∫ K(t,r)K(s,r) dr = R_H(t,s) on a time grid, both
    // regimes.
    for h in [0.3, 0.75] {
        let hurst = Hurst::new(h)?;
        let grid = [0.5, 1.0, 1.5, 2.0];
        for (i, &t) in grid.iter().enumerate() {
            for &s in &grid[..=i] {
                let value = kernel_isometry(t, s, hurst)?.value;
                let reference = r_h(t, s, hurst)?;
                let error = (value - reference).abs() / reference.abs().max(1e-12);
                let within_tol = error <= ISO_TOL;
                violation |= !within_tol;
                rows.push(ResidueRow {
                    check: "isometry".into(),
                    hurst: h,
                    a: t,
                    b: s,
                    c: 0.0,
                    value,
                    reference,
                    error,
                    within_tol,
                    digest: digest.to_string(),
                });
            }
        }
    }

    // Window-ratio scan at the configured Hurst index: both normalized
    // ratios must stay finite across the (n, k, u) grid.
    {
        let hurst = config.hurst()?;
        let scan = lipschitz_ratio_scan(&config.scan_n, None, config.window_points, hurst)?;
        for p in &scan.points {
            let within_tol = p.ratio1.is_finite() && p.ratio2.is_finite();
            violation |= !within_tol;
            rows.push(ResidueRow {
                check: "window_ratio".into(),
                hurst: hurst.value(),
                a: p.n as f64,
                b: p.k as f64,
                c: p.u,
                value: p.ratio1,
                reference: p.ratio2,
                error: p.quadrature_error,
                within_tol,
                digest: digest.to_string(),
            });
        }
        let within_tol = scan.max_ratio1.is_finite() && scan.max_ratio2.is_finite();
        violation |= !within_tol;
        rows.push(ResidueRow {
            check: "window_ratio_max".into(),
            hurst: hurst.value(),
            a: 0.0,
            b: 0.0,
            c: 0.0,
            value: scan.max_ratio1,
            reference: scan.max_ratio2,
            error: 0.0,
            within_tol,
            digest: digest.to_string(),
        });
    }

    // Residue + innovation variance decomposition of (t₂−t₁)^{2H}.
    for h in [0.3, 0.75] {
        let hurst = Hurst::new(h)?;
        for (l, t1, t2) in [(2u64, 2.25, 2.75), (3, 3.0, 4.0), (4, 4.5, 4.75)] {
            let report = decomposition_variance_check(l, t1, t2, hurst)?;
            let value = report.residue_variance + report.innovation_variance;
            let error = report.gap().abs();
            let within_tol = error <= DECOMP_TOL;
            violation |= !within_tol;
            rows.push(ResidueRow {
                check: "decomposition".into(),
                hurst: h,
                a: l as f64,
                b: t1,
                c: t2,
                value,
                reference: report.lhs,
                error,
                within_tol,
                digest: digest.to_string(),
            });
        }
    }

    let plot_rows: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i as f64, r.error])
        .collect();
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation,
        plot: PlotView {
            headers: vec!["index", "error"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct CircleRow {
    t: f64,
    log_u_per_time: f64,
    std_error: f64,
    lambda_hat: f64,
    tail_slope: f64,
    tail_slope_allowance: f64,
    no_upward_trend: bool,
    seed: u64,
    digest: String,
}

fn cmd_circle(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let params = config.estimator_params()?;
    let kernel = PeriodicKernel::from_fourier(config.fourier.clone())?;
    let grid: Vec<f64> = if config.t_grid.is_empty() {
        (2..=8).map(|k| 2.0 * k as f64).collect()
    } else {
        config.t_grid.clone()
    };
    let (trace, report) =
        circle_linear_growth(&kernel, &params, &grid, config.env_replicas, config.seed)?;
    let lambda_hat = trace
        .per_t
        .iter()
        .map(|r| r.value + 2.0 * r.std_error)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for (&t, record) in trace.t_grid.iter().zip(&trace.per_t) {
        plot_rows.push(vec![t, record.value, record.std_error]);
        rows.push(CircleRow {
            t,
            log_u_per_time: record.value,
            std_error: record.std_error,
            lambda_hat,
            tail_slope: report.empirical_value,
            tail_slope_allowance: report.slack,
            no_upward_trend: report.satisfied,
            seed: config.seed,
            digest: digest.to_string(),
        });
    }
    let violation = !report.satisfied;
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation,
        plot: PlotView {
            headers: vec!["t", "log_u_per_time", "std_error"],
            rows: plot_rows,
        },
    })
}

#[derive(Serialize)]
struct LowerBoundRow {
    excursions: u64,
    dimension: usize,
    t_horizon: f64,
    grid_step: f64,
    value_per_time: f64,
    std_error: f64,
    replicas: u64,
    seed: u64,
    digest: String,
}

fn cmd_lower_bound(config: &RunConfig, digest: &str, append: bool) -> Result<Outcome> {
    let hurst = config.hurst()?;
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for &m in &config.excursions {
        let record = lower_bound_experiment(
            m,
            hurst,
            config.kappa,
            config.dimension,
            config.env_replicas,
            config.seed,
            config.zero_field,
        )?;
        let t_horizon = (2 * m * config.dimension as u64) as f64 / config.kappa;
        plot_rows.push(vec![m as f64, record.value, record.std_error]);
        rows.push(LowerBoundRow {
            excursions: m,
            dimension: config.dimension,
            t_horizon,
            grid_step: MAX_P_JUMP / config.kappa,
            value_per_time: record.value,
            std_error: record.std_error,
            replicas: record.replicas,
            seed: record.seed,
            digest: digest.to_string(),
        });
    }
    write_rows(&rows, config.format, config.out.as_deref(), append, digest)?;
    Ok(Outcome {
        violation: false,
        plot: PlotView {
            headers: vec!["excursions", "value_per_time", "std_error"],
            rows: plot_rows,
        },
    })
}
