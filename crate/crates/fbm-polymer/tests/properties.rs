//! Property-based invariants: positive semidefiniteness of covariance
//! structures, solver agreement and monotonicity, envelope bounds, and
//! serialization round trips under randomized inputs.

use fbm_polymer::bounds::{exact_poisson_tail, poisson_tail_bound, variance_upper};
use fbm_polymer::env::{increment_gram, sample_env, EnvConfig, Hurst};
use fbm_polymer::polymer::{brute_force_partition, dp_partition, path_variance};
use fbm_polymer::residue::{y_cov, YCovQuery};
use fbm_polymer::walk::{sample_path, WalkPath};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hurst_strategy() -> impl Strategy<Value = Hurst> {
    (0.05f64..0.95).prop_map(|h| Hurst::new(h).unwrap())
}

fn env_config(hurst: Hurst, dimension: usize, radius: usize, cells: usize, seed: u64) -> EnvConfig {
    EnvConfig {
        hurst,
        dimension,
        box_radius: radius,
        t_max: cells as f64 * 0.5,
        grid_step: 0.5,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Increment Grams of arbitrary disjoint-or-not interval families are
    /// positive semidefinite up to symmetric-eigensolver noise.
    #[test]
    fn increment_gram_is_psd(
        hurst in hurst_strategy(),
        raw in proptest::collection::vec((0.01f64..8.0, 0.01f64..2.0), 1..7),
    ) {
        let intervals: Vec<(f64, f64)> = raw.iter().map(|&(a, len)| (a, a + len)).collect();
        let gram = increment_gram(&intervals, hurst).unwrap();
        prop_assert!(gram.min_eigenvalue() >= -1e-8 * gram.dim() as f64);
    }

    /// The capped solver is monotone in the cap and dominated by the
    /// uncapped solver; at cap ≥ cells they agree exactly.
    #[test]
    fn dp_monotone_in_cap(
        seed in 0u64..1_000_000,
        hurst in hurst_strategy(),
        cells in 2usize..6,
    ) {
        let cfg = env_config(hurst, 1, cells, cells, seed);
        let env = sample_env(&cfg, 0).unwrap();
        let uncapped = dp_partition(&env, 0.3, None).unwrap().log_u;
        let mut prev = f64::NEG_INFINITY;
        for cap in 0..=cells as u64 {
            let v = dp_partition(&env, 0.3, Some(cap)).unwrap().log_u;
            prop_assert!(v >= prev - 1e-12, "cap {cap}: {v} < {prev}");
            prop_assert!(v <= uncapped + 1e-12);
            prev = v;
        }
        let at_cells = dp_partition(&env, 0.3, Some(cells as u64)).unwrap().log_u;
        prop_assert_eq!(at_cells, uncapped);
    }

    /// Dynamic programming agrees with exhaustive path enumeration.
    #[test]
    fn dp_matches_enumeration(
        seed in 0u64..1_000_000,
        hurst in hurst_strategy(),
        cells in 2usize..5,
        dimension in 1usize..3,
        cap in proptest::option::of(0u64..4),
    ) {
        let cfg = env_config(hurst, dimension, cells, cells, seed);
        let env = sample_env(&cfg, 1).unwrap();
        let dp = dp_partition(&env, 0.25, cap).unwrap().log_u;
        let brute = brute_force_partition(&env, 0.25, cap).unwrap().log_u;
        prop_assert!((dp - brute).abs() <= 1e-12, "dp {dp} vs enumeration {brute}");
    }

    /// Sampled path variances respect the regime envelope.
    #[test]
    fn path_variance_respects_envelope(
        seed in 0u64..1_000_000,
        hurst in hurst_strategy(),
        kappa in 0.2f64..2.0,
        t in 0.5f64..6.0,
        dimension in 1usize..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = sample_path(kappa, t, dimension, &mut rng).unwrap();
        let var = path_variance(&path, hurst).unwrap();
        let envelope = variance_upper(t, path.jumps() as u64, hurst).unwrap();
        prop_assert!(var <= envelope + 1e-9, "variance {var} exceeds envelope {envelope}");
    }

    /// The closed-form Poisson tail bound dominates the exact tail.
    #[test]
    fn poisson_bound_dominates_exact(
        lambda in 0.1f64..20.0,
        extra in 1u64..30,
    ) {
        let n = lambda.ceil() as u64 + extra;
        let bound = poisson_tail_bound(lambda, n).unwrap();
        let exact = exact_poisson_tail(lambda, n).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-12) + 1e-300);
    }

    /// Walk paths survive the JSON round trip exactly.
    #[test]
    fn walk_path_round_trips(
        seed in 0u64..1_000_000,
        kappa in 0.2f64..2.0,
        t in 0.5f64..4.0,
        dimension in 1usize..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = sample_path(kappa, t, dimension, &mut rng).unwrap();
        let line = path.to_json_line().unwrap();
        let back = WalkPath::from_json_line(&line).unwrap();
        prop_assert_eq!(path, back);
    }
}

proptest! {
    // Quadrature-backed cases are expensive; keep the case count low.
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// Gram matrices of the window process Y are positive semidefinite.
    #[test]
    fn window_gram_is_psd(
        n in 1u64..6,
        k in 1u64..4,
        offsets in proptest::collection::vec(0.0f64..1.0, 2..4),
        h_raw in 0.1f64..0.9,
    ) {
        let hurst = Hurst::new(h_raw).unwrap();
        let base = (n + k) as f64;
        let us: Vec<f64> = offsets.iter().map(|o| base + o).collect();
        let dim = us.len();
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let qi = YCovQuery::new(n, k, us[i]).unwrap();
                let qj = YCovQuery::new(n, k, us[j]).unwrap();
                let v = y_cov(&qi, &qj, hurst).unwrap().value;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let scale = (0..dim).map(|i| gram[(i, i)]).fold(1e-12, f64::max);
        let min_eig = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        prop_assert!(min_eig >= -1e-6 * scale, "min eigenvalue {min_eig} at scale {scale}");
    }
}
