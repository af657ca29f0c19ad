//! Continuous-time random walk paths and the jump-count truncation rule.
//!
//! Samples Poisson-clock walk paths, shows their per-site occupation
//! segments, serializes a path to a JSON line and back, prints the
//! regime-dependent jump cap 𝔑_t, and checks that the grid-path enumeration
//! used by the brute-force solver carries total probability one.
//!
//! Run with: cargo run --release --example walk_and_truncation

use fbm_polymer::env::Hurst;
use fbm_polymer::walk::{enumerate_grid_paths, jump_cap, sample_path, segments, TruncationSpec};
use fbm_polymer::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let path = sample_path(1.0, 4.0, 1, &mut rng)?;
    println!("sampled walk on ℤ, rate 1, horizon 4: {} jumps", path.jumps());
    println!("  jump times: {:?}", path.jump_times.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>());
    println!("  sites:      {:?}", path.sites);

    println!("\nper-site occupation segments (the action integrates one fBm per site):");
    for (site, intervals) in segments(&path) {
        let spans: Vec<String> = intervals
            .iter()
            .map(|(a, b)| format!("[{a:.2}, {b:.2}]"))
            .collect();
        println!("  site {site:?}: {}", spans.join(" ∪ "));
    }

    let line = path.to_json_line()?;
    let back = fbm_polymer::walk::WalkPath::from_json_line(&line)?;
    println!("\nJSON round trip preserves the path exactly: {}", back == path);

    // The truncation rule caps the admissible jump count: ⌊t²⌋ in the
    // upper regime H > 1/2 and ⌊ρκt⌋ with ρ = max{e⁶, 1/κ} below it.
    println!("\njump cap 𝔑_t by regime (κ = 1):");
    println!("{:>6} {:>14} {:>14}", "t", "H = 0.75", "H = 0.3");
    let upper = TruncationSpec::new(Hurst::new(0.75)?, 1.0)?;
    let lower = TruncationSpec::new(Hurst::new(0.3)?, 1.0)?;
    for t in [2.0, 4.0, 8.0, 16.0] {
        println!(
            "{:>6} {:>14} {:>14}",
            t,
            jump_cap(t, &upper)?,
            jump_cap(t, &lower)?
        );
    }

    // The discretized walk decides stay/jump once per grid cell; the
    // enumeration weights must sum to exactly one.
    let (m, d, p) = (6, 1, 0.2);
    let mut total = 0.0f64;
    let mut count = 0usize;
    for (_, prob) in enumerate_grid_paths(m, d, p)? {
        total += prob;
        count += 1;
    }
    println!("\ngrid-path enumeration, m = {m} cells, d = {d}, jump probability {p}:");
    println!("  {count} paths, total probability {total:.15}");
    Ok(())
}
