//! The Volterra kernel of fractional Brownian motion, its isometry, the
//! residue/innovation variance decomposition, and the residue process's
//! Lipschitz and variance ratios.
//!
//! The kernel K_H(t, s) writes fBm as ∫₀ᵗ K_H(t,s) dW_s against a Brownian
//! innovation; everything downstream — conditional decompositions, residue
//! bounds — rests on the isometry ∫ K_H(t,r)·K_H(s,r) dr = R_H(t,s).
//!
//! Run with: cargo run --release --example volterra_and_residue

use fbm_polymer::env::{r_h, Hurst};
use fbm_polymer::residue::{
    decomposition_variance_check, kernel_isometry, lipschitz_ratio_scan, volterra_kernel,
};
use fbm_polymer::Result;

fn main() -> Result<()> {
    println!("Volterra kernel values K_H(t, s):");
    println!("{:>6} {:>6} {:>14} {:>14}", "t", "s", "H = 0.3", "H = 0.75");
    for (t, s) in [(1.0, 0.5), (2.0, 0.5), (2.0, 1.5), (4.0, 3.0)] {
        let lower = volterra_kernel(t, s, Hurst::new(0.3)?)?;
        let upper = volterra_kernel(t, s, Hurst::new(0.75)?)?;
        println!("{:>6} {:>6} {:>14.8} {:>14.8}", t, s, lower.value, upper.value);
    }

    println!("\nisometry check ∫ K(t,r)·K(s,r) dr vs R_H(t,s):");
    println!("{:>6} {:>6} {:>6} {:>14} {:>14} {:>10}", "H", "t", "s", "integral", "exact", "rel err");
    for h in [0.3, 0.75] {
        let hurst = Hurst::new(h)?;
        for (t, s) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0)] {
            let iso = kernel_isometry(t, s, hurst)?;
            let exact = r_h(t, s, hurst)?;
            println!(
                "{:>6} {:>6} {:>6} {:>14.8} {:>14.8} {:>10.1e}",
                h,
                t,
                s,
                iso.value,
                exact,
                (iso.value - exact).abs() / exact
            );
        }
    }

    // Conditioning on the innovation up to l−1 splits the variance of the
    // increment over [t₁, t₂] ⊂ [l, l+1] into a residue part (measurable in
    // the past) and an innovation part; the two must rebuild (t₂−t₁)^{2H}.
    println!("\nresidue + innovation variance decomposition:");
    println!(
        "{:>6} {:>6} {:>6} {:>12} {:>12} {:>12} {:>10}",
        "H", "t1", "t2", "residue", "innovation", "(t2−t1)^2H", "gap"
    );
    for (l, t1, t2, h) in [(2, 2.25, 2.75, 0.3), (2, 2.25, 2.75, 0.75), (3, 3.0, 4.0, 0.75)] {
        let rep = decomposition_variance_check(l, t1, t2, Hurst::new(h)?)?;
        println!(
            "{:>6} {:>6} {:>6} {:>12.8} {:>12.8} {:>12.8} {:>10.1e}",
            h,
            t1,
            t2,
            rep.residue_variance,
            rep.innovation_variance,
            rep.lhs,
            rep.gap().abs()
        );
    }

    // The residue process Y_{n,k}(u) on the k-th unit window after n: its
    // increment and variance ratios stay bounded, which is what makes the
    // residue a Lipschitz perturbation of the innovation.
    let report = lipschitz_ratio_scan(&[4, 8, 16], None, 5, Hurst::new(0.75)?)?;
    println!("\nresidue ratio scan at H = 0.75 over n ∈ {{4, 8, 16}}, all k ≤ n:");
    println!("  {} scan points", report.points.len());
    println!("  max increment ratio: {:.6}", report.max_ratio1);
    println!("  max variance ratio:  {:.6}", report.max_ratio2);
    Ok(())
}
