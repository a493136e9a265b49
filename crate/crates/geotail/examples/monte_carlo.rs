//! Reproducible Monte Carlo sampling of walk maxima.
//!
//! Each path draws from its own counter-based substream, so the histogram
//! is identical for a given seed no matter how many threads run it.
//!
//! ```bash
//! cargo run --release --example monte_carlo
//! ```

use geotail::dist::StepDistribution;
use geotail::kp_right;
use geotail::sim::mc_sup;
use std::collections::BTreeMap;

fn main() -> geotail::Result<()> {
    let step = StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)]))?;
    let n_paths = 200_000u64;
    let report = mc_sup(&step, n_paths, 256, 42)?;

    let closed = kp_right::sup_law(&kp_right::solve(&step)?, 64);
    println!("  x    empirical    exact        deviation/sigma");
    for x in 0..=8i64 {
        let count = report.histogram.get(&x).copied().unwrap_or(0);
        let freq = count as f64 / n_paths as f64;
        let p = closed.pmf()[x as usize];
        let sigma = (p * (1.0 - p) / n_paths as f64).sqrt();
        println!("{:>3}    {:.6}     {:.6}     {:+.2}", x, freq, p, (freq - p) / sigma);
    }

    let again = mc_sup(&step, n_paths, 256, 42)?;
    println!("\nsame seed, second run identical: {}", again == report);
    Ok(())
}
