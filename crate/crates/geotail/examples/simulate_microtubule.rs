//! Event-driven simulation of growth/shrinkage cycles.
//!
//! The two-stage queue doubles as a model of dynamic instability in a
//! polymer chain: stage-1 arrivals are subunits joining the chain's cap,
//! stage-1 service converts them, and stage 2 dissociates converted
//! subunits from the far end (last come, first served) whenever the cap is
//! gone: a shrinkage episode ("catastrophe") that the next arrival ends
//! ("rescue"). Per cycle the simulator records the growth increment N, the
//! shrinkage capacity M, and the chain length Z at rescue; the stationary
//! Z histogram is compared against the analytic law.
//!
//! ```bash
//! cargo run --release --example simulate_microtubule
//! ```

use geotail::sim::simulate_tandem;
use geotail::tandem::{analyze, TandemParams};

fn main() -> geotail::Result<()> {
    let params = TandemParams::new(1.0, 0.3, 0.5)?;
    let n_cycles = 500_000;
    let report = simulate_tandem(&params, n_cycles, 42);

    println!("simulated {n_cycles} growth/shrinkage cycles (seed {})", report.seed);
    let freq = |hist: &std::collections::BTreeMap<i64, u64>, k: i64| {
        hist.get(&k).copied().unwrap_or(0) as f64 / n_cycles as f64
    };

    println!("\ngrowth increments N vs busy-period law:");
    let busy = geotail::tandem::busy_period_pmf(params.a, 8)?;
    for k in 1..=5i64 {
        println!(
            "  P(N = {k}): empirical {:.5}, exact {:.5}",
            freq(&report.busy_period_hist, k),
            geotail::dist::StepLaw::atom(&busy, k)
        );
    }

    println!("\nshrinkage capacities M vs geometric(r = {:.4}):", params.r);
    for m in 0..=4i64 {
        let exact = params.r.powi(m as i32) * (1.0 - params.r);
        println!(
            "  P(M = {m}): empirical {:.5}, exact {:.5}",
            freq(&report.dissociation_hist, m),
            exact
        );
    }

    println!("\nchain length at rescue vs analytic stationary law:");
    let solution = analyze(&params, 64)?.solution;
    for z in 0..=6i64 {
        println!(
            "  P(Z = {z}): empirical {:.5}, analytic {:.5}",
            freq(&report.occupancy_hist, z),
            solution.sup.pmf()[z as usize]
        );
    }
    Ok(())
}
