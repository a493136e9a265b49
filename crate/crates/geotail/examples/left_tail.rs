//! Solve a step law with a geometric left tail.
//!
//! Left tails are the interesting direction: the supremum law is no longer
//! a plain geometric, and the solver goes through the tie probability zeta,
//! the ladder-height measure L, and the Khinchine-Pollaczek generating
//! function, cross-checking every stage against definition-level DP.
//!
//! ```bash
//! cargo run --example left_tail
//! ```

use geotail::dist::{IntegerPMF, StepDistribution, StepLaw};
use geotail::kp_left;

fn main() -> geotail::Result<()> {
    // P(X=1)=0.1, P(X=2)=0.06, P(X=3)=0.04, and P(X <= x) = 0.8 * 0.75^(-x)
    let positive = IntegerPMF::new(1, vec![0.1, 0.06, 0.04], 0.8, 0.0)?;
    let step = StepDistribution::from_left_tail(0.8, 0.75, positive)?;
    println!("step mean: {:+.6}", step.mean());

    let sol = kp_left::solve(&step, 48)?;
    println!("zeta = {:.10}   (tie probability, dual-oracle validated)", sol.zeta);
    println!("p    = {:.10}   (from (1-zeta) p = r + (1-r) E[X])", sol.p);

    println!("\nladder-height measure L (tail bound {:.2e}):", sol.l_tail_bound);
    for (x, mass) in sol.l_mass.iter().take(6) {
        println!("  L{{{x}}} = {mass:.10}");
    }

    println!("\n  x    P(sup = x)       M(s) coefficient");
    for x in 0..=10usize {
        println!("{:>3}    {:<13.10}    {:<13.10}", x, sol.sup.pmf()[x], sol.mgf.coeff(x));
    }
    println!("(the two columns come from independent routes and must agree)");
    Ok(())
}
