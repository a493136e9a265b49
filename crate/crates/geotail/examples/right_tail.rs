//! Solve a step law with a geometric right tail.
//!
//! The law here is P(X = -1) = 0.6 and P(X >= x) = 0.4 * 0.5^x for x >= 0.
//! Its pgf satisfies 0.5 s^2 - 1.1 s + 0.6 = 0 at the solver's root, so
//! s* = 1.2 exactly, the ladder probability is p = 2/3 and the supremum of
//! the walk is geometric with rate 5/6.
//!
//! ```bash
//! cargo run --example right_tail
//! ```

use geotail::dist::{StepDistribution, StepLaw};
use geotail::kp_right;
use std::collections::BTreeMap;

fn main() -> geotail::Result<()> {
    let step = StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)]))?;
    println!("step mean: {:+.6}", step.mean());

    let sol = kp_right::solve(&step)?;
    println!("root s*   = {:.12}", sol.s_star);
    println!("p         = {:.12}", sol.p);
    println!("decay rho = {:.12}", sol.decay);

    let law = kp_right::sup_law(&sol, 12);
    println!("\n  x    P(sup = x)      P(sup > x)");
    for (x, pmf) in law.pmf().iter().enumerate() {
        println!("{:>3}    {:<12.8}    {:<12.8}", x, pmf, law.survival(x as i64));
    }
    println!("tail bound beyond x = 12: {:.3e}", law.tail_bound());
    Ok(())
}
