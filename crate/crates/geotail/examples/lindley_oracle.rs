//! The Lindley-recursion oracle.
//!
//! The waiting-time recursion w' = max(0, w + X) has the law of the walk's
//! running maximum as its fixed point, so iterating it on a truncated
//! lattice gives a solver-independent reference for the supremum law. Here
//! it is pitted against the geometric closed form.
//!
//! ```bash
//! cargo run --example lindley_oracle
//! ```

use geotail::dist::StepDistribution;
use geotail::kp_right;
use geotail::sim::lindley_fixed_point_with_state;
use std::collections::BTreeMap;

fn main() -> geotail::Result<()> {
    let step = StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)]))?;

    let (fixed_point, state) = lindley_fixed_point_with_state(&step, 200, 1e-10, 500_000)?;
    println!(
        "converged after {} sweeps (last TV change {:.2e}, leak {:.2e})",
        state.iteration, state.tv_delta, state.leak
    );

    let closed = kp_right::sup_law(&kp_right::solve(&step)?, 200);
    println!("\n  x    fixed point     closed form     |diff|");
    for x in [0usize, 1, 2, 5, 10, 20, 50] {
        let a = fixed_point.pmf()[x];
        let b = closed.pmf()[x];
        println!("{:>3}    {:<12.10}  {:<12.10}  {:.2e}", x, a, b, (a - b).abs());
    }
    let gap = closed.survival_sup_norm(&fixed_point, 50);
    println!("\nsup-norm of survival difference on [0, 50]: {gap:.3e}");
    Ok(())
}
