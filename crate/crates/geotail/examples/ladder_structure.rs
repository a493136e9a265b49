//! Ladder indices, ladder heights, and the tie probability.
//!
//! Decomposes a few concrete trajectories into strict/weak ladder events,
//! then runs the definition-level DP that accumulates the first-ladder
//! height measure L, the ladder probability p, and the tie probability
//! zeta, together with the series route for zeta they are checked against.
//!
//! ```bash
//! cargo run --example ladder_structure
//! ```

use geotail::dist::StepDistribution;
use geotail::ladder::{decompose, ladder_dp_auto, zeta_series, Path};
use std::collections::BTreeMap;

fn main() -> geotail::Result<()> {
    for steps in [vec![1, -1, 2], vec![-1, 1], vec![-1, -2, 5]] {
        let path = Path::from_steps(steps.clone());
        let d = decompose(&path);
        println!("steps {steps:?}: partial sums {:?}", path.partials());
        println!("  strict ladder (index, height): {:?}", d.strict_indices.iter().zip(&d.strict_heights).collect::<Vec<_>>());
        println!("  weak ladder   (index, height): {:?}", d.weak_indices.iter().zip(&d.weak_heights).collect::<Vec<_>>());
    }

    let step = StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)]))?;
    let data = ladder_dp_auto(&step, 1e-8)?;
    println!("\nDP over the geometric-right worked law:");
    println!("  p    = {:.10} (closed form gives 2/3)", data.p);
    println!("  zeta = {:.10}", data.zeta);
    println!("  first ladder heights: L{{1}} = {:.8}, L{{2}} = {:.8}", data.l_mass[&1], data.l_mass[&2]);
    println!("  certified tail bound: {:.2e}", data.l_tail_bound);

    let est = zeta_series(&step, 8000)?;
    println!("\nzeta via the return-probability series: {:.10}", est.zeta);
    println!("  (gated against the DP value {:.10})", est.dp_zeta);
    Ok(())
}
