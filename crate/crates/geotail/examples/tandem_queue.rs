//! Analyze the two-stage queue end to end.
//!
//! Arrivals hit stage 1 every `alpha` time units on average, stage-1
//! service takes `beta`, and stage 2 (active only while stage 1 idles)
//! takes `gamma`. The number of stage-2 customers sampled at the end of
//! each shrinkage period is the supremum of a left-tail random walk; this
//! example prints the whole derivation chain for alpha=1, beta=0.3,
//! gamma=0.5.
//!
//! ```bash
//! cargo run --example tandem_queue
//! ```

use geotail::dist::StepLaw;
use geotail::tandem::{analyze, busy_period_pmf, u_eval, TandemParams};

fn main() -> geotail::Result<()> {
    let params = TandemParams::new(1.0, 0.3, 0.5)?;
    println!("loads: a = {:.4}, b = {:.4}; ratio r = {:.4}", params.a, params.b, params.r);

    let busy = busy_period_pmf(params.a, 12)?;
    println!("\nbusy-period law (first atoms): ");
    for k in 1..=5i64 {
        println!("  P(N = {k}) = {:.8}", busy.atom(k));
    }
    println!("  E[N] = 1/(1-a) = {:.8}", 1.0 / (1.0 - params.a));
    println!("  xi = U(r) = {:.8}", u_eval(params.a, params.r)?);

    let report = analyze(&params, 64)?;
    let sol = &report.solution;
    println!("\ninduced step law: E[X] = {:+.8}", report.step.mean());
    println!("zeta = {:.8}, p = {:.8}", sol.zeta, sol.p);

    println!("\nstationary stage-2 backlog:");
    println!("  z    P(Z = z)");
    for z in 0..=10usize {
        println!("{:>3}    {:.8}", z, sol.sup.pmf()[z]);
    }
    println!("  (tail bound {:.2e})", sol.sup.tail_bound());
    Ok(())
}
