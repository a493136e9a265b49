//! Closed-form supremum law for steps with a geometric RIGHT tail.
//!
//! With `P(X >= x) = xi r^x` (x >= 0) and negative drift, the all-time
//! maximum is geometric: `P(sup > x) = p * rho^x` with
//! `rho = 1 - (1-p)(1-r)`, where `1/rho` is the unique root of
//! `E[s^X] = 1` in `(1, 1/r)`. The root is found by bisection (the pgf is
//! strictly convex there) and polished with two safeguarded Newton steps.

use crate::dist::{StepDistribution, StepLaw, SupremumLaw, TailSide};
use crate::error::{Error, Result};

/// Output of the right-tail solver.
#[derive(Debug, Clone, Copy)]
pub struct RightSolution {
    /// Root of `E[s^X] = 1` in `(1, 1/r)`.
    pub s_star: f64,
    /// `P(sup_n S_n > 0)`.
    pub p: f64,
    /// Decay rate of the supremum law, `rho = 1/s_star`.
    pub decay: f64,
}

pub fn solve(step: &StepDistribution) -> Result<RightSolution> {
    if step.side() != TailSide::Right {
        return Err(Error::WrongTailSide { expected: "right" });
    }
    let mean = step.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    let r = step.r();
    let f = |s: f64| step.pgf(s).expect("bracket stays inside (0, 1/r)") - 1.0;

    let mut lo = 1.0 + 1e-9;
    let mut hi = (1.0 / r) * (1.0 - 1e-9);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoBracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = step.pgf_derivative(s)?;
        if d != 0.0 {
            let candidate = s - f(s) / d;
            if candidate > lo - 1e-12 && candidate < hi + 1e-12 {
                s = candidate;
            }
        }
    }

    let p = 1.0 - (1.0 - 1.0 / s) / (1.0 - r);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "derived ladder probability {p} outside (0,1); root {s}"
        )));
    }
    Ok(RightSolution { s_star: s, p, decay: 1.0 / s })
}

/// The geometric supremum law: `P(sup > x) = p rho^x`, materialized on
/// `0..=x_max` with tail bound `p rho^x_max`.
pub fn sup_law(sol: &RightSolution, x_max: usize) -> SupremumLaw {
    let (p, rho) = (sol.p, sol.decay);
    let mut pmf = Vec::with_capacity(x_max + 1);
    pmf.push(1.0 - p);
    for x in 1..=x_max {
        pmf.push(p * (1.0 - rho) * rho.powi(x as i32 - 1));
    }
    let tail = p * rho.powi(x_max as i32);
    SupremumLaw::new(pmf, tail).expect("geometric law is normalized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn gr1() -> StepDistribution {
        StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)])).unwrap()
    }

    #[test]
    fn gr1_root_and_ladder_probability() {
        // roots of 0.5 s^2 - 1.1 s + 0.6 are 1 and 1.2; the solver must pick 1.2
        let sol = solve(&gr1()).unwrap();
        assert!((sol.s_star - 1.2).abs() < 1e-11, "s_star = {}", sol.s_star);
        assert!((sol.p - 2.0 / 3.0).abs() < 1e-11, "p = {}", sol.p);
        assert!((sol.decay - 5.0 / 6.0).abs() < 1e-11);
        assert!((sol.decay - 1.0 / sol.s_star).abs() < 1e-12);
    }

    #[test]
    fn pgf_at_root_is_one() {
        let step = gr1();
        let sol = solve(&step).unwrap();
        assert!((step.pgf(sol.s_star).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_drift_and_wrong_side_rejected() {
        let up = StepDistribution::from_right_tail(0.8, 0.5, &BTreeMap::from([(-1, 0.2)])).unwrap();
        assert!(matches!(solve(&up), Err(Error::NonNegativeDrift { .. })));

        let pos = crate::dist::IntegerPMF::new(1, vec![0.4], 0.6, 0.0).unwrap();
        let left = StepDistribution::from_left_tail(0.6, 0.5, pos).unwrap();
        assert!(matches!(solve(&left), Err(Error::WrongTailSide { .. })));
    }

    #[test]
    fn sup_law_survival_matches_closed_form() {
        let sol = solve(&gr1()).unwrap();
        let law = sup_law(&sol, 60);
        assert!((law.survival(0) - 2.0 / 3.0).abs() < 1e-12);
        let expect3 = (2.0 / 3.0) * (5.0f64 / 6.0).powi(3);
        assert!((law.survival(3) - expect3).abs() < 1e-12);
        // P(sup >= 0) = 1 and pmf[0] = 1 - p
        assert!((law.survival(-1) - 1.0).abs() < 1e-15);
        assert!((law.pmf()[0] - (1.0 - sol.p)).abs() < 1e-12);
    }

    #[test]
    fn psi_from_binomial_sums_matches_geometric_form() {
        // sum_{n=1..x} p^n C(x-1,n-1) (1-r)^n r^(x-n) = p(1-r) rho^(x-1)
        let sol = solve(&gr1()).unwrap();
        let (p, r, rho): (f64, f64, f64) = (sol.p, 0.5, sol.decay);
        for x in 1..=30i64 {
            let mut acc = 0.0;
            for n in 1..=x {
                let mut binom = 1.0;
                for i in 0..(n - 1) {
                    binom *= (x - 1 - i) as f64 / (i + 1) as f64;
                }
                acc += p.powi(n as i32) * binom * (1.0 - r).powi(n as i32) * r.powi((x - n) as i32);
            }
            let expect = p * (1.0 - r) * rho.powi(x as i32 - 1);
            assert!((acc - expect).abs() < 1e-12, "x={x}: {acc} vs {expect}");
        }
    }

    #[test]
    fn recursion_identity_at_zero() {
        // sum_{y<=0} (1 - p rho^(-y)) F{y} = 1 - p
        let step = gr1();
        let sol = solve(&step).unwrap();
        let mut acc = (1.0 - sol.p) * step.atom(0);
        acc += (1.0 - sol.p * sol.decay.powi(1)) * step.atom(-1);
        assert!((acc - (1.0 - sol.p)).abs() < 1e-10);
    }
}
