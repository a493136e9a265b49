//! Fixed point of the Lindley recursion `w' = max(0, w + X)` on a truncated
//! lattice: the limit law is the law of `sup_n S_n`.

use crate::dist::{StepLaw, SupremumLaw};
use crate::error::{Error, Result};
use crate::ladder::lundberg_base;

/// Iteration state: the current law of `w_n` on `0..=x_max`, the sweep
/// count, the last sweep's total-variation change, and the cumulative mass
/// pushed past `x_max` (dropped, but accounted against normalization).
#[derive(Debug, Clone)]
pub struct LindleyState {
    pub dist: Vec<f64>,
    pub iteration: usize,
    pub tv_delta: f64,
    pub leak: f64,
}

/// Iterates the Lindley recursion from `w_0 = 0` until the total-variation
/// change of one sweep drops below `tol`, returning the fixed point as a
/// supremum law with `tail_bound = leak + tol`.
pub fn lindley_fixed_point(
    law: &impl StepLaw,
    x_max: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<SupremumLaw> {
    lindley_fixed_point_with_state(law, x_max, tol, max_sweeps).map(|(sup, _)| sup)
}

pub fn lindley_fixed_point_with_state(
    law: &impl StepLaw,
    x_max: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<(SupremumLaw, LindleyState)> {
    let mean = law.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    if !(tol > 0.0 && tol <= 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in (0, 1e-9] so the truncation stays accountable, got {tol}"
        )));
    }
    if x_max == 0 {
        return Err(Error::InvalidParameter("x_max must be >= 1".into()));
    }
    // a-priori check that the lattice is wide enough for the target accuracy
    if let Some(s_b) = lundberg_base(law) {
        let bound = s_b.powi(-(x_max as i32));
        if bound >= tol / 10.0 {
            return Err(Error::InvalidParameter(format!(
                "x_max = {x_max} too small: certified bound on P(sup > x_max) is {bound:e}, \
                 need < tol/10 = {:e}",
                tol / 10.0
            )));
        }
    }

    let (jlo, jhi) = law.window(1e-21);
    let jlo = jlo.max(-(x_max as i64) - 1);
    let jhi = jhi.min(x_max as i64 + 1);
    let atoms: Vec<f64> = (jlo..=jhi).map(|j| law.atom(j)).collect();
    // per-source closed forms: mass collapsing to 0 and mass leaking past x_max
    let to_zero: Vec<f64> = (0..=x_max as i64).map(|y| law.cdf(-y)).collect();
    let past_top: Vec<f64> = (0..=x_max as i64).map(|y| law.survival_gt(x_max as i64 - y)).collect();
    // transitions beyond the atom table (possible only when jhi < x_max)
    let off_table = if jhi < x_max as i64 { law.survival_gt(jhi) } else { 0.0 };

    let mut w = vec![0.0; x_max + 1];
    w[0] = 1.0;
    let mut leak = 0.0;
    let mut state_tv = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let mut next = vec![0.0; x_max + 1];
        for (y, &m) in w.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            next[0] += m * to_zero[y];
            leak += m * past_top[y];
            let j_start = (1 - y as i64).max(jlo);
            let j_end = (x_max as i64 - y as i64).min(jhi);
            for j in j_start..=j_end {
                next[(y as i64 + j) as usize] += m * atoms[(j - jlo) as usize];
            }
        }
        let tv = 0.5 * w.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>();
        w = next;
        state_tv = tv;
        if tv < tol {
            let state = LindleyState { dist: w.clone(), iteration: sweep, tv_delta: tv, leak };
            let tail = leak + tol + sweep as f64 * off_table;
            let sup = SupremumLaw::new(w, tail)?;
            return Ok((sup, state));
        }
    }
    Err(Error::NonConvergence(format!(
        "Lindley iteration still moving (tv {state_tv:e}) after {max_sweeps} sweeps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{IntegerPMF, StepDistribution};
    use crate::kp_right;
    use std::collections::BTreeMap;

    fn gr1() -> StepDistribution {
        StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)])).unwrap()
    }

    #[test]
    fn gr1_fixed_point_matches_closed_form() {
        let sup = lindley_fixed_point(&gr1(), 200, 1e-10, 100_000).unwrap();
        let sol = kp_right::solve(&gr1()).unwrap();
        let closed = kp_right::sup_law(&sol, 200);
        let gap = closed.survival_sup_norm(&sup, 50);
        assert!(gap <= 1e-8, "sup-norm {gap:e}");
    }

    #[test]
    fn pure_down_step_is_immediate_fixed_point() {
        let law = IntegerPMF::from_atoms([(-1, 1.0)]).unwrap();
        let (sup, state) = lindley_fixed_point_with_state(&law, 8, 1e-10, 10).unwrap();
        assert_eq!(state.iteration, 1);
        assert_eq!(sup.pmf()[0], 1.0);
        assert!(sup.pmf()[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn mass_is_conserved_with_leak() {
        let (sup, state) = lindley_fixed_point_with_state(&gr1(), 200, 1e-10, 100_000).unwrap();
        let total: f64 = sup.pmf().iter().sum::<f64>() + state.leak;
        assert!((total - 1.0).abs() < 1e-12, "total {total}");
        assert!(state.leak >= 0.0);
    }

    #[test]
    fn too_small_lattice_rejected() {
        assert!(matches!(
            lindley_fixed_point(&gr1(), 20, 1e-10, 1000),
            Err(Error::InvalidParameter(_))
        ));
    }
}
