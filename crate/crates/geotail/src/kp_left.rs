//! Supremum law for steps with a geometric LEFT tail, via the tie
//! probability `zeta`, the ladder-height measure `L`, and the
//! Khinchine-Pollaczek generating function `M(s)`.
//!
//! For `P(X <= x) = xi r^(-x)` (x <= 0) with negative drift:
//!
//! * `(1 - zeta) p = r + (1-r) E[X]` pins the ladder probability once
//!   `zeta` is known (the dual-oracle machinery in [`crate::ladder`]
//!   supplies it),
//! * `(1 - zeta) L{x} = P(X = x) + (1-r) P(X > x)` gives the ladder-height
//!   masses pointwise,
//! * the supremum pmf is `(1-p) sum_n L^(n*)`, and equivalently the
//!   coefficients of `M(s) = (1-p) / (1 - Lpgf(s))`.
//!
//! [`solve`] computes the law both ways and requires them to agree
//! coefficientwise, which is the numerical verification of the closed-form
//! route.

use std::collections::BTreeMap;

use crate::dist::{PowerSeries, StepDistribution, StepLaw, SupremumLaw, TailSide};
use crate::error::{Error, Result};
use crate::ladder;

/// Tolerance for the mandatory coefficientwise agreement between the
/// convolution route and the `M(s)` series route.
pub const ROUTE_TOL: f64 = 1e-8;

/// Everything the left-tail solver produces.
#[derive(Debug, Clone)]
pub struct LeftSolution {
    pub zeta: f64,
    pub p: f64,
    /// Ladder-height masses `L{x}` for `x = 1..=K`.
    pub l_mass: BTreeMap<i64, f64>,
    /// Bound on the ladder mass above `K`.
    pub l_tail_bound: f64,
    /// Supremum pmf on `0..=K` (convolution route).
    pub sup: SupremumLaw,
    /// Coefficients of `M(s) = E[s^sup]` to order `K` (series route).
    pub mgf: PowerSeries,
}

/// The ladder-height measure on `1..=x_max` with its truncation bound.
#[derive(Debug, Clone)]
pub struct LadderMeasure {
    pub l_mass: BTreeMap<i64, f64>,
    pub tail_bound: f64,
}

fn require_left(step: &StepDistribution) -> Result<()> {
    if step.side() != TailSide::Left {
        return Err(Error::WrongTailSide { expected: "left" });
    }
    let mean = step.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    Ok(())
}

/// Pointwise ladder-height masses `L{x} = [P(X=x) + (1-r) P(X>x)] / (1-zeta)`
/// for `x = 1..=x_max`, with the remainder above `x_max` bounded through the
/// closed form for `L[x, oo)`.
pub fn ladder_measure(step: &StepDistribution, zeta: f64, x_max: i64) -> Result<LadderMeasure> {
    require_left(step)?;
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::InvalidParameter(format!("zeta must lie in [0,1), got {zeta}")));
    }
    if x_max < 1 {
        return Err(Error::InvalidParameter(format!("x_max must be >= 1, got {x_max}")));
    }
    let r = step.r();
    let scale = 1.0 / (1.0 - zeta);
    let mut l_mass = BTreeMap::new();
    for x in 1..=x_max {
        let m = step.atom(x) + (1.0 - r) * step.survival_gt(x);
        if m > 0.0 {
            l_mass.insert(x, m * scale);
        }
    }
    // (1-zeta) L[x_max+1, oo) = P(X >= x_max+1) + (1-r) sum_{m > x_max} P(X > m)
    let hi = step.finite_part().hi();
    let rtm = step.finite_part().right_tail_mass();
    let mut overshoot_sum = 0.0;
    for m in (x_max + 1)..=hi.max(x_max) {
        overshoot_sum += step.survival_gt(m);
    }
    // remainder of the survival sum beyond the materialized positive part
    let beyond = match step.finite_tail_hint() {
        Some(h) if h.ratio < 1.0 => h.scale * h.ratio / (1.0 - h.ratio),
        // no decay certificate: treat the remainder as a point mass at hi+1,
        // the same convention `mean` uses
        _ => rtm,
    };
    let tail_bound = (step.survival_gt(x_max) + (1.0 - r) * (overshoot_sum + beyond)) * scale;
    Ok(LadderMeasure { l_mass, tail_bound })
}

/// The ladder-height pgf `Lpgf(s) = E[s^H1, sup > 0] / ...` evaluated from
/// the closed form; the `(1-s)` singularity is removed by summing the
/// geometric partials explicitly, so values near `s = 1` are stable.
///
/// Returns `Lpgf(s)`; multiply by `(1 - zeta)` to get the raw closed-form
/// value, which tends to `r + (1-r) E[X]` as `s -> 1`.
pub fn ladder_pgf(step: &StepDistribution, zeta: f64, s: f64) -> Result<f64> {
    require_left(step)?;
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::InvalidParameter(format!("zeta must lie in [0,1), got {zeta}")));
    }
    if s.abs() >= 1.0 {
        return Err(Error::OutOfDomain { value: s, lo: -1.0, hi: 1.0 });
    }
    let r = step.r();
    let finite = step.finite_part();
    let mut f_plus = 0.0;
    let mut weighted = 0.0; // sum_x F{x} * (s + s^2 + ... + s^(x-1))
    let mut partial = 0.0; // s + ... + s^(x-1), updated incrementally
    let mut s_pow = s; // s^x
    for x in 1..=finite.hi() {
        let m = finite.atom(x);
        if m > 0.0 {
            f_plus += m * s_pow;
            weighted += m * partial;
        }
        partial += s_pow;
        s_pow *= s;
    }
    Ok((f_plus + (1.0 - r) * weighted) / (1.0 - zeta))
}

/// Full left-tail solve to truncation order `k`.
///
/// Runs the dual-oracle `zeta` machinery, derives `p`, builds the ladder
/// measure, and computes the supremum law twice: by summing convolution
/// powers of `L`, and by expanding `M(s) = (1-p)/(1 - Lpgf(s))` as a power
/// series. The two routes must agree within [`ROUTE_TOL`] coefficientwise,
/// and `p` must match the ladder DP's independent value.
pub fn solve(step: &StepDistribution, k: usize) -> Result<LeftSolution> {
    require_left(step)?;
    if k == 0 {
        return Err(Error::InvalidParameter("truncation order k must be >= 1".into()));
    }
    let zeta_est = ladder::zeta_series(step, 20_000)?;
    let zeta = zeta_est.zeta;

    let r = step.r();
    let p = (r + (1.0 - r) * step.mean()) / (1.0 - zeta);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ladder probability {p} outside (0,1)"
        )));
    }
    // cross-check against the DP's definition-level p
    let dp_gap = (p - zeta_est.dp_p).abs();
    if dp_gap > 1e-6 + zeta_est.dp_p_bound {
        return Err(Error::OracleDisagreement(format!(
            "p from (1-zeta)p = r+(1-r)E[X] is {p}, ladder DP gives {} (gap {dp_gap:e})",
            zeta_est.dp_p
        )));
    }

    // the reported measure extends past k up to the materialized support
    // whenever the closed-form remainder at k is still above 1e-12
    let mut measure = ladder_measure(step, zeta, k as i64)?;
    if measure.tail_bound >= 1e-12 && step.finite_part().hi() > k as i64 {
        measure = ladder_measure(step, zeta, step.finite_part().hi())?;
    }
    let mut l_vec = vec![0.0; k + 1];
    for (&x, &m) in &measure.l_mass {
        if x <= k as i64 {
            l_vec[x as usize] = m;
        }
    }

    // route 1: sup pmf = (1-p) sum_n L^(n*), truncated once the geometric
    // bound on the remaining convolution mass drops below 1e-12
    let mut psi = vec![0.0; k + 1];
    psi[0] = 1.0;
    let mut cur = l_vec.clone();
    let mut n = 1usize;
    loop {
        for (x, &c) in cur.iter().enumerate() {
            psi[x] += c;
        }
        n += 1;
        if n > k || p.powi(n as i32 + 1) / (1.0 - p) < 1e-12 {
            break;
        }
        let mut next = vec![0.0; k + 1];
        for (i, &a) in cur.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in l_vec.iter().take(k + 1 - i).enumerate() {
                if b != 0.0 {
                    next[i + j] += a * b;
                }
            }
        }
        cur = next;
    }
    let sup_pmf: Vec<f64> = psi.iter().map(|&v| (1.0 - p) * v).collect();
    let covered: f64 = sup_pmf.iter().sum();
    let sup = SupremumLaw::new(sup_pmf, (1.0 - covered).max(0.0) + 1e-12)?;

    // route 2: M(s) = (1-p) / (1 - Lpgf(s)) expanded to order k
    let mut one_minus_l = vec![0.0; k + 1];
    one_minus_l[0] = 1.0;
    for x in 1..=k {
        one_minus_l[x] = -l_vec[x];
    }
    let mgf = PowerSeries::from_coeffs(one_minus_l).reciprocal()?.scale(1.0 - p);

    let mut worst = 0.0f64;
    for x in 0..=k {
        worst = worst.max((mgf.coeff(x) - sup.pmf()[x]).abs());
    }
    if worst > ROUTE_TOL {
        return Err(Error::OracleDisagreement(format!(
            "sup-law routes disagree: max coefficient gap {worst:e} > {ROUTE_TOL:e}"
        )));
    }

    debug_assert!((mgf.coeff(0) - (1.0 - p)).abs() < 1e-10);
    Ok(LeftSolution {
        zeta,
        p,
        l_mass: measure.l_mass,
        l_tail_bound: measure.tail_bound,
        sup,
        mgf,
    })
}
