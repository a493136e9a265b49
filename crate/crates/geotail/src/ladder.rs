//! Definition-level oracles for the ladder structure of a negative-drift
//! integer walk: the first-ladder-height measure `L`, the ladder probability
//! `p = P(sup S_n > 0)`, and the tie probability `zeta`.
//!
//! Everything here is computed straight from the definitions by forward
//! dynamic programming over the walk's value, independent of the closed
//! forms in [`crate::kp_right`] and [`crate::kp_left`] that it validates.
//! Truncations (value floor, sweep horizon, height cap) are certified with
//! an exponential supermartingale bound: any `s_b > 1` with `E[s_b^X] <= 1`
//! gives `P(sup_n S_n >= x) <= s_b^(-x)`, so both the mass parked below the
//! floor and the mass still in flight at the horizon can be bounded by how
//! far below zero it sits.

use std::collections::BTreeMap;

use crate::dist::StepLaw;
use crate::error::{Error, Result};

/// A realized finite trajectory: steps and partial sums (`partials[0] = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    steps: Vec<i64>,
    partials: Vec<i64>,
}

impl Path {
    pub fn from_steps(steps: Vec<i64>) -> Self {
        let mut partials = Vec::with_capacity(steps.len() + 1);
        partials.push(0);
        let mut s = 0i64;
        for &x in &steps {
            s += x;
            partials.push(s);
        }
        Self { steps, partials }
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    pub fn partials(&self) -> &[i64] {
        &self.partials
    }
}

/// Strict and weak ladder indices/heights of a finite path.
///
/// `n` is a strict ladder index when `S_n` strictly exceeds every earlier
/// partial sum; it is a weak ladder index when `S_n` matches or exceeds the
/// running maximum. The first weak index is therefore the smallest `n` with
/// `S_1 < 0, ..., S_{n-1} < 0` and `S_n >= 0`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LadderDecomposition {
    pub strict_indices: Vec<usize>,
    pub strict_heights: Vec<i64>,
    pub weak_indices: Vec<usize>,
    pub weak_heights: Vec<i64>,
}

pub fn decompose(path: &Path) -> LadderDecomposition {
    let mut out = LadderDecomposition::default();
    let mut run_max = 0i64;
    for (n, &s) in path.partials().iter().enumerate().skip(1) {
        if s > run_max {
            out.strict_indices.push(n);
            out.strict_heights.push(s);
        }
        if s >= run_max {
            out.weak_indices.push(n);
            out.weak_heights.push(s);
            run_max = s;
        }
    }
    out
}

/// Ladder quantities with certified truncation bounds.
///
/// `sum(l_mass) <= p <= sum(l_mass) + l_tail_bound`; the height-cap
/// overshoot (ladder mass whose height exceeded the cap) is included in `p`
/// and in the bound.
#[derive(Debug, Clone)]
pub struct LadderData {
    pub p: f64,
    pub zeta: f64,
    pub l_mass: BTreeMap<i64, f64>,
    pub l_tail_bound: f64,
    pub zeta_tail_bound: f64,
}

/// Certified exponential bound base: some `s_b > 1` with `E[s_b^X] <= 1`
/// (verified through [`StepLaw::pgf_upper`]), or `None` when the law cannot
/// certify one. Larger is tighter; the search bisects toward the pgf root.
pub fn lundberg_base(law: &impl StepLaw) -> Option<f64> {
    let certified = |s: f64| law.pgf_upper(s).map(|f| f <= 1.0).unwrap_or(false);
    let mut good = 1.0 + 1e-6;
    if !certified(good) {
        return None;
    }
    // grow until the certificate fails, then bisect back toward the root
    let mut bad = None;
    let mut probe = 1.0 + 2e-6;
    for _ in 0..80 {
        if certified(probe) {
            good = probe;
            probe = 1.0 + 2.0 * (probe - 1.0);
        } else {
            bad = Some(probe);
            break;
        }
    }
    let mut bad = bad?;
    for _ in 0..40 {
        let mid = 0.5 * (good + bad);
        if certified(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// Grid minimum of a certified upper bound on the pgf; this is a bound on
/// `P(S_n = 0) <= f_min^n` (Chernoff at level zero).
fn pgf_grid_min(law: &impl StepLaw, s_hi: f64) -> Option<f64> {
    let mut best = f64::INFINITY;
    let n = 256;
    for i in 0..=n {
        let s = 0.3 + (s_hi - 0.3) * i as f64 / n as f64;
        if s <= 0.0 {
            continue;
        }
        if let Some(f) = law.pgf_upper(s) {
            best = best.min(f);
        }
    }
    if best.is_finite() {
        Some(best.min(1.0))
    } else {
        None
    }
}

struct DpTables {
    atom_lo: i64,
    atoms: Vec<f64>,
    /// per state v: sum over u < floor of P(jump to u) * s_b^u — a certified
    /// bound on the chance the escaped path ever ladders
    esc_weighted: Vec<f64>,
    /// per state v: P(jump above the height cap)
    over: Vec<f64>,
    /// s_b^v for v in [floor, 0]
    weight: Vec<f64>,
    off_table: f64,
}

fn build_tables(law: &impl StepLaw, floor: i64, cap: i64, s_b: Option<f64>) -> DpTables {
    let (wlo, whi) = law.window(1e-21);
    let atom_lo = wlo.min(floor - 1);
    let atom_hi = whi.max(cap + 1);
    let atoms: Vec<f64> = (atom_lo..=atom_hi).map(|j| law.atom(j)).collect();
    let n_states = (-floor + 1) as usize;
    let w = |u: i64| s_b.map_or(1.0, |s| s.powi(u.max(-100_000) as i32)).min(1.0);
    let mut esc_weighted = vec![0.0; n_states];
    let mut over = vec![0.0; n_states];
    let mut weight = vec![0.0; n_states];
    for idx in 0..n_states {
        let v = floor + idx as i64;
        over[idx] = law.survival_gt(cap - v);
        weight[idx] = w(v);
        let mut acc = law.cdf(atom_lo + v - 1); // below-table remainder, weight <= 1
        let mut u = floor - 1;
        while u >= v + atom_lo {
            let a = atoms[(u - v - atom_lo) as usize];
            if a > 0.0 {
                acc += a * w(u);
            }
            u -= 1;
        }
        esc_weighted[idx] = acc;
    }
    let off_table = law.cdf(atom_lo - 1) + law.survival_gt(atom_hi);
    DpTables { atom_lo, atoms, esc_weighted, over, weight, off_table }
}

struct LadderDp {
    floor: i64,
    cap: i64,
    tables: DpTables,
    /// mass of paths with max(S_0..S_n) <= 0, by current value
    l_state: Vec<f64>,
    /// mass of paths with S_1 < 0, ..., S_n < 0, by current value
    z_state: Vec<f64>,
    l_mass: Vec<f64>,
    zeta: f64,
    overshoot: f64,
    floor_escape_bound: f64,
    zeta_escape_bound: f64,
    sweeps: usize,
}

impl LadderDp {
    fn new(law: &impl StepLaw, floor: i64, cap: i64, s_b: Option<f64>) -> Self {
        let tables = build_tables(law, floor, cap, s_b);
        let n_states = (-floor + 1) as usize;
        let mut l_state = vec![0.0; n_states];
        let mut z_state = vec![0.0; n_states];
        l_state[n_states - 1] = 1.0; // S_0 = 0
        z_state[n_states - 1] = 1.0;
        Self {
            floor,
            cap,
            tables,
            l_state,
            z_state,
            l_mass: vec![0.0; cap as usize + 1],
            zeta: 0.0,
            overshoot: 0.0,
            floor_escape_bound: 0.0,
            zeta_escape_bound: 0.0,
            sweeps: 0,
        }
    }

    fn sweep(&mut self) {
        let floor = self.floor;
        let cap = self.cap;
        let t = &self.tables;
        let n_states = self.l_state.len();
        let atom_hi = t.atom_lo + t.atoms.len() as i64 - 1;

        let mut new_l = vec![0.0; n_states];
        for idx in 0..n_states {
            let m = self.l_state[idx];
            if m == 0.0 {
                continue;
            }
            let v = floor + idx as i64;
            self.floor_escape_bound += m * t.esc_weighted[idx];
            self.overshoot += m * t.over[idx];
            let j_lo = (floor - v).max(t.atom_lo);
            let j_hi = (cap - v).min(atom_hi);
            for j in j_lo..=j_hi {
                let a = t.atoms[(j - t.atom_lo) as usize];
                if a == 0.0 {
                    continue;
                }
                let u = v + j;
                if u <= 0 {
                    new_l[(u - floor) as usize] += m * a;
                } else {
                    self.l_mass[u as usize] += m * a;
                }
            }
        }
        self.l_state = new_l;

        let mut new_z = vec![0.0; n_states];
        for idx in 0..n_states {
            let m = self.z_state[idx];
            if m == 0.0 {
                continue;
            }
            let v = floor + idx as i64;
            self.zeta_escape_bound += m * t.esc_weighted[idx];
            let j_lo = (floor - v).max(t.atom_lo);
            let j_hi = (-v).min(atom_hi);
            for j in j_lo..=j_hi {
                let a = t.atoms[(j - t.atom_lo) as usize];
                if a == 0.0 {
                    continue;
                }
                let u = v + j;
                if u < 0 {
                    new_z[(u - floor) as usize] += m * a;
                } else {
                    // u == 0: tie event; u > 0 was excluded by j_hi
                    self.zeta += m * a;
                }
            }
        }
        self.z_state = new_z;
        self.sweeps += 1;
    }

    /// Certified bound on ladder mass still reachable from in-flight paths.
    fn l_inflight_bound(&self) -> f64 {
        self.l_state.iter().zip(&self.tables.weight).map(|(m, w)| m * w).sum()
    }

    fn z_inflight_bound(&self) -> f64 {
        self.z_state.iter().zip(&self.tables.weight).map(|(m, w)| m * w).sum()
    }

    fn finish(self) -> LadderData {
        let drift_slack = self.sweeps as f64 * self.tables.off_table;
        let p: f64 = self.l_mass.iter().sum::<f64>() + self.overshoot;
        let l_tail_bound = self.l_inflight_bound()
            + self.floor_escape_bound
            + self.overshoot
            + drift_slack;
        let zeta_tail_bound = self.z_inflight_bound() + self.zeta_escape_bound + drift_slack;
        let l_mass: BTreeMap<i64, f64> = self
            .l_mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(h, &m)| (h as i64, m))
            .collect();
        LadderData { p, zeta: self.zeta, l_mass, l_tail_bound, zeta_tail_bound }
    }
}

/// Forward DP for the ladder quantities, run for exactly `horizon` sweeps
/// over walk values in `[floor, 0]`, recording first-ladder heights up to
/// `height_cap` (mass above the cap is added to `p` and to the bound).
pub fn ladder_dp(
    law: &impl StepLaw,
    horizon: usize,
    floor: i64,
    height_cap: i64,
) -> Result<LadderData> {
    let mean = law.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    if horizon == 0 || floor >= 0 || height_cap < 1 {
        return Err(Error::InvalidParameter(format!(
            "need horizon >= 1, floor < 0, height_cap >= 1; got {horizon}, {floor}, {height_cap}"
        )));
    }
    let s_b = lundberg_base(law);
    let mut dp = LadderDp::new(law, floor, height_cap, s_b);
    for _ in 0..horizon {
        dp.sweep();
    }
    Ok(dp.finish())
}

/// [`ladder_dp`] with self-chosen truncations: the floor is taken deep
/// enough that the certified escape bound stays below `tol`, and the horizon
/// doubles until the certified in-flight bounds do too.
pub fn ladder_dp_auto(law: &impl StepLaw, tol: f64) -> Result<LadderData> {
    let mean = law.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    let s_b = lundberg_base(law);
    let (wlo, whi) = law.window(1e-14);
    let floor = match s_b {
        // s_b^floor <= tol/16
        Some(s) => {
            let depth = ((16.0 / tol).ln() / s.ln()).ceil() as i64 + 8;
            (-depth).min(wlo - 8)
        }
        None => (wlo - 8).min(-400),
    };
    let cap = 512.max(whi + 1);
    let mut dp = LadderDp::new(law, floor, cap, s_b);
    let mut next_check = 64usize;
    const MAX_SWEEPS: usize = 1 << 20;
    loop {
        dp.sweep();
        if dp.sweeps >= next_check {
            let bound = dp.l_inflight_bound().max(dp.z_inflight_bound());
            if bound < tol / 4.0 {
                break;
            }
            if dp.sweeps >= MAX_SWEEPS {
                return Err(Error::NonConvergence(format!(
                    "ladder DP in-flight bound {bound:e} after {MAX_SWEEPS} sweeps (target {tol:e})"
                )));
            }
            next_check *= 2;
        }
    }
    let data = dp.finish();
    let worst = data.l_tail_bound.max(data.zeta_tail_bound);
    if worst > tol {
        return Err(Error::TruncationBound { bound: worst, tol });
    }
    Ok(data)
}

/// Incremental computation of `P(S_n = 0)` by iterated windowed
/// convolution. The window is sized from the certified exponential bound so
/// that paths leaving it and returning to zero carry negligible mass
/// (`defect` bounds the per-term error).
struct ReturnWalker {
    lo_w: i64,
    atom_lo: i64,
    atom_hi: i64,
    atoms: Vec<f64>,
    state: Vec<f64>,
    pub defect: f64,
}

impl ReturnWalker {
    fn new(law: &impl StepLaw) -> Self {
        let s_b = lundberg_base(law);
        let (wlo, whi) = law.window(1e-18);
        let depth = match s_b {
            Some(s) => ((42.0 / s.ln()).ceil() as i64).max(64),
            None => 400,
        };
        let lo_w = (-depth).min(wlo - 4);
        let hi_w = depth.max(whi + 4);
        let defect = match s_b {
            Some(s) => s.powi(lo_w as i32) + s.powi(-(hi_w as i32)),
            None => 1.0,
        };
        let atoms: Vec<f64> = (wlo..=whi).map(|j| law.atom(j)).collect();
        let mut state = vec![0.0; (hi_w - lo_w + 1) as usize];
        state[(-lo_w) as usize] = 1.0;
        Self { lo_w, atom_lo: wlo, atom_hi: whi, atoms, state, defect }
    }

    /// Advances one step and returns `P(S_n = 0)` for the new `n`.
    fn step(&mut self) -> f64 {
        let lo_w = self.lo_w;
        let hi_w = lo_w + self.state.len() as i64 - 1;
        let mut next = vec![0.0; self.state.len()];
        for (idx, &m) in self.state.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let v = lo_w + idx as i64;
            let j_lo = (lo_w - v).max(self.atom_lo);
            let j_hi = (hi_w - v).min(self.atom_hi);
            for j in j_lo..=j_hi {
                let a = self.atoms[(j - self.atom_lo) as usize];
                if a != 0.0 {
                    next[(v + j - lo_w) as usize] += m * a;
                }
            }
        }
        self.state = next;
        self.state[(-lo_w) as usize]
    }
}

/// `P(S_n = 0)` for `n = 1..=n_max`, plus the per-term window defect.
pub fn return_probabilities(law: &impl StepLaw, n_max: usize) -> Result<(Vec<f64>, f64)> {
    let mut walker = ReturnWalker::new(law);
    let out = (0..n_max).map(|_| walker.step()).collect();
    Ok((out, walker.defect))
}

/// The tie probability with a certified remainder, plus the DP arbiter's
/// values it was gated against.
#[derive(Debug, Clone, Copy)]
pub struct ZetaEstimate {
    pub zeta: f64,
    pub truncation_bound: f64,
    pub dp_zeta: f64,
    /// The DP's independent ladder probability, for downstream cross-checks.
    pub dp_p: f64,
    pub dp_p_bound: f64,
}

/// Tolerance for the mandatory agreement between the series route and the
/// DP route for zeta.
pub const ZETA_GATE_TOL: f64 = 1e-6;

/// Series route for zeta: `1 - zeta = exp(-sum_n P(S_n = 0)/n)`, summed to
/// at most `n_max` terms with a Chernoff-certified remainder, then gated
/// against [`ladder_dp_auto`] (the arbiter) within [`ZETA_GATE_TOL`].
pub fn zeta_series(law: &impl StepLaw, n_max: usize) -> Result<ZetaEstimate> {
    let mean = law.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("zeta_series needs n_max >= 1".into()));
    }

    let s_b = lundberg_base(law);
    let f_min = pgf_grid_min(law, s_b.unwrap_or(1.0));

    // remainder of sum_{n>N} P(S_n=0)/n given P(S_n=0) <= f_min^n
    let remainder = |n: usize| -> f64 {
        match f_min {
            Some(f) if f < 1.0 => f.powi(n as i32 + 1) / ((n as f64 + 1.0) * (1.0 - f)),
            _ => 1.0,
        }
    };

    let mut walker = ReturnWalker::new(law);
    let mut acc = 0.0;
    let mut used = 0;
    for n in 1..=n_max {
        acc += walker.step() / n as f64;
        used = n;
        if remainder(n) < 1e-12 {
            break;
        }
    }
    let tail = remainder(used) + walker.defect * (1.0 + (used as f64).ln());
    if tail > 1e-8 {
        return Err(Error::NonConvergence(format!(
            "zeta series remainder {tail:e} after {used} terms"
        )));
    }
    let zeta = -(-acc).exp_m1();

    let dp = ladder_dp_auto(law, 1e-7)?;
    let gap = (zeta - dp.zeta).abs();
    if gap > ZETA_GATE_TOL {
        return Err(Error::OracleDisagreement(format!(
            "zeta series {zeta} vs ladder DP {} (gap {gap:e} > {ZETA_GATE_TOL:e})",
            dp.zeta
        )));
    }
    Ok(ZetaEstimate {
        zeta,
        truncation_bound: tail,
        dp_zeta: dp.zeta,
        dp_p: dp.p,
        dp_p_bound: dp.l_tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{IntegerPMF, StepDistribution};
    use std::collections::BTreeMap;

    fn gr1() -> StepDistribution {
        StepDistribution::from_right_tail(0.4, 0.5, &BTreeMap::from([(-1, 0.6)])).unwrap()
    }

    fn pm1_walk() -> IntegerPMF {
        IntegerPMF::from_atoms([(-1, 0.6), (1, 0.4)]).unwrap()
    }

    #[test]
    fn decompose_hand_traces() {
        let d = decompose(&Path::from_steps(vec![1, -1, 2]));
        assert_eq!(d.strict_indices, vec![1, 3]);
        assert_eq!(d.strict_heights, vec![1, 2]);

        let d = decompose(&Path::from_steps(vec![-1, 1]));
        assert!(d.strict_indices.is_empty());
        assert_eq!(d.weak_indices.first(), Some(&2));
        assert_eq!(d.weak_heights.first(), Some(&0));

        let d = decompose(&Path::from_steps(vec![-1, -2, 5]));
        assert_eq!(d.strict_indices, vec![3]);
        assert_eq!(d.strict_heights, vec![2]);
        assert_eq!(d.weak_indices.first(), Some(&3));
    }

    #[test]
    fn lundberg_base_certifies_gr1() {
        let s_b = lundberg_base(&gr1()).unwrap();
        assert!(s_b > 1.05 && s_b < 1.2, "s_b = {s_b}");
        // the bound must be certified, i.e. the pgf there is <= 1
        assert!(gr1().pgf(s_b).unwrap() <= 1.0);
    }

    #[test]
    fn first_sweep_l_mass_is_positive_atoms() {
        let step = gr1();
        let data = ladder_dp(&step, 1, -50, 64).unwrap();
        for h in 1..=10i64 {
            let expect = 0.4 * 0.5f64.powi(h as i32) * 0.5;
            assert!((data.l_mass[&h] - expect).abs() < 1e-15, "h={h}");
        }
    }

    #[test]
    fn gr1_ladder_probability_matches_gamblers_ruin_grid() {
        // fixed explicit truncations; the bound must cover the residual
        let data = ladder_dp(&gr1(), 400, -200, 512).unwrap();
        assert!(
            (data.p - 2.0 / 3.0).abs() <= data.l_tail_bound.max(1e-8),
            "p = {}, bound = {:e}",
            data.p,
            data.l_tail_bound
        );
        let auto = ladder_dp_auto(&gr1(), 1e-8).unwrap();
        assert!((auto.p - 2.0 / 3.0).abs() < 1e-8, "p = {}", auto.p);
    }

    #[test]
    fn accumulated_mass_is_monotone_in_horizon() {
        let step = gr1();
        let mut last = 0.0;
        for horizon in [25, 50, 100, 200] {
            let data = ladder_dp(&step, horizon, -120, 256).unwrap();
            assert!(data.p >= last - 1e-15);
            assert!(data.p <= 1.0);
            last = data.p;
        }
    }

    #[test]
    fn simple_walk_ladder_and_tie_probabilities() {
        // gambler's ruin: p = P(ever reach +1) = 0.4/0.6 = 2/3; the tie
        // probability is P(step down, then first return to 0) = 0.4
        let walk = pm1_walk();
        let data = ladder_dp_auto(&walk, 1e-8).unwrap();
        assert!((data.p - 2.0 / 3.0).abs() < 1e-8, "p = {}", data.p);
        assert!((data.zeta - 0.4).abs() < 1e-8, "zeta = {}", data.zeta);
    }

    #[test]
    fn simple_walk_enumeration_to_depth_sixty() {
        // exact enumeration (value-aggregated) to depth 60: the partial tie
        // mass approaches 0.4 from below within its certified remainder
        let walk = pm1_walk();
        let data = ladder_dp(&walk, 60, -120, 64).unwrap();
        assert!(data.zeta <= 0.4 + 1e-12);
        assert!(
            0.4 - data.zeta <= data.zeta_tail_bound,
            "zeta_60 = {}, bound = {:e}",
            data.zeta,
            data.zeta_tail_bound
        );
        // depth 60 already separates 0.4 from 0 decisively
        assert!(data.zeta > 0.39);
    }

    #[test]
    fn two_step_return_probability() {
        let (probs, _) = return_probabilities(&pm1_walk(), 2).unwrap();
        assert_eq!(probs[0], 0.0);
        assert!((probs[1] - 0.48).abs() < 1e-15);
    }

    #[test]
    fn zeta_series_agrees_with_dp_on_simple_walk() {
        let est = zeta_series(&pm1_walk(), 4000).unwrap();
        assert!((est.zeta - 0.4).abs() < 1e-7, "zeta = {}", est.zeta);
        assert!((est.zeta - est.dp_zeta).abs() < ZETA_GATE_TOL);
    }

    #[test]
    fn zeta_series_rejects_zero_terms() {
        assert!(matches!(
            zeta_series(&pm1_walk(), 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn nonnegative_drift_rejected() {
        let up = IntegerPMF::from_atoms([(-1, 0.4), (1, 0.6)]).unwrap();
        assert!(matches!(
            ladder_dp(&up, 10, -10, 16),
            Err(Error::NonNegativeDrift { .. })
        ));
    }
}
