//! Enumeration-style oracles shared by the integration tests.
//!
//! These are depth-limited forward DPs straight from the event definitions
//! (exact aggregation over all paths of bounded length), independent of the
//! closed forms under test. Each returns a certified bound on what paths
//! longer than the depth could still contribute, using the exponential
//! supermartingale weight `s_b^v` from [`geotail::ladder::lundberg_base`].

use geotail::dist::StepLaw;
use geotail::ladder::lundberg_base;

pub struct DpTables {
    pub atom_lo: i64,
    pub atoms: Vec<f64>,
    pub weight: Vec<f64>,
    pub esc_weighted: Vec<f64>,
}

pub fn dp_tables(law: &impl StepLaw, floor: i64, s_b: Option<f64>) -> DpTables {
    let (alo, ahi) = law.window(1e-21);
    let atom_lo = alo.min(floor - 1);
    let atoms: Vec<f64> = (atom_lo..=ahi.max(1)).map(|j| law.atom(j)).collect();
    let w = |u: i64| s_b.map_or(1.0, |s| s.powi(u.max(-60_000) as i32)).min(1.0);
    let n = (-floor + 1) as usize;
    let mut weight = vec![0.0; n];
    let mut esc_weighted = vec![0.0; n];
    for idx in 0..n {
        let v = floor + idx as i64;
        weight[idx] = w(v);
        let mut acc = law.cdf(atom_lo + v - 1);
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
    DpTables { atom_lo, atoms, weight, esc_weighted }
}

/// Law of the first weak ladder height restricted to entry times `<= depth`:
/// `entry[u] = P(S_1 < 0, ..., S_{n-1} < 0, S_n = u for some n <= depth)`.
pub struct WeakEntry {
    pub entry: Vec<f64>,
    pub over_cap: f64,
    /// Certified bound on first entries happening after `depth`.
    pub bound: f64,
}

pub fn weak_entry_dp(law: &impl StepLaw, depth: usize, floor: i64, cap: i64) -> WeakEntry {
    let s_b = lundberg_base(law);
    let t = dp_tables(law, floor, s_b);
    let n = (-floor + 1) as usize;
    let atom_hi = t.atom_lo + t.atoms.len() as i64 - 1;
    let mut state = vec![0.0; n];
    state[n - 1] = 1.0;
    let mut entry = vec![0.0; cap as usize + 1];
    let mut over_cap = 0.0;
    let mut esc = 0.0;
    for _ in 0..depth {
        let mut next = vec![0.0; n];
        for (idx, &m) in state.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let v = floor + idx as i64;
            esc += m * t.esc_weighted[idx];
            over_cap += m * law.survival_gt(cap - v);
            let j_lo = (floor - v).max(t.atom_lo);
            let j_hi = (cap - v).min(atom_hi);
            for j in j_lo..=j_hi {
                let a = t.atoms[(j - t.atom_lo) as usize];
                if a == 0.0 {
                    continue;
                }
                let u = v + j;
                if u < 0 {
                    next[(u - floor) as usize] += m * a;
                } else {
                    entry[u as usize] += m * a;
                }
            }
        }
        state = next;
    }
    let inflight: f64 = state.iter().zip(&t.weight).map(|(m, w)| m * w).sum();
    WeakEntry { entry, over_cap, bound: inflight + esc }
}

/// `P(a tie precedes the first strict ladder, and the first strict ladder
/// height is h)` restricted to ladder times `<= depth`.
pub struct TieThenStrict {
    pub heights: Vec<f64>,
    pub over_cap: f64,
    pub bound: f64,
}

pub fn tie_then_strict_dp(law: &impl StepLaw, depth: usize, floor: i64, cap: i64) -> TieThenStrict {
    let s_b = lundberg_base(law);
    let t = dp_tables(law, floor, s_b);
    let n = (-floor + 1) as usize;
    let atom_hi = t.atom_lo + t.atoms.len() as i64 - 1;
    // phase A: strictly negative so far (no weak ladder event yet);
    // phase B: a tie at zero happened, no strict ladder yet
    let mut a_state = vec![0.0; n];
    a_state[n - 1] = 1.0;
    let mut b_state = vec![0.0; n];
    let mut heights = vec![0.0; cap as usize + 1];
    let mut over_cap = 0.0;
    let mut esc = 0.0;
    for _ in 0..depth {
        let mut next_a = vec![0.0; n];
        let mut next_b = vec![0.0; n];
        for (idx, &m) in a_state.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let v = floor + idx as i64;
            esc += m * t.esc_weighted[idx];
            let j_lo = (floor - v).max(t.atom_lo);
            let j_hi = (-v).min(atom_hi); // u > 0 means the strict ladder came first
            for j in j_lo..=j_hi {
                let a = t.atoms[(j - t.atom_lo) as usize];
                if a == 0.0 {
                    continue;
                }
                let u = v + j;
                if u < 0 {
                    next_a[(u - floor) as usize] += m * a;
                } else {
                    next_b[n - 1] += m * a; // tie: restart at zero in phase B
                }
            }
        }
        for (idx, &m) in b_state.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let v = floor + idx as i64;
            esc += m * t.esc_weighted[idx];
            over_cap += m * law.survival_gt(cap - v);
            let j_lo = (floor - v).max(t.atom_lo);
            let j_hi = (cap - v).min(atom_hi);
            for j in j_lo..=j_hi {
                let a = t.atoms[(j - t.atom_lo) as usize];
                if a == 0.0 {
                    continue;
                }
                let u = v + j;
                if u <= 0 {
                    next_b[(u - floor) as usize] += m * a;
                } else {
                    heights[u as usize] += m * a;
                }
            }
        }
        a_state = next_a;
        b_state = next_b;
    }
    let inflight: f64 = a_state
        .iter()
        .chain(b_state.iter())
        .zip(t.weight.iter().chain(t.weight.iter()))
        .map(|(m, w)| m * w)
        .sum();
    TieThenStrict { heights, over_cap, bound: inflight + esc }
}

/// Lattice size giving the Lindley oracle certified headroom beyond `tol`.
#[allow(dead_code)] // each test binary uses its own subset of this module
pub fn oracle_x_max(law: &impl StepLaw, tol: f64) -> usize {
    lundberg_base(law)
        .map(|s| ((10.0 / tol).ln() / s.ln()).ceil() as usize + 8)
        .unwrap_or(600)
}
