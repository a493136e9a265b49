//! Two coupled single-server queues with exponential clocks, reduced to a
//! left-tail random walk.
//!
//! Stage 1 is M/M/1 (inter-arrival mean `alpha`, service mean `beta`).
//! Stage 2 serves only while server 1 is idle (service mean `gamma`),
//! last come first served. Between consecutive idle periods the stage-2
//! backlog evolves as `Z_{k+1} = max(0, Z_k + N_{k+1} - M_{k+1})` where `N`
//! counts stage-1 busy-period completions and `M` is geometric with ratio
//! `r = alpha/(alpha+gamma)`. The induced step `X = N - M` has an exactly
//! geometric left tail with `xi = U(r)`, which [`build_step`] verifies
//! numerically before trusting it, and the stationary backlog law is the
//! walk's supremum law.
//!
//! Rate convention: "exponential with parameter `1/alpha`" is read as rate
//! `1/alpha`, i.e. mean `alpha`; this is what makes the stage-1 load
//! `a = beta/alpha` and `E[M] = alpha/gamma`.

use serde::Serialize;

use crate::dist::{IntegerPMF, PowerSeries, StepDistribution, StepLaw};
use crate::error::{Error, Result};
use crate::kp_left::{self, LeftSolution};

/// Queue rates and the derived load/ratio quantities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TandemParams {
    /// Mean inter-arrival time at stage 1.
    pub alpha: f64,
    /// Mean stage-1 service time.
    pub beta: f64,
    /// Mean stage-2 service time.
    pub gamma: f64,
    /// Stage-1 load `beta/alpha` (must be < 1).
    pub a: f64,
    /// `alpha/(alpha+gamma)`: chance a stage-2 service beats the next arrival.
    pub r: f64,
    /// Load of the induced abstract queue, `gamma/(alpha-beta)`.
    pub b: f64,
}

impl TandemParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rates must be positive: alpha={alpha}, beta={beta}, gamma={gamma}"
            )));
        }
        let a = beta / alpha;
        if a >= 1.0 {
            return Err(Error::LoadViolation(format!(
                "stage-1 load a = beta/alpha = {a} >= 1; busy periods are defective"
            )));
        }
        let r = alpha / (alpha + gamma);
        let b = gamma / (alpha - beta);
        Ok(Self { alpha, beta, gamma, a, r, b })
    }
}

/// Everything [`analyze`] produces.
#[derive(Debug, Clone)]
pub struct TandemReport {
    pub params: TandemParams,
    /// `U(r)`, the left-tail scale of the induced step law.
    pub xi: f64,
    pub step: StepDistribution,
    pub solution: LeftSolution,
}

/// Certified bound on the busy-period pmf's decay:
/// `P(N = k+1) <= q P(N = k)` with `q = 4a/(1+a)^2` (the ratio increases
/// toward `q` monotonically).
pub fn busy_period_decay(a: f64) -> f64 {
    4.0 * a / ((1.0 + a) * (1.0 + a))
}

/// PMF of the number of stage-1 customers served in one busy period, on
/// `1..=k_max`, with the truncated mass in `right_tail_mass`.
///
/// `P(N=1) = 1/(1+a)` and `P(N=k+1)/P(N=k) = 2(2k-1)/(k+1) * a/(1+a)^2`,
/// an exact rearrangement of the Catalan-style closed form that avoids
/// binomial overflow.
pub fn busy_period_pmf(a: f64, k_max: usize) -> Result<IntegerPMF> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("load a must be positive, got {a}")));
    }
    if a >= 1.0 {
        return Err(Error::LoadViolation(format!(
            "load a = {a} >= 1: the busy-period count is defective"
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let base = a / ((1.0 + a) * (1.0 + a));
    let mut mass = Vec::with_capacity(k_max);
    let mut pk = 1.0 / (1.0 + a);
    mass.push(pk);
    for k in 1..k_max {
        pk *= 2.0 * (2.0 * k as f64 - 1.0) / (k as f64 + 1.0) * base;
        mass.push(pk);
    }
    let tail = (1.0 - mass.iter().sum::<f64>()).max(0.0);
    IntegerPMF::new(1, mass, 0.0, tail)
}

/// The busy-period generating function
/// `U(s) = (1+a)/(2a) (1 - sqrt(1 - 4as/(1+a)^2))`,
/// convergent for `|s| < (1+a)^2 / 4a`.
pub fn u_eval(a: f64, s: f64) -> Result<f64> {
    let radius = (1.0 + a) * (1.0 + a) / (4.0 * a);
    if s.abs() >= radius {
        return Err(Error::OutOfDomain { value: s, lo: -radius, hi: radius });
    }
    Ok((1.0 + a) / (2.0 * a) * (1.0 - (1.0 - s / radius).sqrt()))
}

/// The geometric pgf `V(s) = (1-r)/(1-rs)`, convergent for `|s| < 1/r`.
pub fn v_eval(r: f64, s: f64) -> Result<f64> {
    if s.abs() >= 1.0 / r {
        return Err(Error::OutOfDomain { value: s, lo: -1.0 / r, hi: 1.0 / r });
    }
    Ok((1.0 - r) / (1.0 - r * s))
}

/// Taylor coefficients of `U(s)` to order `k`, by series square root.
pub fn u_series(a: f64, k: usize) -> PowerSeries {
    let mut inner = vec![0.0; k + 1];
    inner[0] = 1.0;
    inner[1] = -busy_period_decay(a);
    let root = PowerSeries::from_coeffs(inner).sqrt().expect("constant term is 1");
    let scale = (1.0 + a) / (2.0 * a);
    let coeffs: Vec<f64> = (0..=k)
        .map(|i| if i == 0 { scale * (1.0 - root.coeff(0)) } else { -scale * root.coeff(i) })
        .collect();
    PowerSeries::from_coeffs(coeffs)
}

/// Builds the induced step law `X = N - M` by convolving the truncated
/// busy-period law with the negated geometric, then checks the claimed
/// left-tail identity `P(X <= x) = U(r) r^(-x)` for `x = -10..=0` before
/// returning a [`StepDistribution`] that stores that tail symbolically.
///
/// The identity is checked, never assumed: failure is reported as an
/// oracle disagreement.
pub fn build_step(params: &TandemParams, tol: f64) -> Result<StepDistribution> {
    if params.b >= 1.0 {
        return Err(Error::LoadViolation(format!(
            "load b = gamma/(alpha-beta) = {} >= 1; need beta + gamma < alpha",
            params.b
        )));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidParameter(format!("tol must lie in (0, 1e-6], got {tol}")));
    }
    let (a, r) = (params.a, params.r);
    let q = busy_period_decay(a);

    // truncate N where the certified geometric tail bound drops below tol/10
    let mut k_n = 16;
    let n_pmf = loop {
        let pmf = busy_period_pmf(a, k_n)?;
        let bound = pmf.atom(k_n as i64) * q / (1.0 - q);
        if bound < tol / 10.0 {
            break pmf;
        }
        k_n *= 2;
        if k_n > 1 << 22 {
            return Err(Error::NonConvergence("busy-period truncation grew unbounded".into()));
        }
    };
    let k_n = n_pmf.hi();

    // truncate M where P(M > K) = r^(K+1) < tol/10
    let k_m = (((tol / 10.0).ln() / r.ln()).ceil() as i64).max(1);
    let m_mass: Vec<f64> = (0..=k_m).map(|i| (1.0 - r) * r.powi((k_m - i) as i32)).collect();
    let m_neg = IntegerPMF::new(-k_m, m_mass, r.powi(k_m as i32 + 1), 0.0)?;

    let x_pmf = n_pmf.convolve(&m_neg);
    let xi = u_eval(a, r)?;

    // the materialized law must actually have the claimed geometric tail
    for x in -10..=0i64 {
        let claimed = xi * r.powi((-x) as i32);
        let got = StepLaw::cdf(&x_pmf, x);
        if (got - claimed).abs() > tol {
            return Err(Error::OracleDisagreement(format!(
                "left-tail identity failed at x={x}: materialized cdf {got} vs U(r) r^(-x) = \
                 {claimed} (|diff| > {tol:e})"
            )));
        }
    }

    let pos_mass: Vec<f64> = (1..=k_n).map(|x| x_pmf.atom(x)).collect();
    let covered: f64 = pos_mass.iter().sum();
    let rtm = (1.0 - xi - covered).max(0.0);
    let pos = IntegerPMF::new(1, pos_mass, xi, rtm)?;
    let scale = n_pmf.atom(k_n) * q / (1.0 - q) * (1.0 + 1e-9);
    Ok(StepDistribution::from_left_tail(xi, r, pos)?.with_finite_tail_hint(q, scale))
}

/// Full pipeline: build the step law, solve it, and additionally expand the
/// queue-specific simplification
/// `M(s) = (1 - zeta - (1-r)/(1-a)) / (1 - zeta - (1-r) s (1-U(s))/(1-s))`
/// whose coefficients must agree with the generic route.
pub fn analyze(params: &TandemParams, k: usize) -> Result<TandemReport> {
    let step = build_step(params, 1e-12)?;
    let solution = kp_left::solve(&step, k)?;

    let n_pmf = busy_period_pmf(params.a, k.max(step.finite_part().hi() as usize) + 2)?;
    let (zeta, r, a) = (solution.zeta, params.r, params.a);
    let mut denom = vec![0.0; k + 1];
    denom[0] = 1.0 - zeta;
    for x in 1..=k {
        // coefficient of s^x in -(1-r) s (1-U(s))/(1-s) is -(1-r) P(N >= x)
        denom[x] = -(1.0 - r) * StepLaw::survival_gt(&n_pmf, x as i64 - 1);
    }
    let numerator = 1.0 - zeta - (1.0 - r) / (1.0 - a);
    let m_alt = PowerSeries::from_coeffs(denom).reciprocal()?.scale(numerator);

    let mut worst = 0.0f64;
    for x in 0..=k {
        worst = worst.max((m_alt.coeff(x) - solution.mgf.coeff(x)).abs());
    }
    if worst > kp_left::ROUTE_TOL {
        return Err(Error::OracleDisagreement(format!(
            "queue-form M(s) disagrees with the generic route: max gap {worst:e}"
        )));
    }

    Ok(TandemReport { params: *params, xi: step.xi(), step, solution })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA: f64 = 1.0;
    const BETA: f64 = 0.3;
    const GAMMA: f64 = 0.5;

    fn params() -> TandemParams {
        TandemParams::new(ALPHA, BETA, GAMMA).unwrap()
    }

    /// Direct evaluation of the closed form
    /// `P(N=k) = C(2k-1,k)/(2k-1) * a^(k-1)/(1+a)^(2k-1)` in log space.
    fn busy_closed_form(a: f64, k: u32) -> f64 {
        let ln_fact = |n: u32| -> f64 { (2..=n).map(|i| (i as f64).ln()).sum() };
        let ln_binom = ln_fact(2 * k - 1) - ln_fact(k) - ln_fact(k - 1);
        let ln_p = ln_binom - ((2 * k - 1) as f64).ln() + (k as f64 - 1.0) * a.ln()
            - (2.0 * k as f64 - 1.0) * (1.0 + a).ln();
        ln_p.exp()
    }

    #[test]
    fn derived_quantities() {
        let p = params();
        assert!((p.a - 0.3).abs() < 1e-15);
        assert!((p.r - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.b - 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn busy_period_atoms() {
        let pmf = busy_period_pmf(0.5, 8).unwrap();
        assert!((pmf.atom(1) - 2.0 / 3.0).abs() < 1e-15);
        let pmf = busy_period_pmf(0.3, 8).unwrap();
        assert!((pmf.atom(2) - 0.3 / 1.3f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn busy_period_recurrence_matches_closed_form() {
        for a in [0.1, 0.3, 0.5, 0.7] {
            let pmf = busy_period_pmf(a, 64).unwrap();
            for k in [1u32, 2, 5, 17, 33, 50] {
                let direct = busy_closed_form(a, k);
                let rel = (pmf.atom(k as i64) - direct).abs() / direct;
                assert!(rel < 1e-10, "a={a} k={k}: rel {rel:e}");
            }
        }
    }

    #[test]
    fn busy_period_normalizes_with_mean_one_over_one_minus_a() {
        let a = 0.3;
        let pmf = busy_period_pmf(a, 400).unwrap();
        let total = pmf.materialized_total() + pmf.right_tail_mass();
        assert!((total - 1.0).abs() < 1e-14);
        let mean = pmf.materialized_mean();
        assert!((mean - 1.0 / (1.0 - a)).abs() < 1e-10, "mean {mean}");
    }

    #[test]
    fn u_series_matches_busy_period_pmf() {
        for a in [0.1, 0.3, 0.5, 0.7] {
            let series = u_series(a, 30);
            let pmf = busy_period_pmf(a, 30).unwrap();
            assert!(series.coeff(0).abs() < 1e-14);
            for k in 1..=30 {
                assert!(
                    (series.coeff(k) - pmf.atom(k as i64)).abs() < 1e-12,
                    "a={a} k={k}"
                );
            }
        }
    }

    #[test]
    fn u_and_v_special_values() {
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!((u_eval(a, 1.0).unwrap() - 1.0).abs() < 1e-12, "a={a}");
        }
        // convergence radius for a = 0.3 is (1.3)^2/1.2 = 1.40833...
        assert!(u_eval(0.3, 1.40).is_ok());
        assert!(matches!(u_eval(0.3, 1.41), Err(Error::OutOfDomain { .. })));
        assert!((v_eval(2.0 / 3.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn xi_is_u_at_r_and_matches_series_sum() {
        let p = params();
        let xi = u_eval(p.a, p.r).unwrap();
        assert!((xi - 0.5943).abs() < 1e-4);
        let pmf = busy_period_pmf(p.a, 200).unwrap();
        let series: f64 = pmf.iter().map(|(k, m)| m * p.r.powi(k as i32)).sum();
        assert!((xi - series).abs() < 1e-12);
    }

    #[test]
    fn build_step_mean_matches_rate_formula() {
        let p = params();
        let step = build_step(&p, 1e-12).unwrap();
        let expect = 1.0 / (1.0 - p.a) - p.r / (1.0 - p.r);
        assert!((step.mean() - expect).abs() < 1e-10, "{} vs {expect}", step.mean());
        assert!((expect + 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn build_step_rejects_overload() {
        let p = TandemParams::new(1.0, 0.5, 0.6).unwrap();
        assert!((p.b - 1.2).abs() < 1e-12);
        let err = build_step(&p, 1e-12).unwrap_err();
        assert!(err.to_string().contains("load"), "{err}");
        assert!(matches!(err, Error::LoadViolation(_)));
    }

    #[test]
    fn f_plus_simplification_holds() {
        // sum_{x>=1} P(X=x) s^x = V(1/s) [U(s) - U(r)]
        let p = params();
        let step = build_step(&p, 1e-12).unwrap();
        for s in [0.7, 0.8, 0.9, 0.99] {
            let direct: f64 = step
                .finite_part()
                .iter()
                .map(|(x, m)| m * f64::powi(s, x as i32))
                .sum();
            let closed =
                v_eval(p.r, 1.0 / s).unwrap() * (u_eval(p.a, s).unwrap() - u_eval(p.a, p.r).unwrap());
            assert!((direct - closed).abs() < 1e-10, "s={s}: {direct} vs {closed}");
        }
    }

    #[test]
    fn load_equivalences_on_rate_grid() {
        // b < 1  <=>  E[X] < 0  <=>  1/(1-a) < r/(1-r)
        // (grid avoids b = 1 exactly, where float rounding breaks the tie)
        for &beta in &[0.2, 0.3, 0.4, 0.55, 0.7] {
            for &gamma in &[0.2, 0.35, 0.5, 0.75] {
                let Ok(p) = TandemParams::new(1.0, beta, gamma) else { continue };
                let mean = 1.0 / (1.0 - p.a) - p.r / (1.0 - p.r);
                assert_eq!(p.b < 1.0, mean < 0.0, "beta={beta} gamma={gamma}");
                assert_eq!(p.b < 1.0, 1.0 / (1.0 - p.a) < p.r / (1.0 - p.r));
                if p.b < 1.0 {
                    let step = build_step(&p, 1e-10).unwrap();
                    assert!((step.mean() - mean).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn analyze_pipeline_is_consistent() {
        let report = analyze(&params(), 64).unwrap();
        let sol = &report.solution;
        assert!((report.xi - u_eval(0.3, 2.0 / 3.0).unwrap()).abs() < 1e-14);
        // M(0) = P(sup = 0) = 1 - p
        assert!((sol.mgf.coeff(0) - (1.0 - sol.p)).abs() < 1e-10);
        // (1-zeta) p = (1-r)/(1-a)
        let lhs = (1.0 - sol.zeta) * sol.p;
        let rhs = (1.0 - 2.0 / 3.0) / (1.0 - 0.3);
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}
