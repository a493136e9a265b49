//! Monte Carlo sampling of the all-time maximum of a negative-drift walk.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

use super::{open01, SimReport};
use crate::dist::StepLaw;
use crate::error::{Error, Result};

/// Samples `n_paths` walks of `n_steps` steps each and histograms the path
/// maxima. Every path draws from its own counter-based substream of `seed`,
/// so the result is reproducible and thread-count independent.
///
/// `n_steps` doubles (rerunning the same substreams) until fewer than one
/// path in a thousand still improved its maximum during the second half.
pub fn mc_sup(
    law: &(impl StepLaw + Sync),
    n_paths: u64,
    n_steps: u64,
    seed: u64,
) -> Result<SimReport> {
    let mean = law.mean();
    if mean >= 0.0 {
        return Err(Error::NonNegativeDrift { mean });
    }
    if n_paths == 0 || n_steps == 0 {
        return Err(Error::InvalidParameter("need n_paths >= 1 and n_steps >= 1".into()));
    }

    let mut steps = n_steps;
    for _ in 0..12 {
        let (histogram, grew) = run_batch(law, n_paths, steps, seed);
        if (grew as f64) < 1e-3 * n_paths as f64 {
            let mut report = SimReport::empty(seed);
            report.histogram = histogram;
            report.n_samples = n_paths;
            return Ok(report);
        }
        steps *= 2;
    }
    Err(Error::NonConvergence(format!(
        "path maxima still growing after extending to {steps} steps"
    )))
}

fn run_batch(
    law: &(impl StepLaw + Sync),
    n_paths: u64,
    n_steps: u64,
    seed: u64,
) -> (BTreeMap<i64, u64>, u64) {
    let half = n_steps / 2;
    (0..n_paths)
        .into_par_iter()
        .fold(
            || (BTreeMap::new(), 0u64),
            |(mut hist, mut grew), path| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(path);
                let mut s = 0i64;
                let mut max = 0i64;
                let mut max_at_half = 0i64;
                for step in 1..=n_steps {
                    s += law.quantile(open01(&mut rng));
                    if s > max {
                        max = s;
                    }
                    if step == half {
                        max_at_half = max;
                    }
                }
                if max > max_at_half {
                    grew += 1;
                }
                *hist.entry(max).or_insert(0) += 1;
                (hist, grew)
            },
        )
        .reduce(
            || (BTreeMap::new(), 0u64),
            |(mut a, ga), (b, gb)| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                (a, ga + gb)
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{IntegerPMF, StepDistribution};
    use std::collections::BTreeMap as Map;

    #[test]
    fn gr1_ladder_frequency_within_four_sigma() {
        let step =
            StepDistribution::from_right_tail(0.4, 0.5, &Map::from([(-1, 0.6)])).unwrap();
        let n = 100_000u64;
        let report = mc_sup(&step, n, 256, 42).unwrap();
        let hit: u64 = report.histogram.iter().filter(|(&x, _)| x > 0).map(|(_, &c)| c).sum();
        let p = 2.0 / 3.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let diff = (hit as f64 / n as f64 - p).abs();
        assert!(diff < 4.0 * sigma, "diff {diff} vs 4 sigma {}", 4.0 * sigma);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let step =
            StepDistribution::from_right_tail(0.4, 0.5, &Map::from([(-1, 0.6)])).unwrap();
        let a = mc_sup(&step, 2_000, 128, 7).unwrap();
        let b = mc_sup(&step, 2_000, 128, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_runs_extend_until_maxima_settle() {
        // an absurdly short n_steps must auto-double to a faithful histogram
        let step =
            StepDistribution::from_right_tail(0.4, 0.5, &Map::from([(-1, 0.6)])).unwrap();
        let n = 40_000u64;
        let report = mc_sup(&step, n, 4, 11).unwrap();
        let hit: u64 = report.histogram.iter().filter(|(&x, _)| x > 0).map(|(_, &c)| c).sum();
        let p = 2.0 / 3.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        // 4 sigma plus the 1e-3 resolution the doubling rule stops at
        assert!(
            (hit as f64 / n as f64 - p).abs() < 4.0 * sigma + 1e-3,
            "freq {}",
            hit as f64 / n as f64
        );
    }

    #[test]
    fn pure_down_walk_never_rises() {
        let law = IntegerPMF::from_atoms([(-1, 1.0)]).unwrap();
        let report = mc_sup(&law, 500, 64, 3).unwrap();
        assert_eq!(report.histogram.len(), 1);
        assert_eq!(report.histogram[&0], 500);
    }
}
