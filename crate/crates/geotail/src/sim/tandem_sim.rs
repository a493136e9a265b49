//! Event-driven simulation of the two-stage queue: exponential clocks,
//! stage-2 service only while server 1 idles, last come first served.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

use super::{open01, SimReport};
use crate::tandem::TandemParams;

/// Fixed replica count: the workload splits into this many independent
/// substreams regardless of thread count, so reports are bitwise
/// reproducible under any parallelism.
pub const REPLICAS: u64 = 16;

/// Busy cycles discarded per replica before recording.
pub const WARMUP_CYCLES: u64 = 1000;

/// Per-cycle records of one replica: stage-1 busy-period size `N`, stage-2
/// completion count `M`, and the backlog `Z` when shrinkage ends.
#[derive(Debug, Clone, Default)]
pub struct TandemTrace {
    pub n: Vec<i64>,
    pub m: Vec<i64>,
    pub z: Vec<i64>,
}

/// Simulates one replica: `warmup + cycles` busy cycles on substream
/// `stream` of `seed`, recording the last `cycles` of them.
///
/// `M` counts completed stage-2 service intervals up to the capping
/// arrival, including intervals that elapse while the stage-2 queue is
/// already empty (the service clock is memoryless, so this realizes the
/// model's independent geometric sequence); the backlog `Z` itself stops at
/// zero.
pub fn replica_trace(
    params: &TandemParams,
    cycles: u64,
    warmup: u64,
    seed: u64,
    stream: u64,
) -> TandemTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (alpha, beta, gamma) = (params.alpha, params.beta, params.gamma);
    let mut exp = move |mean: f64| -mean * open01(&mut rng).ln();

    let mut trace = TandemTrace::default();
    let mut z: i64 = 0;
    let mut next_arrival = 0.0f64; // the first customer arrives at t = 0
    for cycle in 0..(warmup + cycles) {
        // arrival opens a stage-1 busy period
        let mut t = next_arrival;
        next_arrival = t + exp(alpha);
        let mut queue1: u64 = 1;
        let mut n_served: i64 = 0;
        let mut s1_done = t + exp(beta);
        while queue1 > 0 {
            // ties (probability zero under exponential clocks) favor the arrival
            if next_arrival <= s1_done {
                t = next_arrival;
                queue1 += 1;
                next_arrival = t + exp(alpha);
            } else {
                t = s1_done;
                queue1 -= 1;
                n_served += 1;
                z += 1;
                if queue1 > 0 {
                    s1_done = t + exp(beta);
                }
            }
        }
        // server 1 idle: stage 2 works until the next arrival caps it
        let mut m_count: i64 = 0;
        let mut s2_done = t + exp(gamma);
        while s2_done < next_arrival {
            t = s2_done;
            m_count += 1;
            if z > 0 {
                z -= 1;
            }
            s2_done = t + exp(gamma);
        }
        if cycle >= warmup {
            trace.n.push(n_served);
            trace.m.push(m_count);
            trace.z.push(z);
        }
    }
    trace
}

/// The per-replica traces behind [`simulate_tandem`]; independent replicas
/// double as batches for batch-means error estimation (per-cycle records of
/// the backlog chain are autocorrelated, so within-replica multinomial
/// standard errors would be too tight).
pub fn simulate_tandem_replicas(
    params: &TandemParams,
    n_cycles: u64,
    seed: u64,
) -> Vec<TandemTrace> {
    let per_replica: Vec<u64> = (0..REPLICAS)
        .map(|i| n_cycles / REPLICAS + u64::from(i < n_cycles % REPLICAS))
        .collect();
    (0..REPLICAS)
        .into_par_iter()
        .map(|i| replica_trace(params, per_replica[i as usize], WARMUP_CYCLES, seed, i))
        .collect()
}

/// Runs [`REPLICAS`] independent replicas in parallel (each with its own
/// warm-up) and merges their per-cycle histograms.
pub fn simulate_tandem(params: &TandemParams, n_cycles: u64, seed: u64) -> SimReport {
    let traces = simulate_tandem_replicas(params, n_cycles, seed);

    let mut report = SimReport::empty(seed);
    let add = |hist: &mut BTreeMap<i64, u64>, values: &[i64]| {
        for &v in values {
            *hist.entry(v).or_insert(0) += 1;
        }
    };
    for trace in &traces {
        add(&mut report.busy_period_hist, &trace.n);
        add(&mut report.dissociation_hist, &trace.m);
        add(&mut report.occupancy_hist, &trace.z);
    }
    report.histogram = report.occupancy_hist.clone();
    report.n_samples = n_cycles;
    report
}

/// Worst per-bin deviation between replica-sampled frequencies and an
/// expected pmf, in batch-means standard errors (replicas are the batches).
/// Bins where the pooled expected count is below `min_expected` are skipped.
pub fn max_batch_sigma(
    traces: &[TandemTrace],
    select: impl Fn(&TandemTrace) -> &[i64],
    pmf: impl Fn(i64) -> f64,
    x_hi: i64,
    min_expected: f64,
) -> f64 {
    let reps = traces.len() as f64;
    let pooled: u64 = traces.iter().map(|t| select(t).len() as u64).sum();
    let mut worst: f64 = 0.0;
    for x in 0..=x_hi {
        let p = pmf(x);
        if pooled as f64 * p < min_expected {
            continue;
        }
        let freqs: Vec<f64> = traces
            .iter()
            .map(|t| {
                let vals = select(t);
                vals.iter().filter(|&&v| v == x).count() as f64 / vals.len() as f64
            })
            .collect();
        let mean = freqs.iter().sum::<f64>() / reps;
        let var = freqs.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (reps - 1.0);
        let se = (var / reps).sqrt().max(1e-300);
        worst = worst.max((mean - p).abs() / se);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TandemParams {
        TandemParams::new(1.0, 0.3, 0.5).unwrap()
    }

    #[test]
    fn busy_period_size_one_frequency() {
        let report = simulate_tandem(&params(), 100_000, 42);
        let p = 1.0 / 1.3; // P(N = 1) = 1/(1+a)
        let n = report.n_samples as f64;
        let got = report.busy_period_hist[&1] as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((got - p).abs() < 4.0 * sigma, "{got} vs {p}");
    }

    #[test]
    fn dissociation_counts_are_geometric() {
        let report = simulate_tandem(&params(), 100_000, 42);
        let r: f64 = 2.0 / 3.0;
        let n = report.n_samples as f64;
        for m in 0..=6i64 {
            let p = r.powi(m as i32) * (1.0 - r);
            let got = report.dissociation_hist.get(&m).copied().unwrap_or(0) as f64 / n;
            let sigma = (p * (1.0 - p) / n).sqrt();
            assert!((got - p).abs() < 4.0 * sigma, "m={m}: {got} vs {p}");
        }
    }

    #[test]
    fn backlog_floors_at_zero() {
        let report = simulate_tandem(&params(), 20_000, 7);
        assert!(report.occupancy_hist.keys().all(|&z| z >= 0));
        // full dissociation happens often at these rates
        assert!(report.occupancy_hist[&0] > 0);
        let total: u64 = report.occupancy_hist.values().sum();
        assert_eq!(total, report.n_samples);
    }

    #[test]
    fn same_seed_same_report() {
        let a = simulate_tandem(&params(), 5_000, 13);
        let b = simulate_tandem(&params(), 5_000, 13);
        assert_eq!(a, b);
    }
}
