//! Independent oracles for the solvers: a Lindley-recursion fixed point on
//! a truncated lattice, Monte Carlo supremum sampling, and an event-driven
//! simulator of the two-stage queue with exponential clocks.

mod lindley;
mod mc;
mod tandem_sim;

pub use lindley::{lindley_fixed_point, lindley_fixed_point_with_state, LindleyState};
pub use mc::mc_sup;
pub use tandem_sim::{max_batch_sigma, replica_trace, simulate_tandem, simulate_tandem_replicas, TandemTrace};

use serde::Serialize;
use std::collections::BTreeMap;

/// Histogram output of a simulation run. Identical `(inputs, seed)` produce
/// bitwise-identical reports, independent of thread count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimReport {
    /// The run's primary histogram: sampled walk maxima for [`mc_sup`], the
    /// stage-2 backlog for [`simulate_tandem`].
    pub histogram: BTreeMap<i64, u64>,
    pub n_samples: u64,
    pub seed: u64,
    /// Per-cycle stage-1 busy-period sizes (tandem runs only).
    pub busy_period_hist: BTreeMap<i64, u64>,
    /// Per-cycle dissociation counts (tandem runs only).
    pub dissociation_hist: BTreeMap<i64, u64>,
    /// Per-cycle end-of-shrinkage backlog (tandem runs only).
    pub occupancy_hist: BTreeMap<i64, u64>,
}

impl SimReport {
    fn empty(seed: u64) -> Self {
        Self {
            histogram: BTreeMap::new(),
            n_samples: 0,
            seed,
            busy_period_hist: BTreeMap::new(),
            dissociation_hist: BTreeMap::new(),
            occupancy_hist: BTreeMap::new(),
        }
    }
}

/// Draws from the open unit interval (rejecting exact zeros so logarithms
/// stay finite).
fn open01(rng: &mut impl rand::Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
