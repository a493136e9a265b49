//! Exact distribution of the all-time maximum of a negative-drift integer
//! random walk whose step law has a geometric tail on one side.
//!
//! When the right tail of the step law is geometric, the supremum of the
//! walk is itself geometric and is pinned down by the unique root of the
//! step pgf in `(1, 1/r)` ([`kp_right`]). When the left tail is geometric,
//! the supremum law follows from the ladder-height measure and a
//! Khinchine-Pollaczek generating function ([`kp_left`]). Both closed
//! forms are validated against definition-level dynamic-programming
//! oracles ([`ladder`]), a Lindley-recursion fixed point and Monte Carlo
//! sampling ([`sim`]). The [`tandem`] module maps a two-stage queue with
//! exponential clocks (growth/shrinkage cycles of a polymer chain under
//! last-come-first-served dissociation) onto a left-tail walk and solves
//! for the stationary occupancy of the second stage.
//!
//! Start with the runnable programs in `examples/`, or the `geotail`
//! binary for the same functionality as subcommands.

pub mod cli;
pub mod dist;
pub mod error;
pub mod kp_left;
pub mod kp_right;
pub mod ladder;
pub mod sim;
pub mod tandem;

pub use error::{Error, Result};
