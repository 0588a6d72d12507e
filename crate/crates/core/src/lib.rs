//! Binary-sensed switching control of planar homogeneous plants.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! 1. [`abstraction`] builds a deterministic finite state machine whose
//!    states are arcs of a sensor-aligned partition of the unit circle
//!    ([`geometry`]). Driven by the true sensor output it always contains
//!    the plant's direction and over-bounds its log-gain.
//! 2. [`gain`] certifies how often the machine's predicted sensor output can
//!    disagree with the plant (the gain `gamma`), by a maximum cycle mean
//!    with an LP cross-check.
//! 3. [`synthesis`] runs min-max value iteration on the machine to find a
//!    switching policy robust to that disagreement rate, and searches for
//!    the largest certified decay rate.
//! 4. [`closed_loop`] simulates machine-plus-policy against the true
//!    [`plant`] and checks the certificates along the trajectory.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod abstraction;
pub mod closed_loop;
pub mod gain;
pub mod geometry;
pub mod graph;
pub mod linalg;
mod math;
pub mod plant;
pub mod simplex;
pub mod synthesis;

pub use abstraction::{build_machine, AbstractMachine, MachineTable};
pub use closed_loop::{certificate_monitor, rate_report, simulate, simulate_policy, RateReport, StepRecord, Trace};
pub use gain::{certificate, lp_cross_check, max_cycle_mean, GainCertificate};
pub use geometry::{Arc, Partition, Sign};
pub use linalg::Mat2;
pub use plant::{expm_2x2, HarmonicPair, Input, LogBase, Plant};
pub use synthesis::{
    evaluate_tau, search_tau_r, select_best, value_iteration, verify_policy, CostSpec, SearchParams, SynthesisError,
    SynthesisResult,
};
