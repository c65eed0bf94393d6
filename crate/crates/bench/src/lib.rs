//! Shared fixtures for the criterion benches.

use d2p_core::sim::SearchSpec;
use d2p_core::solver::{k_opt, solve, PhaseSchedule};
use std::f64::consts::PI;

/// A ten-qubit single-marked-state instance with its solved schedule.
pub fn ten_qubit_instance() -> (SearchSpec, PhaseSchedule) {
    let spec = SearchSpec::new(10, [517]).expect("valid instance");
    let lambda = spec.lambda();
    let schedule = solve(lambda, k_opt(lambda).expect("in domain"), PI).expect("solvable");
    (spec, schedule)
}
