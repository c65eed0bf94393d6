//! Deterministic two-phase ("D2p") Grover search.
//!
//! Given the marked fraction `lambda = M/N` of a search instance, this crate
//! computes the pair of diffusion phases `(theta1, theta2)` that drive a
//! fixed-oracle Grover search to success probability exactly 1, and verifies
//! the result two independent ways: in the exact two-dimensional subspace
//! model and by full statevector simulation of the lowered quantum circuit.
//!
//! - [`subspace`]: exact arithmetic in the `{|R>, |T>}` plane: oracle,
//!   reflection, iterate, closed-form iterate powers, Bloch trajectories.
//! - [`solver`]: query counts (`k_opt`, `k'_opt`), the reference phase
//!   `theta0`, the determinism conditions, and the Newton solver producing
//!   [`PhaseSchedule`]s.
//! - [`sim`]: exact n-qubit statevector simulation plus a dense reflection
//!   path for amplitude amplification with arbitrary start states.
//! - [`circuit`]: ancilla-free circuit construction, multi-controlled phase
//!   lowering, and OpenQASM 3 export.
//! - [`sweep`]: machine-readable lambda/alpha sweep tables and trajectory
//!   exports (CSV or JSON).

pub mod circuit;
mod error;
pub mod sim;
pub mod solver;
pub mod subspace;
pub mod sweep;

pub use circuit::{Circuit, DenseMatrix, GateOp};
pub use error::{Error, Result};
pub use sim::{SearchSpec, StateVector, SubspaceProjection};
pub use solver::{PhaseSchedule, QueryPlan};
pub use subspace::{BlochVector, RotationDecomposition, SubspaceState, Unitary2};
pub use sweep::{ExportFormat, SweepRecord};
