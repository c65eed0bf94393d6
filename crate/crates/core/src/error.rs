use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the solver, the simulator, and the circuit builder.
#[derive(Debug, Error)]
pub enum Error {
    /// A marked fraction outside the domain of the requested operation.
    #[error("lambda = {value} is outside {requirement}")]
    InvalidLambda {
        value: f64,
        requirement: &'static str,
    },

    /// Deterministic two-phase schedules only exist for lambda <= 1/4. Above
    /// that a single standard Grover query already succeeds with probability
    /// sin^2(3*asin(sqrt(lambda))) >= 1/2, and a classical scan is competitive.
    #[error(
        "lambda = {value} exceeds 1/4: no deterministic two-phase schedule exists; \
         use one standard Grover query or a classical search instead"
    )]
    LambdaAboveQuarter { value: f64 },

    /// The reference phase needs sin(pi/(4k+2)) <= sqrt(lambda).
    #[error("reference phase undefined for lambda = {lambda}, k = {k}: increase k")]
    ThetaZeroOutOfDomain { lambda: f64, k: u32 },

    /// A query count of zero was requested.
    #[error("query count k must be at least 1")]
    InvalidQueryCount,

    /// Newton iteration and the multistart grid both failed to locate a root.
    #[error("phase solver did not converge (lambda = {lambda}, alpha = {alpha}, k <= {max_k})")]
    NoConvergence { lambda: f64, alpha: f64, max_k: u32 },

    /// Register size outside the supported range.
    #[error("qubit count {n} is outside 1..={max}")]
    QubitCountOutOfRange { n: usize, max: usize },

    /// The marked set is empty, exhausts the register, or contains bad indices.
    #[error("invalid marked set: {reason}")]
    InvalidMarkedSet { reason: String },

    /// A gate references a qubit outside the register.
    #[error("{gate} gate references qubit {index}, but the register has {n_qubits} qubits")]
    GateIndexOutOfRange {
        gate: &'static str,
        index: usize,
        n_qubits: usize,
    },

    /// A gate uses the same qubit twice (e.g. a control equal to the target).
    #[error("{gate} gate uses qubit {index} more than once")]
    GateQubitAliased { gate: &'static str, index: usize },

    /// Circuit and state were built for different register sizes.
    #[error("circuit acts on {circuit} qubits but the state has {state}")]
    QubitCountMismatch { circuit: usize, state: usize },

    /// A state vector whose squared norm is not 1 within tolerance.
    #[error("state norm^2 = {norm_sqr} is not 1 within tolerance")]
    NotNormalized { norm_sqr: f64 },

    /// The state has a component outside span{|R>, |T>} larger than the
    /// subspace-leakage tolerance. The best-effort projection is attached.
    #[error("state leaves the two-dimensional search subspace (residual {residual:.3e})")]
    OutOfSubspace {
        a_r: Complex64,
        a_t: Complex64,
        residual: f64,
    },

    /// A schedule solved for one marked fraction applied to another instance.
    #[error(
        "schedule lambda = {schedule_lambda} does not match search instance lambda = {spec_lambda}"
    )]
    ScheduleMismatch {
        schedule_lambda: f64,
        spec_lambda: f64,
    },

    /// A sweep row marked as solved no longer satisfies the schedule invariants.
    #[error("sweep record {index} violates the solved-schedule invariants")]
    RecordInvariant { index: usize },

    /// File I/O with the offending path attached.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
