//! Exact n-qubit statevector simulation.
//!
//! Amplitudes are indexed by basis state with qubit 0 as the least
//! significant bit of the index: `|q_{n-1} ... q_1 q_0>` is index
//! `sum q_i 2^i`. No sampling is performed anywhere; probabilities are read
//! off the exact amplitudes.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::subspace::SubspaceState;

/// Memory guard: a statevector holds 2^n complex amplitudes.
pub const MAX_SIM_QUBITS: usize = 24;

/// Register sizes accepted by [`SearchSpec`]; circuits can be described (and
/// exported) beyond what the simulator will hold in memory.
pub const MAX_SPEC_QUBITS: usize = 48;

/// A search instance: register size and the marked basis states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchSpec {
    n_qubits: usize,
    /// Sorted, distinct, all < 2^n_qubits.
    marked: Vec<usize>,
}

impl SearchSpec {
    pub fn new(n_qubits: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SPEC_QUBITS {
            return Err(Error::QubitCountOutOfRange {
                n: n_qubits,
                max: MAX_SPEC_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        let mut marked: Vec<usize> = marked.into_iter().collect();
        marked.sort_unstable();
        if marked.is_empty() {
            return Err(Error::InvalidMarkedSet {
                reason: "no marked states".into(),
            });
        }
        if let Some(w) = marked.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidMarkedSet {
                reason: format!("index {} repeated", w[0]),
            });
        }
        if let Some(&bad) = marked.iter().find(|&&i| i >= dim) {
            return Err(Error::InvalidMarkedSet {
                reason: format!("index {bad} out of range for {n_qubits} qubits"),
            });
        }
        if marked.len() == dim {
            return Err(Error::InvalidMarkedSet {
                reason: "every basis state is marked".into(),
            });
        }
        Ok(Self { n_qubits, marked })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn marked_count(&self) -> usize {
        self.marked.len()
    }

    /// Marked fraction `lambda = M / N`.
    pub fn lambda(&self) -> f64 {
        self.marked.len() as f64 / self.dimension() as f64
    }

    pub fn is_marked(&self, index: usize) -> bool {
        self.marked.binary_search(&index).is_ok()
    }
}

/// 2^n complex amplitudes; qubit 0 is the least significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn check_qubits(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            Err(Error::QubitCountOutOfRange {
                n: n_qubits,
                max: MAX_SIM_QUBITS,
            })
        } else {
            Ok(())
        }
    }

    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::check_qubits(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// A computational basis state.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        Self::check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidMarkedSet {
                reason: format!("basis index {index} out of range for {n_qubits} qubits"),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// The uniform superposition with every amplitude `2^{-n/2}`.
    pub fn uniform_superposition(n_qubits: usize) -> Result<Self> {
        Self::check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            n_qubits,
            amps: vec![a; dim],
        })
    }

    /// Builds a state from raw amplitudes (length a power of two, normalized
    /// within 1e-10).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidMarkedSet {
                reason: format!("amplitude vector length {dim} is not a power of two"),
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        Self::check_qubits(n_qubits)?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Total probability of the given basis indices.
    pub fn success_probability(&self, marked: &[usize]) -> f64 {
        marked.iter().map(|&i| self.amps[i].norm_sqr()).sum()
    }

    /// Multiplies the listed amplitudes by `e^{i theta}`, which is how a
    /// fixed oracle acts on its marked states.
    pub fn phase_indices(&mut self, indices: &[usize], theta: f64) {
        let ph = Complex64::from_polar(1.0, theta);
        for &i in indices {
            self.amps[i] *= ph;
        }
    }

    /// Applies one gate in place. Exact unitary action, norm preserving.
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match gate {
            GateOp::H(q) => self.apply_h(*q),
            GateOp::X(q) => self.apply_mcx(&[], *q),
            GateOp::Phase(q, theta) => self.apply_phase_mask(1usize << q, *theta),
            GateOp::Cnot { control, target } => self.apply_mcx(&[*control], *target),
            GateOp::Mcx { controls, target } => self.apply_mcx(controls, *target),
            GateOp::McPhase { qubits, theta } => {
                let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << q));
                self.apply_phase_mask(mask, *theta);
            }
            GateOp::GlobalPhase(theta) => {
                let ph = Complex64::from_polar(1.0, *theta);
                for a in &mut self.amps {
                    *a *= ph;
                }
            }
        }
        Ok(())
    }

    fn apply_h(&mut self, q: usize) {
        let bit = 1usize << q;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = (a + b) * inv_sqrt2;
                self.amps[i | bit] = (a - b) * inv_sqrt2;
            }
        }
    }

    /// NOT on `target` wherever every control bit is 1. An empty control
    /// list is a plain X.
    fn apply_mcx(&mut self, controls: &[usize], target: usize) {
        let cmask = controls.iter().fold(0usize, |m, &c| m | (1 << c));
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask == cmask && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    /// `e^{i theta}` on every index whose bits cover `mask`.
    fn apply_phase_mask(&mut self, mask: usize, theta: f64) {
        let ph = Complex64::from_polar(1.0, theta);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= ph;
            }
        }
    }
}

/// Applies a circuit's gates in list order to a copy of `init`. Measurement
/// is never performed; read the distribution from the returned state.
pub fn run(circuit: &Circuit, init: &StateVector) -> Result<StateVector> {
    if circuit.n_qubits() != init.n_qubits() {
        return Err(Error::QubitCountMismatch {
            circuit: circuit.n_qubits(),
            state: init.n_qubits(),
        });
    }
    let mut state = init.clone();
    for gate in circuit.gates() {
        state.apply_gate(gate)?;
    }
    Ok(state)
}

/// Result of projecting a full state onto the `{|R>, |T>}` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceProjection {
    pub state: SubspaceState,
    /// Norm of the component outside the plane.
    pub residual: f64,
}

/// Leakage above this norm means the circuit left the search plane, which
/// exact lowering never does beyond rounding.
pub const SUBSPACE_TOLERANCE: f64 = 1e-8;

/// Projects a full statevector onto the two-dimensional search subspace:
/// `a_T` is the overlap with the equal superposition of marked states, `a_R`
/// with the equal superposition of unmarked ones. Errors with the
/// best-effort projection attached if the out-of-plane residual exceeds
/// [`SUBSPACE_TOLERANCE`].
pub fn project_subspace(state: &StateVector, spec: &SearchSpec) -> Result<SubspaceProjection> {
    if spec.n_qubits() != state.n_qubits() {
        return Err(Error::QubitCountMismatch {
            circuit: spec.n_qubits(),
            state: state.n_qubits(),
        });
    }
    let dim = spec.dimension();
    let m = spec.marked_count();
    let sum_marked: Complex64 = spec.marked().iter().map(|&i| state.amps[i]).sum();
    let sum_all: Complex64 = state.amps.iter().sum();
    let a_t = sum_marked / (m as f64).sqrt();
    let a_r = (sum_all - sum_marked) / ((dim - m) as f64).sqrt();

    let recon_marked = a_t / (m as f64).sqrt();
    let recon_unmarked = a_r / ((dim - m) as f64).sqrt();
    let mut leak_sqr = 0.0;
    for (i, amp) in state.amps.iter().enumerate() {
        let recon = if spec.is_marked(i) {
            recon_marked
        } else {
            recon_unmarked
        };
        leak_sqr += (amp - recon).norm_sqr();
    }
    let residual = leak_sqr.sqrt();
    if residual > SUBSPACE_TOLERANCE {
        return Err(Error::OutOfSubspace { a_r, a_t, residual });
    }
    Ok(SubspaceProjection {
        state: SubspaceState::new(a_r, a_t),
        residual,
    })
}

/// Dense generalized reflection about an arbitrary normalized state:
///
/// ```text
/// S'_r(beta) |psi> = e^{i beta} |psi> - (e^{i beta} - 1) <axis|psi> |axis>
/// ```
///
/// No circuit is built; the inner product is computed directly. With the
/// uniform superposition as axis this reproduces the standard reflection.
pub fn reflect_about(state: &StateVector, axis: &StateVector, beta: f64) -> Result<StateVector> {
    if state.n_qubits() != axis.n_qubits() {
        return Err(Error::QubitCountMismatch {
            circuit: axis.n_qubits(),
            state: state.n_qubits(),
        });
    }
    let axis_norm = axis.norm_sqr();
    if (axis_norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized {
            norm_sqr: axis_norm,
        });
    }
    let e = Complex64::from_polar(1.0, beta);
    let coeff = (e - Complex64::new(1.0, 0.0)) * axis.inner_product(state);
    let amps = state
        .amps
        .iter()
        .zip(&axis.amps)
        .map(|(s, a)| e * s - coeff * a)
        .collect();
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amps,
    })
}
