//! Gate-list circuit construction and lowering.
//!
//! The deterministic search circuit is built without ancillary qubits from
//! Hadamards, X gates, multi-controlled phase gates, and multi-controlled
//! NOT gates. A multi-controlled phase on `m` qubits lowers recursively into
//! two `m`-qubit multi-controlled NOTs, one `(m-1)`-qubit phase gate with the
//! angle halved, and two single-qubit phase gates; the two-qubit stage is the
//! familiar CNOT + phase pattern. Multi-controlled NOTs stay primitive.
//!
//! Circuits export as OpenQASM 3.0 text with qubit 0 documented as the least
//! significant index bit.

use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sim::{run, SearchSpec, StateVector};
use crate::solver::PhaseSchedule;

/// One gate. `Phase` is `diag(1, e^{i theta})` on its qubit; `McPhase`
/// applies `e^{i theta}` on the all-ones subspace of its qubit list and is
/// symmetric in that list.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    H(usize),
    X(usize),
    Phase(usize, f64),
    Cnot { control: usize, target: usize },
    Mcx { controls: Vec<usize>, target: usize },
    McPhase { qubits: Vec<usize>, theta: f64 },
    GlobalPhase(f64),
}

impl GateOp {
    /// Multi-controlled phase with a canonically sorted qubit list.
    pub fn mcphase(mut qubits: Vec<usize>, theta: f64) -> Self {
        qubits.sort_unstable();
        GateOp::McPhase { qubits, theta }
    }

    /// Multi-controlled NOT with canonically sorted controls.
    pub fn mcx(mut controls: Vec<usize>, target: usize) -> Self {
        controls.sort_unstable();
        GateOp::Mcx { controls, target }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateOp::H(_) => "h",
            GateOp::X(_) => "x",
            GateOp::Phase(..) => "p",
            GateOp::Cnot { .. } => "cx",
            GateOp::Mcx { .. } => "mcx",
            GateOp::McPhase { .. } => "mcphase",
            GateOp::GlobalPhase(_) => "gphase",
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            GateOp::H(q) | GateOp::X(q) | GateOp::Phase(q, _) => vec![*q],
            GateOp::Cnot { control, target } => vec![*control, *target],
            GateOp::Mcx { controls, target } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            GateOp::McPhase { qubits, .. } => qubits.clone(),
            GateOp::GlobalPhase(_) => Vec::new(),
        }
    }

    /// Checks index range and pairwise distinctness against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::GateIndexOutOfRange {
                    gate: self.name(),
                    index: q,
                    n_qubits,
                });
            }
        }
        let mut sorted = qs;
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::GateQubitAliased {
                gate: self.name(),
                index: w[0],
            });
        }
        if matches!(self, GateOp::McPhase { qubits, .. } if qubits.is_empty()) {
            return Err(Error::GateQubitAliased {
                gate: self.name(),
                index: 0,
            });
        }
        Ok(())
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after validating it against this register.
    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    fn push_all(&mut self, gates: impl IntoIterator<Item = GateOp>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }
}

/// Oracle circuit for `S_o(alpha)`: for each marked basis index (ascending),
/// X gates flip the zero bits, an n-qubit multi-controlled phase applies
/// `e^{i alpha}`, and the X gates undo. The per-state diagonal factors
/// commute, so the ascending order is canonical.
pub fn build_oracle(spec: &SearchSpec, alpha: f64) -> Circuit {
    let n = spec.n_qubits();
    let mut circuit = Circuit::new(n);
    let all: Vec<usize> = (0..n).collect();
    for &index in spec.marked() {
        let zeros: Vec<usize> = (0..n).filter(|q| index & (1 << q) == 0).collect();
        for &q in &zeros {
            circuit.push(GateOp::X(q)).expect("index in range");
        }
        circuit
            .push(GateOp::mcphase(all.clone(), alpha))
            .expect("index in range");
        for &q in &zeros {
            circuit.push(GateOp::X(q)).expect("index in range");
        }
    }
    circuit
}

/// Reflection circuit for `S_r(theta)` up to global phase: Hadamards, X
/// gates, an n-qubit multi-controlled phase, and the conjugating X and
/// Hadamard layers.
///
/// The sandwiched gate phases the `|0...0>`-mapped state (`|psi0>` itself)
/// by its angle, while `S_r(theta)` fixes `|psi0>` and phases the
/// orthogonal complement by `e^{i theta}`. The two conventions are related by
/// `H X McPhase(-theta) X H = e^{-i theta} S_r(theta)`, so the emitted phase
/// angle is `-theta`.
pub fn build_reflection(n_qubits: usize, theta: f64) -> Circuit {
    let mut circuit = Circuit::new(n_qubits);
    let all: Vec<usize> = (0..n_qubits).collect();
    let layer = |c: &mut Circuit, f: fn(usize) -> GateOp| {
        for q in 0..n_qubits {
            c.push(f(q)).expect("index in range");
        }
    };
    layer(&mut circuit, GateOp::H);
    layer(&mut circuit, GateOp::X);
    circuit
        .push(GateOp::mcphase(all, -theta))
        .expect("index in range");
    layer(&mut circuit, GateOp::X);
    layer(&mut circuit, GateOp::H);
    circuit
}

/// Full deterministic search circuit: Hadamards on every qubit, then `k`
/// iterates; iterate `i` (1-indexed) applies the oracle at the schedule's
/// `alpha` followed by the reflection at `theta1` (odd `i`) or `theta2`
/// (even `i`).
pub fn build_d2p(spec: &SearchSpec, schedule: &PhaseSchedule) -> Result<Circuit> {
    if (schedule.lambda - spec.lambda()).abs() > 1e-12 {
        return Err(Error::ScheduleMismatch {
            schedule_lambda: schedule.lambda,
            spec_lambda: spec.lambda(),
        });
    }
    let n = spec.n_qubits();
    let mut circuit = Circuit::new(n);
    for q in 0..n {
        circuit.push(GateOp::H(q))?;
    }
    let oracle = build_oracle(spec, schedule.alpha);
    for i in 1..=schedule.k {
        let theta = if i % 2 == 1 {
            schedule.theta1
        } else {
            schedule.theta2
        };
        circuit.push_all(oracle.gates().iter().cloned())?;
        circuit.push_all(build_reflection(n, theta).gates().iter().cloned())?;
    }
    Ok(circuit)
}

/// Recursive lowering of a multi-controlled phase gate. For `m >= 2` qubits
/// the gate becomes two `m`-qubit multi-controlled NOTs, two single-qubit
/// phase gates, and an `(m-1)`-qubit gate at half the angle, recursing down
/// to a single `Phase`. The identity is exact, with no global-phase slack, and
/// emits `2(m-1)` multi-controlled NOTs plus `2(m-1) + 1` phase gates in
/// total. Every multi-controlled NOT is emitted as `Mcx`, including the
/// single-control ones at the two-qubit stage.
pub fn lower_mcphase(qubits: &[usize], theta: f64) -> Vec<GateOp> {
    match qubits.split_last() {
        None => vec![GateOp::GlobalPhase(theta)],
        Some((&q, [])) => vec![GateOp::Phase(q, theta)],
        Some((&target, rest)) => {
            let half = 0.5 * theta;
            let mut out = vec![
                GateOp::Phase(target, half),
                GateOp::Mcx {
                    controls: rest.to_vec(),
                    target,
                },
                GateOp::Phase(target, -half),
                GateOp::Mcx {
                    controls: rest.to_vec(),
                    target,
                },
            ];
            out.extend(lower_mcphase(rest, half));
            out
        }
    }
}

/// Two-qubit controlled-phase lowering: two CNOTs, three phase gates, and a
/// global-phase record. With `Phase = diag(1, e^{i theta})` gates the
/// decomposition is already exact, so the recorded global phase is zero; the
/// record is kept for consumers that track phase explicitly.
pub fn lower_cphase(control: usize, target: usize, theta: f64) -> Vec<GateOp> {
    let half = 0.5 * theta;
    vec![
        GateOp::Phase(target, half),
        GateOp::Cnot { control, target },
        GateOp::Phase(target, -half),
        GateOp::Cnot { control, target },
        GateOp::Phase(control, half),
        GateOp::GlobalPhase(0.0),
    ]
}

/// Replaces every multi-controlled phase gate: the two-qubit ones through
/// [`lower_cphase`], larger ones through [`lower_mcphase`]. Multi-controlled
/// NOTs are retained as primitives. The resulting gate set is
/// `{H, X, Phase, CNOT, MCX, GlobalPhase}`; circuits already in that set
/// pass through unchanged.
pub fn lower_all(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.n_qubits());
    for gate in circuit.gates() {
        match gate {
            GateOp::McPhase { qubits, theta } => {
                let lowered = match qubits.len() {
                    2 => lower_cphase(qubits[0], qubits[1], *theta),
                    _ => lower_mcphase(qubits, *theta),
                };
                out.push_all(lowered).expect("validated source circuit");
            }
            other => out.push(other.clone()).expect("validated source circuit"),
        }
    }
    out
}

/// Dense unitary guard: matrices are 2^n x 2^n.
pub const MAX_UNITARY_QUBITS: usize = 10;

/// A dense complex matrix, row-major. Test-oriented: just enough linear
/// algebra to compare circuit unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = DenseMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(r, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..self.dim {
                    let v = out.get(r, c) + a * rhs.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    worst = worst.max(self.get(r, c).norm());
                }
            }
        }
        worst
    }

    /// Phase-aligned distance: minimizes over a global phase fixed by the
    /// largest entry of `other`.
    pub fn max_abs_diff_up_to_phase(&self, other: &DenseMatrix) -> f64 {
        let mut lead = 0usize;
        for (i, v) in other.data.iter().enumerate() {
            if v.norm() > other.data[lead].norm() {
                lead = i;
            }
        }
        if other.data[lead].norm() == 0.0 || self.data[lead].norm() == 0.0 {
            return self.max_abs_diff(other);
        }
        let phase = other.data[lead] / self.data[lead];
        let phase = phase / phase.norm();
        self.scaled(phase).max_abs_diff(other)
    }
}

/// Dense unitary of a circuit, built by running every basis column through
/// the simulator. Guarded at 10 qubits.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseMatrix> {
    let n = circuit.n_qubits();
    if n == 0 || n > MAX_UNITARY_QUBITS {
        return Err(Error::QubitCountOutOfRange {
            n,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DenseMatrix::zeros(dim);
    for col in 0..dim {
        let out = run(circuit, &StateVector::basis_state(n, col)?)?;
        for row in 0..dim {
            m.set(row, col, out.amplitude(row));
        }
    }
    Ok(m)
}

/// Angles are printed with 17 significant digits so round-tripping them
/// recovers the exact f64.
fn fmt_angle(theta: f64) -> String {
    format!("{theta:.16e}")
}

/// Serializes a circuit as OpenQASM 3.0 text (UTF-8, LF line endings).
/// Multi-controlled phase gates emit as `ctrl(m-1) @ p(...)`, multi-controlled
/// NOTs as `ctrl(c) @ x`; output is byte-for-byte deterministic for a given
/// circuit.
pub fn to_qasm(circuit: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("// Qubit ordering: q[i] is bit i of the basis-state index, so q[0] is the\n");
    s.push_str("// least significant bit.\n");
    s.push_str("OPENQASM 3.0;\n");
    s.push_str("include \"stdgates.inc\";\n\n");
    let _ = writeln!(s, "qubit[{}] q;\n", circuit.n_qubits());
    for gate in circuit.gates() {
        match gate {
            GateOp::H(q) => {
                let _ = writeln!(s, "h q[{q}];");
            }
            GateOp::X(q) => {
                let _ = writeln!(s, "x q[{q}];");
            }
            GateOp::Phase(q, theta) => {
                let _ = writeln!(s, "p({}) q[{q}];", fmt_angle(*theta));
            }
            GateOp::Cnot { control, target } => {
                let _ = writeln!(s, "cx q[{control}], q[{target}];");
            }
            GateOp::Mcx { controls, target } => {
                let list = controls
                    .iter()
                    .chain(std::iter::once(target))
                    .map(|q| format!("q[{q}]"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(s, "ctrl({}) @ x {list};", controls.len());
            }
            GateOp::McPhase { qubits, theta } => {
                if qubits.len() == 1 {
                    let _ = writeln!(s, "p({}) q[{}];", fmt_angle(*theta), qubits[0]);
                } else {
                    let list = qubits
                        .iter()
                        .map(|q| format!("q[{q}]"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let _ = writeln!(
                        s,
                        "ctrl({}) @ p({}) {list};",
                        qubits.len() - 1,
                        fmt_angle(*theta)
                    );
                }
            }
            GateOp::GlobalPhase(theta) => {
                let _ = writeln!(s, "gphase({});", fmt_angle(*theta));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::project_subspace;
    use crate::solver::solve;
    use crate::subspace::{grover_iterate, initial_state};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense diagonal oracle built directly from the definition.
    fn dense_oracle(spec: &SearchSpec, alpha: f64) -> DenseMatrix {
        let mut m = DenseMatrix::identity(spec.dimension());
        for &i in spec.marked() {
            m.set(i, i, Complex64::from_polar(1.0, alpha));
        }
        m
    }

    #[test]
    fn oracle_all_ones_pattern_needs_no_conjugation() {
        let spec = SearchSpec::new(2, [3]).unwrap();
        let circ = build_oracle(&spec, PI);
        assert_eq!(circ.len(), 1);
        assert!(matches!(&circ.gates()[0], GateOp::McPhase { qubits, .. } if qubits == &[0, 1]));
        let u = circuit_unitary(&circ).unwrap();
        assert!(u.max_abs_diff(&dense_oracle(&spec, PI)) < 1e-14);
    }

    #[test]
    fn oracle_zero_pattern_conjugates_with_x() {
        let spec = SearchSpec::new(2, [0]).unwrap();
        let circ = build_oracle(&spec, PI);
        // X X McPhase X X
        assert_eq!(circ.len(), 5);
        let u = circuit_unitary(&circ).unwrap();
        let mut expect = DenseMatrix::identity(4);
        expect.set(0, 0, c(-1.0, 0.0));
        assert!(u.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn oracle_multiple_marked_states() {
        let spec = SearchSpec::new(3, [2, 5]).unwrap();
        let alpha = 1.234;
        let u = circuit_unitary(&build_oracle(&spec, alpha)).unwrap();
        assert!(u.max_abs_diff(&dense_oracle(&spec, alpha)) < 1e-13);
        assert!(u.max_off_diagonal() < 1e-14);
    }

    #[test]
    fn reflection_two_qubits_matches_projector_form() {
        // Dense comparison against e^{i pi}(I - 2 |psi0><psi0|) on 2 qubits.
        let u = circuit_unitary(&build_reflection(2, PI)).unwrap();
        let mut expect = DenseMatrix::zeros(4);
        for r in 0..4 {
            for col in 0..4 {
                let id = if r == col {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                expect.set(r, col, (id - Complex64::new(0.5, 0.0)).scale(-1.0));
            }
        }
        assert!(u.max_abs_diff_up_to_phase(&expect) < 1e-12);
    }

    #[test]
    fn reflection_zero_angle_is_identity() {
        let u = circuit_unitary(&build_reflection(3, 0.0)).unwrap();
        assert!(u.max_abs_diff_up_to_phase(&DenseMatrix::identity(8)) < 1e-13);
    }

    #[test]
    fn reflection_single_qubit_matches_projector_form() {
        // S_r(theta) = e^{i theta}(I - (1 - e^{-i theta}) |+><+|) on 1 qubit.
        let theta = 2.31;
        let u = circuit_unitary(&build_reflection(1, theta)).unwrap();
        let mut expect = DenseMatrix::zeros(2);
        let e = Complex64::from_polar(1.0, theta);
        let f = (c(1.0, 0.0) - Complex64::from_polar(1.0, -theta)) * e;
        for r in 0..2 {
            for col in 0..2 {
                let proj = c(0.5, 0.0); // |+><+| entries are all 1/2
                let id = if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
                expect.set(r, col, e * id - f * proj);
            }
        }
        assert!(u.max_abs_diff_up_to_phase(&expect) < 1e-12);
    }

    #[test]
    fn oracle_and_reflection_compose_to_subspace_iterate() {
        // Projected onto {|R>, |T>}, the circuit iterate reproduces the 2x2
        // model up to a global phase.
        let spec = SearchSpec::new(3, [6]).unwrap();
        let lambda = spec.lambda();
        let theta = 2.0;

        let mut state = StateVector::uniform_superposition(3).unwrap();
        state = run(&build_oracle(&spec, PI), &state).unwrap();
        state = run(&build_reflection(3, theta), &state).unwrap();
        let projected = project_subspace(&state, &spec)
            .unwrap()
            .state
            .canonicalized();

        let model = grover_iterate(PI, theta, lambda)
            .unwrap()
            .apply(&initial_state(lambda).unwrap())
            .canonicalized();
        assert!((projected.a_r - model.a_r).norm() < 1e-12);
        assert!((projected.a_t - model.a_t).norm() < 1e-12);
    }

    #[test]
    fn d2p_classic_two_qubit_case() {
        let spec = SearchSpec::new(2, [3]).unwrap();
        let schedule = solve(0.25, 1, PI).unwrap();
        let circ = build_d2p(&spec, &schedule).unwrap();
        let out = run(&circ, &StateVector::zero_state(2).unwrap()).unwrap();
        assert!((out.amplitude(3).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn d2p_rejects_mismatched_schedule() {
        let spec = SearchSpec::new(3, [1]).unwrap(); // lambda = 1/8
        let schedule = solve(0.25, 1, PI).unwrap();
        assert!(matches!(
            build_d2p(&spec, &schedule),
            Err(Error::ScheduleMismatch { .. })
        ));
    }

    #[test]
    fn d2p_two_marked_states_split_evenly() {
        let spec = SearchSpec::new(4, [1, 2]).unwrap(); // lambda = 1/8
        let schedule = solve(spec.lambda(), 2, PI).unwrap();
        let circ = build_d2p(&spec, &schedule).unwrap();
        let out = run(&circ, &StateVector::zero_state(4).unwrap()).unwrap();
        let success = out.success_probability(spec.marked());
        assert!(success >= 1.0 - 1e-8);
        for &i in spec.marked() {
            assert!((out.amplitude(i).norm_sqr() - 0.5).abs() < 1e-9);
        }
    }

    fn dense_mcphase(n: usize, qubits: &[usize], theta: f64) -> DenseMatrix {
        let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << q));
        let mut m = DenseMatrix::identity(1 << n);
        for i in 0..(1 << n) {
            if i & mask == mask {
                m.set(i, i, Complex64::from_polar(1.0, theta));
            }
        }
        m
    }

    fn gates_as_circuit(n: usize, gates: Vec<GateOp>) -> Circuit {
        let mut circ = Circuit::new(n);
        for g in gates {
            circ.push(g).unwrap();
        }
        circ
    }

    #[test]
    fn lower_mcphase_base_case() {
        let gates = lower_mcphase(&[2], 0.9);
        assert_eq!(gates, vec![GateOp::Phase(2, 0.9)]);
    }

    #[test]
    fn lower_mcphase_three_qubits_exact() {
        let theta = PI / 2.0;
        let qubits = [0, 1, 2];
        let circ = gates_as_circuit(3, lower_mcphase(&qubits, theta));
        let u = circuit_unitary(&circ).unwrap();
        assert!(u.max_abs_diff(&dense_mcphase(3, &qubits, theta)) < 1e-12);
    }

    #[test]
    fn lower_mcphase_gate_counts() {
        for m in 2..=6usize {
            let qubits: Vec<usize> = (0..m).collect();
            let gates = lower_mcphase(&qubits, 1.0);
            let mcx = gates
                .iter()
                .filter(|g| matches!(g, GateOp::Mcx { .. }))
                .count();
            let phase = gates
                .iter()
                .filter(|g| matches!(g, GateOp::Phase(..)))
                .count();
            assert_eq!(mcx, 2 * (m - 1));
            assert_eq!(phase, 2 * (m - 1) + 1);
            assert_eq!(gates.len(), mcx + phase);
        }
    }

    #[test]
    fn lower_mcphase_two_qubits_agrees_with_cphase() {
        let theta = -1.7;
        let a = circuit_unitary(&gates_as_circuit(2, lower_mcphase(&[0, 1], theta))).unwrap();
        let b = circuit_unitary(&gates_as_circuit(2, lower_cphase(0, 1, theta))).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn lower_cphase_special_angles() {
        // theta = 0 is the identity.
        let u = circuit_unitary(&gates_as_circuit(2, lower_cphase(0, 1, 0.0))).unwrap();
        assert!(u.max_abs_diff(&DenseMatrix::identity(4)) < 1e-14);

        // theta = pi is controlled-Z, global-phase record included.
        let u = circuit_unitary(&gates_as_circuit(2, lower_cphase(0, 1, PI))).unwrap();
        assert!(u.max_abs_diff(&dense_mcphase(2, &[0, 1], PI)) < 1e-12);
    }

    #[test]
    fn lower_all_removes_mcphase_and_preserves_unitary() {
        let spec = SearchSpec::new(4, [9]).unwrap();
        let schedule = solve(spec.lambda(), 3, PI).unwrap();
        let circ = build_d2p(&spec, &schedule).unwrap();
        let lowered = lower_all(&circ);
        assert!(lowered
            .gates()
            .iter()
            .all(|g| !matches!(g, GateOp::McPhase { .. })));
        let a = circuit_unitary(&circ).unwrap();
        let b = circuit_unitary(&lowered).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn lower_all_is_idempotent() {
        let spec = SearchSpec::new(3, [4]).unwrap();
        let schedule = solve(spec.lambda(), 2, PI).unwrap();
        let lowered = lower_all(&build_d2p(&spec, &schedule).unwrap());
        assert_eq!(lower_all(&lowered), lowered);
    }

    #[test]
    fn circuit_unitary_basics() {
        let mut circ = Circuit::new(1);
        circ.push(GateOp::H(0)).unwrap();
        let u = circuit_unitary(&circ).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.get(0, 0).re - inv).abs() < 1e-15);
        assert!((u.get(1, 1).re + inv).abs() < 1e-15);

        let mut circ = Circuit::new(1);
        circ.push(GateOp::X(0)).unwrap();
        circ.push(GateOp::X(0)).unwrap();
        let u = circuit_unitary(&circ).unwrap();
        assert!(u.max_abs_diff(&DenseMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn circuit_unitary_guard() {
        let circ = Circuit::new(MAX_UNITARY_QUBITS + 1);
        assert!(matches!(
            circuit_unitary(&circ),
            Err(Error::QubitCountOutOfRange { .. })
        ));
    }

    #[test]
    fn qasm_contains_expected_statements() {
        let mut circ = Circuit::new(2);
        circ.push(GateOp::H(0)).unwrap();
        circ.push(GateOp::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        circ.push(GateOp::mcphase(vec![0, 1], PI)).unwrap();
        let text = to_qasm(&circ);
        assert!(text.starts_with("// Qubit ordering"));
        assert!(text.contains("OPENQASM 3.0;"));
        assert!(text.contains("qubit[2] q;"));
        assert!(text.contains("h q[0];"));
        assert!(text.contains("cx q[0], q[1];"));
        assert!(text.contains("ctrl(1) @ p(3.1415926535897931e0) q[0], q[1];"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn qasm_output_is_deterministic() {
        let spec = SearchSpec::new(2, [3]).unwrap();
        let schedule = solve(0.25, 1, PI).unwrap();
        let circ = build_d2p(&spec, &schedule).unwrap();
        assert_eq!(to_qasm(&circ), to_qasm(&circ));
    }

    #[test]
    fn qasm_golden_classic_case() {
        let spec = SearchSpec::new(2, [3]).unwrap();
        let schedule = solve(0.25, 1, PI).unwrap();
        let circ = build_d2p(&spec, &schedule).unwrap();
        let expected = include_str!("../tests/golden/d2p_n2_marked3_k1.qasm");
        assert_eq!(to_qasm(&circ), expected);
    }
}
