//! Gate-level circuit IR.
//!
//! Qubit `q_i` is bit `i` of a basis index, so a width-3 walk register reads
//! `|q2 q1 q0⟩` with the coin on `q2` and position `2·q1 + q0`. Multi-qubit
//! gate matrices treat `qubits[0]` as the most significant local bit.

mod apply;
mod builders;
pub mod text;

pub use apply::{apply_gate, apply_matrix, lower_to_unitary, MAX_LOWER_WIDTH};
pub use builders::*;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::CircuitError;
use crate::linalg::{cis, mat2_dagger, ComplexMatrix, Mat2, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    SX,
    ID,
    RZ(f64),
    Phase(f64),
    /// `[[c, −e^{iλ/2}s], [e^{iφ/2}s, e^{i(λ+φ)/2}c]]` with `c = cos(θ/2)`,
    /// `s = sin(θ/2)`.
    U3 { theta: f64, phi: f64, lambda: f64 },
    ControlledPhase(f64),
    ECR,
    Unitary2x2(Mat2),
    Barrier,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::SX => "SX",
            GateKind::ID => "ID",
            GateKind::RZ(_) => "RZ",
            GateKind::Phase(_) => "P",
            GateKind::U3 { .. } => "U3",
            GateKind::ControlledPhase(_) => "CP",
            GateKind::ECR => "ECR",
            GateKind::Unitary2x2(_) => "U",
            GateKind::Barrier => "BARRIER",
        }
    }

    /// Number of qubits, or `None` for barriers (any count).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::ControlledPhase(_) | GateKind::ECR => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(
            self,
            GateKind::ID | GateKind::RZ(_) | GateKind::SX | GateKind::X | GateKind::ECR | GateKind::Barrier
        )
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        match self {
            GateKind::ID | GateKind::RZ(_) | GateKind::Phase(_) | GateKind::ControlledPhase(_) => true,
            GateKind::Unitary2x2(m) => m[0][1] == ZERO && m[1][0] == ZERO,
            _ => false,
        }
    }

    /// Gate matrix: 2x2 for one-qubit kinds, 4x4 for two-qubit kinds,
    /// `None` for barriers.
    pub fn matrix(&self) -> Option<ComplexMatrix> {
        let m = match self {
            GateKind::Barrier => return None,
            GateKind::ControlledPhase(t) => {
                return Some(ComplexMatrix::from_diagonal(&[ONE, ONE, ONE, cis(*t)]))
            }
            GateKind::ECR => return Some(ecr_matrix()),
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::SX => {
                let p = C64::new(0.5, 0.5);
                let q = C64::new(0.5, -0.5);
                [[p, q], [q, p]]
            }
            GateKind::ID => [[ONE, ZERO], [ZERO, ONE]],
            GateKind::RZ(t) => [[cis(-t / 2.0), ZERO], [ZERO, cis(t / 2.0)]],
            GateKind::Phase(t) => [[ONE, ZERO], [ZERO, cis(*t)]],
            GateKind::U3 { theta, phi, lambda } => u3_matrix(*theta, *phi, *lambda),
            GateKind::Unitary2x2(m) => *m,
        };
        Some(ComplexMatrix::from_mat2(&m))
    }

    /// The inverse gate, kept within the logical gate set.
    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::RZ(t) => GateKind::RZ(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::ControlledPhase(t) => GateKind::ControlledPhase(-t),
            GateKind::U3 { theta, phi, lambda } => GateKind::U3 { theta: -theta, phi: -lambda, lambda: -phi },
            GateKind::SX => GateKind::Unitary2x2(mat2_dagger(&self.matrix().unwrap().to_mat2())),
            GateKind::Unitary2x2(m) => GateKind::Unitary2x2(mat2_dagger(&m)),
            k => k,
        }
    }
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    [
        [C64::new(c, 0.0), -cis(lambda / 2.0) * s],
        [cis(phi / 2.0) * s, cis((lambda + phi) / 2.0) * c],
    ]
}

/// `(I⊗X − X⊗Y)/√2`.
pub fn ecr_matrix() -> ComplexMatrix {
    let r = FRAC_1_SQRT_2;
    let z = ZERO;
    let o = C64::new(r, 0.0);
    let i = I * r;
    ComplexMatrix::from_rows(&[
        vec![z, o, z, i],
        vec![o, z, -i, z],
        vec![z, i, z, o],
        vec![-i, z, o, z],
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self, CircuitError> {
        if let Some(n) = kind.arity() {
            if qubits.len() != n {
                return Err(CircuitError::Arity { kind: kind.name(), expected: n, got: qubits.len() });
            }
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit(*q));
            }
        }
        if let GateKind::Unitary2x2(m) = &kind {
            let d = ComplexMatrix::from_mat2(m).unitarity_defect();
            if d > 1e-12 {
                return Err(CircuitError::NonUnitaryPayload(d));
            }
        }
        Ok(Gate { kind, qubits })
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, vec![q]).expect("one-qubit gate")
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Gate::new(kind, vec![a, b]).expect("two-qubit gate")
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self.kind, GateKind::Barrier)
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), qubits: self.qubits.clone() }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_gate(f, self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    width: usize,
    name: String,
    gates: Vec<Gate>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(width: usize, name: impl Into<String>) -> Self {
        Circuit { width, name: name.into(), gates: Vec::new(), measured: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn set_measured(&mut self, qubits: Vec<usize>) -> Result<(), CircuitError> {
        for &q in &qubits {
            self.check_qubit(q)?;
        }
        self.measured = qubits;
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.width {
            Err(CircuitError::QubitOutOfRange { qubit: q, width: self.width })
        } else {
            Ok(())
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in gate.qubits() {
            self.check_qubit(q)?;
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn add(&mut self, kind: GateKind, qubits: &[usize]) -> Result<(), CircuitError> {
        self.push(Gate::new(kind, qubits.to_vec())?)
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for g in other.gates() {
            self.push(g.clone())?;
        }
        Ok(())
    }

    /// Same circuit with a new gate list; width, name and measurement kept.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Circuit {
        Circuit { gates, ..self.clone() }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            width: self.width,
            name: format!("{}_inv", self.name),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            measured: self.measured.clone(),
        }
    }

    pub fn count_1q(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == Some(1)).count()
    }

    pub fn count_2q(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == Some(2)).count()
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_native())
    }

    pub fn depth(&self) -> usize {
        depth_report(self).depth
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthReport {
    pub depth: usize,
    pub counts_1q: usize,
    pub counts_2q: usize,
    /// Gate indices per layer, in circuit order.
    pub per_layer: Vec<Vec<usize>>,
}

/// Greedy as-soon-as-possible layering. A barrier lifts all of its qubits to
/// the latest layer among them (all qubits when the list is empty) and is not
/// counted.
pub fn depth_report(c: &Circuit) -> DepthReport {
    let mut level = vec![0usize; c.width()];
    let mut per_layer: Vec<Vec<usize>> = Vec::new();
    for (idx, g) in c.gates().iter().enumerate() {
        if g.is_barrier() {
            let qs: Vec<usize> = if g.qubits().is_empty() {
                (0..c.width()).collect()
            } else {
                g.qubits().to_vec()
            };
            let top = qs.iter().map(|&q| level[q]).max().unwrap_or(0);
            for q in qs {
                level[q] = top;
            }
            continue;
        }
        let layer = g.qubits().iter().map(|&q| level[q]).max().unwrap_or(0);
        for &q in g.qubits() {
            level[q] = layer + 1;
        }
        if per_layer.len() <= layer {
            per_layer.resize(layer + 1, Vec::new());
        }
        per_layer[layer].push(idx);
    }
    DepthReport {
        depth: per_layer.len(),
        counts_1q: c.count_1q(),
        counts_2q: c.count_2q(),
        per_layer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_aligned_distance;

    #[test]
    fn ecr_is_hermitian_unitary() {
        let e = ecr_matrix();
        assert!(e.is_unitary(1e-14));
        assert!(e.frobenius_distance(&e.dagger()) < 1e-15);
    }

    #[test]
    fn ecr_matches_pauli_form() {
        let x = GateKind::X.matrix().unwrap();
        let y = ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]);
        let id = ComplexMatrix::identity(2);
        let want = id.kron(&x).sub(&x.kron(&y)).scale(C64::new(FRAC_1_SQRT_2, 0.0));
        assert!(ecr_matrix().frobenius_distance(&want) < 1e-15);
    }

    #[test]
    fn sx_squares_to_x() {
        let sx = GateKind::SX.matrix().unwrap();
        assert!(sx.matmul(&sx).frobenius_distance(&GateKind::X.matrix().unwrap()) < 1e-15);
    }

    #[test]
    fn inverses_compose_to_identity() {
        let kinds = [
            GateKind::SX,
            GateKind::RZ(0.7),
            GateKind::Phase(-1.3),
            GateKind::U3 { theta: 0.4, phi: 1.1, lambda: -2.0 },
            GateKind::ControlledPhase(8.0 * std::f64::consts::PI / 3.0),
            GateKind::ECR,
            GateKind::H,
        ];
        for k in kinds {
            let m = k.matrix().unwrap();
            let inv = k.inverse().matrix().unwrap();
            let id = ComplexMatrix::identity(m.rows());
            assert!(m.matmul(&inv).frobenius_distance(&id) < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn gate_validation() {
        assert!(matches!(
            Gate::new(GateKind::ECR, vec![0]),
            Err(CircuitError::Arity { expected: 2, got: 1, .. })
        ));
        assert_eq!(
            Gate::new(GateKind::ControlledPhase(1.0), vec![1, 1]),
            Err(CircuitError::RepeatedQubit(1))
        );
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(
            Gate::new(GateKind::Unitary2x2(bad), vec![0]),
            Err(CircuitError::NonUnitaryPayload(_))
        ));
        let mut c = Circuit::new(2, "c");
        assert!(c.add(GateKind::H, &[2]).is_err());
    }

    #[test]
    fn depth_of_single_gate_and_barrier() {
        let mut c = Circuit::new(2, "c");
        c.add(GateKind::H, &[0]).unwrap();
        assert_eq!(depth_report(&c).depth, 1);
        c.add(GateKind::Barrier, &[]).unwrap();
        c.add(GateKind::H, &[1]).unwrap();
        let r = depth_report(&c);
        assert_eq!(r.depth, 2);
        assert_eq!(r.counts_1q, 2);
        assert_eq!(r.per_layer, vec![vec![0], vec![2]]);
    }

    #[test]
    fn parallel_gates_share_a_layer() {
        let mut c = Circuit::new(3, "c");
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::H, &[1]).unwrap();
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        c.add(GateKind::X, &[2]).unwrap();
        let r = depth_report(&c);
        assert_eq!(r.depth, 2);
        assert_eq!(r.per_layer[0], vec![0, 1, 3]);
        assert_eq!(r.counts_2q, 1);
    }

    #[test]
    fn u3_inverse_is_u3() {
        let g = GateKind::U3 { theta: 1.0, phi: 0.3, lambda: 2.2 };
        assert!(matches!(g.inverse(), GateKind::U3 { .. }));
        let m = g.matrix().unwrap();
        assert!(phase_aligned_distance(&m.dagger(), &g.inverse().matrix().unwrap()) < 1e-15);
    }
}
