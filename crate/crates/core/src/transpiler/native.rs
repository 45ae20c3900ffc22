//! Lowering of logical gates to `{ID, RZ, SX, X, ECR}`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Gate, GateKind};
use crate::error::TranspileError;
use crate::linalg::{wrap_angle, Mat2};

/// Angles closer than this to zero (after wrapping) are dropped.
pub const ANGLE_TOL: f64 = 1e-12;

fn rz(theta: f64, q: usize, out: &mut Vec<Gate>) {
    let a = wrap_angle(theta);
    if a.abs() >= ANGLE_TOL {
        out.push(Gate::one(GateKind::RZ(a), q));
    }
}

/// Euler angles `(θ, φ, λ)` with `m ∝ RZ(φ)·RY(θ)·RZ(λ)` and `θ ∈ [0, π]`.
pub fn zyz_angles(m: &Mat2) -> (f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = det.sqrt();
    let a = m[0][0] / s;
    let b = m[1][0] / s;
    let theta = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > 1e-300 { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > 1e-300 { 2.0 * b.arg() } else { 0.0 };
    (theta, (sum + diff) / 2.0, (sum - diff) / 2.0)
}

/// Shortest `RZ–SX–RZ–SX–RZ` style sequence for an arbitrary 2×2 unitary,
/// in execution order. Uses `m ∝ RZ(φ)·SX·RZ(π−θ)·SX·RZ(λ+π)`, with the
/// shorter forms at `θ ∈ {0, π/2, π}`.
pub fn zsx(m: &Mat2, q: usize) -> Vec<Gate> {
    let (theta, phi, lambda) = zyz_angles(m);
    let mut out = Vec::with_capacity(5);
    if theta.abs() < ANGLE_TOL {
        rz(phi + lambda, q, &mut out);
    } else if (theta - PI).abs() < ANGLE_TOL {
        rz(lambda + PI, q, &mut out);
        out.push(Gate::one(GateKind::X, q));
        rz(phi, q, &mut out);
    } else if (theta - FRAC_PI_2).abs() < ANGLE_TOL {
        rz(lambda - FRAC_PI_2, q, &mut out);
        out.push(Gate::one(GateKind::SX, q));
        rz(phi + FRAC_PI_2, q, &mut out);
    } else {
        rz(lambda + PI, q, &mut out);
        out.push(Gate::one(GateKind::SX, q));
        rz(PI - theta, q, &mut out);
        out.push(Gate::one(GateKind::SX, q));
        rz(phi, q, &mut out);
    }
    out
}

/// The generic five-gate form with no shortcuts and every `RZ` kept, even at
/// angle zero. Used where the gate layout must not depend on the angles.
pub fn zsx_full(m: &Mat2, q: usize) -> [Gate; 5] {
    let (theta, phi, lambda) = zyz_angles(m);
    let r = |a: f64| Gate::one(GateKind::RZ(wrap_angle(a)), q);
    [r(lambda + PI), Gate::one(GateKind::SX, q), r(PI - theta), Gate::one(GateKind::SX, q), r(phi)]
}

/// Native sequence for any one-qubit gate. Native inputs pass through with
/// `RZ` angles wrapped into `(−π, π]`.
pub fn decompose_1q(g: &Gate) -> Result<Vec<Gate>, TranspileError> {
    let [q] = g.qubits() else {
        return Err(TranspileError::NotNative(format!("{} is not a one-qubit gate", g.kind().name())));
    };
    let q = *q;
    match *g.kind() {
        GateKind::ID | GateKind::SX | GateKind::X => Ok(vec![g.clone()]),
        GateKind::RZ(t) => {
            let mut out = Vec::new();
            rz(t, q, &mut out);
            Ok(out)
        }
        // P(θ) = e^{iθ/2}·RZ(θ)
        GateKind::Phase(t) => {
            let mut out = Vec::new();
            rz(t, q, &mut out);
            Ok(out)
        }
        ref k => {
            let m = k.matrix().expect("one-qubit gate has a matrix");
            if !m.is_unitary(1e-10) {
                return Err(TranspileError::NonUnitary(m.unitarity_defect()));
            }
            Ok(zsx(&m.to_mat2(), q))
        }
    }
}

/// CX with control `c` and target `t` from one ECR and local Clifford
/// rotations.
pub fn cx(c: usize, t: usize) -> Vec<Gate> {
    let r = |a: f64, q| Gate::one(GateKind::RZ(a), q);
    let sx = |q| Gate::one(GateKind::SX, q);
    vec![
        r(-FRAC_PI_2, c),
        sx(c),
        r(-FRAC_PI_2, c),
        r(FRAC_PI_2, t),
        sx(t),
        Gate::two(GateKind::ECR, c, t),
        r(-FRAC_PI_2, c),
        sx(c),
        r(-FRAC_PI_2, t),
        sx(t),
        r(-FRAC_PI_2, t),
    ]
}

/// `CP(θ) ∝ RZ_c(θ/2)·CX·RZ_t(−θ/2)·CX·RZ_t(θ/2)`; empty for `θ ≡ 0`.
pub fn decompose_cp(theta: f64, control: usize, target: usize) -> Vec<Gate> {
    let th = wrap_angle(theta);
    let mut out = Vec::new();
    if th.abs() < ANGLE_TOL {
        return out;
    }
    rz(th / 2.0, target, &mut out);
    out.extend(cx(control, target));
    rz(-th / 2.0, target, &mut out);
    out.extend(cx(control, target));
    rz(th / 2.0, control, &mut out);
    out
}

/// Per-gate lowering used by every optimization level.
pub fn decompose_gate(g: &Gate) -> Result<Vec<Gate>, TranspileError> {
    match *g.kind() {
        GateKind::Barrier | GateKind::ECR => Ok(vec![g.clone()]),
        GateKind::ControlledPhase(t) => Ok(decompose_cp(t, g.qubits()[0], g.qubits()[1])),
        _ => decompose_1q(g),
    }
}

/// Matrix of a one-qubit gate list in execution order.
pub fn product_1q(gates: &[Gate]) -> Mat2 {
    gates.iter().fold(crate::linalg::MAT2_IDENTITY, |acc, g| {
        let m = g.kind().matrix().expect("one-qubit gate").to_mat2();
        crate::linalg::mat2_mul(&m, &acc)
    })
}

/// `RY(θ)` as a 2×2 payload.
pub fn ry(theta: f64) -> Mat2 {
    crate::circuit::u3_matrix(theta, 0.0, 0.0)
}
