//! Lowering to the native gate set, optimization levels, scheduling and
//! dynamical decoupling.

pub mod native;
pub mod passes;
pub mod resynth;
pub mod schedule;

pub use native::{decompose_1q, decompose_cp};
pub use schedule::{insert_dd, schedule, DdSequence, Durations, IdleWindow, ScheduledCircuit};

use crate::circuit::{lower_to_unitary, Circuit, DepthReport};
use crate::error::TranspileError;
use crate::linalg::phase_aligned_distance;

/// Largest register the L3 level resynthesizes from its full unitary.
pub const MAX_RESYNTH_WIDTH: usize = 3;

/// Every level must reproduce its input to this distance up to global phase.
pub const SEMANTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptLevel {
    L0,
    L1,
    L3,
}

impl OptLevel {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            0 => Some(OptLevel::L0),
            1 => Some(OptLevel::L1),
            3 => Some(OptLevel::L3),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            OptLevel::L0 => 0,
            OptLevel::L1 => 1,
            OptLevel::L3 => 3,
        }
    }
}

/// Per-gate lowering with no optimization.
pub fn lower_native(c: &Circuit) -> Result<Circuit, TranspileError> {
    let mut out = Vec::with_capacity(3 * c.len());
    for g in c.gates() {
        out.extend(native::decompose_gate(g)?);
    }
    Ok(c.with_gates(out))
}

fn cost(c: &Circuit) -> (usize, usize) {
    (c.depth(), c.len())
}

/// Lowers `c` to native gates at the given level.
///
/// L3 on registers of at most three qubits discards the gate list and
/// resynthesizes the circuit unitary into a fixed layout: 3 ECRs per
/// two-qubit block, full multiplexor ladders, and one five-gate block per
/// one-qubit gap. Its size depends only on the width. Wider registers get diagonal coalescing on top
/// of L1, kept only when it does not make the result worse.
pub fn transpile(c: &Circuit, level: OptLevel) -> Result<Circuit, TranspileError> {
    let out = match level {
        OptLevel::L0 => lower_native(c)?,
        OptLevel::L1 => passes::optimize_1(&lower_native(c)?),
        OptLevel::L3 if c.width() <= MAX_RESYNTH_WIDTH => {
            let u = lower_to_unitary(c)?;
            let gates = resynth::resynthesize(&u)?;
            passes::normalize_1q_runs(&c.with_gates(gates))
        }
        OptLevel::L3 => {
            let plain = passes::optimize_1(&lower_native(c)?);
            let merged = passes::optimize_1(&lower_native(&passes::coalesce_diagonals(c))?);
            if cost(&merged) <= cost(&plain) {
                merged
            } else {
                plain
            }
        }
    };
    if c.width() <= crate::circuit::MAX_LOWER_WIDTH.min(10) {
        let d = phase_aligned_distance(&lower_to_unitary(&out)?, &lower_to_unitary(c)?);
        if d > SEMANTIC_TOL {
            return Err(TranspileError::Resynthesis(d));
        }
    }
    Ok(out)
}

/// Depth and gate counts of a transpiled circuit.
pub fn native_report(c: &Circuit, level: OptLevel) -> Result<DepthReport, TranspileError> {
    Ok(crate::circuit::depth_report(&transpile(c, level)?))
}
