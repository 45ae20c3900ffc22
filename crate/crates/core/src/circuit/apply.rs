use crate::error::CircuitError;
use crate::linalg::{ComplexMatrix, C64, ZERO};

use super::{Circuit, Gate};

pub const MAX_LOWER_WIDTH: usize = 12;

/// Applies a `2^k x 2^k` matrix acting on `qubits` (first = most significant
/// local bit) to a full amplitude vector in place.
pub fn apply_matrix(amps: &mut [C64], m: &ComplexMatrix, qubits: &[usize]) {
    let k = qubits.len();
    let local = 1usize << k;
    debug_assert_eq!(m.rows(), local);
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            (0..k)
                .filter(|&j| l >> (k - 1 - j) & 1 == 1)
                .map(|j| 1usize << qubits[j])
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; local];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// Applies one gate to an amplitude vector; barriers are no-ops.
pub fn apply_gate(amps: &mut [C64], gate: &Gate) {
    if let Some(m) = gate.kind().matrix() {
        apply_matrix(amps, &m, gate.qubits());
    }
}

/// Dense unitary of the circuit, gates multiplied in execution order.
pub fn lower_to_unitary(c: &Circuit) -> Result<ComplexMatrix, CircuitError> {
    if c.width() > MAX_LOWER_WIDTH {
        return Err(CircuitError::TooWide(c.width()));
    }
    let dim = 1usize << c.width();
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|j| {
            let mut v = vec![ZERO; dim];
            v[j] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    let mats: Vec<_> = c.gates().iter().map(|g| g.kind().matrix()).collect();
    for col in cols.iter_mut() {
        for (g, m) in c.gates().iter().zip(&mats) {
            if let Some(m) = m {
                apply_matrix(col, m, g.qubits());
            }
        }
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, j| cols[j][r]))
}
