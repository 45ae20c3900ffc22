//! Fourier-basis walk circuits.
//!
//! The shift is diagonal in the Fourier basis, so a whole walk is one QFT on
//! the position register, a run of coin gates and phase gates, and one
//! inverse QFT. The QFT circuits are swapless: output bits come out in
//! reversed order, and the phase gates are placed to match.

use std::f64::consts::{PI, TAU};

use crate::error::CircuitError;
use crate::linalg::{cis, ComplexMatrix, C64, ONE};
use crate::synth::{fit_with_restarts, matrix_residual, Fit, LmOptions};
use crate::walk::CoinSchedule;

use super::{lower_to_unitary, Circuit, Gate, GateKind};

/// Bit-reversal of the low `bits` bits of `k`.
pub fn bit_reverse(k: usize, bits: usize) -> usize {
    (0..bits).fold(0, |acc, i| acc | ((k >> i) & 1) << (bits - 1 - i))
}

/// Swapless QFT on qubits `0..n`. Its unitary `U` satisfies
/// `U[bitrev(k), j] = ω^{jk}/√N`, `ω = e^{2πi/N}`.
pub fn build_qft_even(n_qubits: usize) -> Circuit {
    let mut c = Circuit::new(n_qubits, format!("qft{n_qubits}"));
    for j in (0..n_qubits).rev() {
        c.add(GateKind::H, &[j]).unwrap();
        for k in (0..j).rev() {
            let theta = PI / (1u32 << (j - k)) as f64;
            c.add(GateKind::ControlledPhase(theta), &[k, j]).unwrap();
        }
    }
    c
}

/// Parameters of the modified 3-point Fourier circuit: four layers of U3
/// pairs `(q0, q1)` separated by three CZ gates. Solved with
/// [`solve_modified_qft`] (seed 0) and frozen. Each row of three is one U3
/// `(θ, φ, λ)`, ordered layer by layer, `q0` before `q1`.
pub const MODIFIED_QFT_PARAMS: [f64; 24] = [
    3.9044589400517826, -1.6244996815668697, -4.007137851271518,
    -1.6593114297204856, 2.8808273316101833, 0.7319034372785103,
    2.3108818140151643, 4.139576634991394, 0.4983435587961452,
    -2.2736452253078157, 4.710492635247532, 2.1987168147485177,
    0.18226089607746912, -2.88482207692035, 3.0658788447879846,
    1.8723422710220112, -1.4424004617484323, 1.883727428786599,
    1.00371446493256, 1.8047479197066776, 0.15804381790400807,
    1.6558269035501876, 3.078518739664752, 2.0868425027287287,
];

/// `Q̃` rows permuted by bit reversal, the target of the modified QFT.
pub fn modified_qft_target() -> ComplexMatrix {
    let w = TAU / 3.0;
    let s = 1.0 / 3f64.sqrt();
    ComplexMatrix::from_fn(4, 4, |r, j| {
        let k = bit_reverse(r, 2);
        match (k, j) {
            (3, 3) => ONE,
            (3, _) | (_, 3) => C64::new(0.0, 0.0),
            _ => cis(w * (j * k) as f64) * s,
        }
    })
}

/// Modified-QFT template on a width-2 register.
pub fn modified_qft_template(p: &[f64]) -> Circuit {
    assert_eq!(p.len(), 24);
    let mut c = Circuit::new(2, "qft3");
    for layer in 0..4 {
        for q in 0..2 {
            let o = 6 * layer + 3 * q;
            c.add(GateKind::U3 { theta: p[o], phi: p[o + 1], lambda: p[o + 2] }, &[q]).unwrap();
        }
        if layer < 3 {
            c.add(GateKind::ControlledPhase(PI), &[0, 1]).unwrap();
        }
    }
    c
}

/// Fits [`modified_qft_template`] to [`modified_qft_target`] exactly (no
/// global-phase freedom).
pub fn solve_modified_qft(seed: u64) -> Fit {
    let target = modified_qft_target();
    let f = |p: &[f64]| matrix_residual(&lower_to_unitary(&modified_qft_template(p)).unwrap(), &target);
    fit_with_restarts(&f, 24, &LmOptions { seed, target: 1e-14, ..LmOptions::default() })
}

/// The modified QFT built from the frozen parameters.
pub fn build_qft_3cycle() -> Result<Circuit, CircuitError> {
    let c = modified_qft_template(&MODIFIED_QFT_PARAMS);
    let res = lower_to_unitary(&c)?.frobenius_distance(&modified_qft_target());
    if res > 1e-9 {
        return Err(CircuitError::Synthesis(res));
    }
    Ok(c)
}

fn coin_gate(schedule: &CoinSchedule, step: usize, coin_qubit: usize) -> Gate {
    Gate::one(GateKind::Unitary2x2(schedule.coin_at(step).matrix()), coin_qubit)
}

fn assemble(
    name: String,
    n_pos: usize,
    qft: &Circuit,
    schedule: &CoinSchedule,
    t: usize,
    step_phases: &[Gate],
) -> Result<Circuit, CircuitError> {
    let coin = n_pos;
    let mut c = Circuit::new(n_pos + 1, name);
    c.extend(qft)?;
    for step in 0..t {
        c.push(coin_gate(schedule, step, coin))?;
        for g in step_phases {
            c.push(g.clone())?;
        }
    }
    c.extend(&qft.inverse())?;
    c.set_measured((0..n_pos).collect())?;
    Ok(c)
}

/// Walk on a `2^n`-cycle (`n <= 3`): position on `q0..q(n-1)`, coin on `qn`.
///
/// Per step the coin gate is followed, for each bit `b`, by `P(−2π·2^b/N)`
/// on `q(n-1-b)` and `CP(4π·2^b/N)` from the coin, dropping the
/// controlled phases that are multiples of 2π.
pub fn build_walk_circuit_even(n_pos: usize, schedule: &CoinSchedule, t: usize) -> Result<Circuit, CircuitError> {
    if !(2..=3).contains(&n_pos) {
        return Err(CircuitError::UnsupportedCycle(1 << n_pos));
    }
    let big_n = (1usize << n_pos) as f64;
    let mut phases = Vec::new();
    for b in 0..n_pos {
        phases.push(Gate::one(GateKind::Phase(-TAU * (1u32 << b) as f64 / big_n), n_pos - 1 - b));
    }
    for b in 0..n_pos {
        let theta = 2.0 * TAU * (1u32 << b) as f64 / big_n;
        if (theta / TAU).fract().abs() > 1e-12 {
            phases.push(Gate::two(GateKind::ControlledPhase(theta), n_pos, n_pos - 1 - b));
        }
    }
    assemble(format!("walk{}_t{t}", 1 << n_pos), n_pos, &build_qft_even(n_pos), schedule, t, &phases)
}

pub fn build_walk_circuit_4cycle(schedule: &CoinSchedule, t: usize) -> Result<Circuit, CircuitError> {
    build_walk_circuit_even(2, schedule, t)
}

/// Walk on the 3-cycle in the padded 4-node space; node 3 never moves.
pub fn build_walk_circuit_3cycle(schedule: &CoinSchedule, t: usize) -> Result<Circuit, CircuitError> {
    let phases = [
        Gate::one(GateKind::Phase(-4.0 * PI / 3.0), 0),
        Gate::one(GateKind::Phase(-2.0 * PI / 3.0), 1),
        Gate::two(GateKind::ControlledPhase(4.0 * PI / 3.0), 2, 1),
        Gate::two(GateKind::ControlledPhase(8.0 * PI / 3.0), 2, 0),
    ];
    assemble(format!("walk3_t{t}"), 2, &build_qft_3cycle()?, schedule, t, &phases)
}

/// Dispatches on cycle size: 3, 4 or 8.
pub fn build_walk_circuit(cycle: usize, schedule: &CoinSchedule, t: usize) -> Result<Circuit, CircuitError> {
    match cycle {
        3 => build_walk_circuit_3cycle(schedule, t),
        4 => build_walk_circuit_even(2, schedule, t),
        8 => build_walk_circuit_even(3, schedule, t),
        n => Err(CircuitError::UnsupportedCycle(n)),
    }
}

/// Number of position qubits in the circuit for `cycle`.
pub fn position_qubits(cycle: usize) -> Result<usize, CircuitError> {
    match cycle {
        3 | 4 => Ok(2),
        8 => Ok(3),
        n => Err(CircuitError::UnsupportedCycle(n)),
    }
}
