//! Gate timing, idle windows and XY4 dynamical decoupling.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::TranspileError;

/// Gate durations in arbitrary time units. Z rotations (`RZ`, `P`) are
/// frame changes and take no time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Durations {
    pub one_qubit: f64,
    pub two_qubit: f64,
    pub id: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Durations { one_qubit: 1.0, two_qubit: 10.0, id: 1.0 }
    }
}

impl Durations {
    pub fn of(&self, g: &Gate) -> f64 {
        match g.kind() {
            GateKind::RZ(_) | GateKind::Phase(_) | GateKind::Barrier => 0.0,
            GateKind::ID => self.id,
            k if k.arity() == Some(2) => self.two_qubit,
            _ => self.one_qubit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleWindow {
    pub qubit: usize,
    pub start: f64,
    pub end: f64,
    /// Index of the gate whose start closes the window.
    pub closed_by: usize,
}

impl IdleWindow {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledCircuit {
    pub circuit: Circuit,
    pub start_times: Vec<f64>,
    pub durations: Vec<f64>,
    pub idle_windows: Vec<IdleWindow>,
}

impl ScheduledCircuit {
    /// Wraps explicit timings, recomputing the idle windows.
    pub fn from_times(circuit: Circuit, start_times: Vec<f64>, durations: Vec<f64>) -> Self {
        let idle_windows = idle_windows(&circuit, &start_times, &durations);
        ScheduledCircuit { circuit, start_times, durations, idle_windows }
    }

    pub fn makespan(&self) -> f64 {
        self.start_times
            .iter()
            .zip(&self.durations)
            .map(|(s, d)| s + d)
            .fold(0.0, f64::max)
    }

    pub fn end_time(&self, idx: usize) -> f64 {
        self.start_times[idx] + self.durations[idx]
    }
}

/// As-soon-as-possible start times for any circuit.
pub fn asap_times(c: &Circuit, dur: &Durations) -> (Vec<f64>, Vec<f64>) {
    let mut free = vec![0.0f64; c.width()];
    let mut starts = Vec::with_capacity(c.len());
    let mut durs = Vec::with_capacity(c.len());
    for g in c.gates() {
        let qs: Vec<usize> = if g.is_barrier() && g.qubits().is_empty() {
            (0..c.width()).collect()
        } else {
            g.qubits().to_vec()
        };
        let s = qs.iter().map(|&q| free[q]).fold(0.0, f64::max);
        let d = dur.of(g);
        for q in qs {
            free[q] = s + d;
        }
        starts.push(s);
        durs.push(d);
    }
    (starts, durs)
}

/// Gaps between consecutive gates on each qubit. Time before a qubit's first
/// gate and after its last gate is not idle. Barriers do not delimit windows.
pub fn idle_windows(c: &Circuit, starts: &[f64], durs: &[f64]) -> Vec<IdleWindow> {
    const EPS: f64 = 1e-12;
    let mut last_end: Vec<Option<f64>> = vec![None; c.width()];
    let mut out = Vec::new();
    for (i, g) in c.gates().iter().enumerate() {
        if g.is_barrier() {
            continue;
        }
        for &q in g.qubits() {
            if let Some(e) = last_end[q] {
                if starts[i] - e > EPS {
                    out.push(IdleWindow { qubit: q, start: e, end: starts[i], closed_by: i });
                }
            }
            last_end[q] = Some(starts[i] + durs[i]);
        }
    }
    out
}

/// ASAP schedule of a native circuit.
pub fn schedule(c: &Circuit, dur: &Durations) -> Result<ScheduledCircuit, TranspileError> {
    if let Some(g) = c.gates().iter().find(|g| !g.kind().is_native()) {
        return Err(TranspileError::NotNative(g.kind().name().to_string()));
    }
    let (s, d) = asap_times(c, dur);
    Ok(ScheduledCircuit::from_times(c.clone(), s, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdSequence {
    Xy4,
}

/// Native realization of a Y pulse, `RZ(−π/2)·X·RZ(π/2)` in execution order.
fn y_pulse(q: usize) -> [Gate; 3] {
    use std::f64::consts::FRAC_PI_2;
    [
        Gate::one(GateKind::RZ(-FRAC_PI_2), q),
        Gate::one(GateKind::X, q),
        Gate::one(GateKind::RZ(FRAC_PI_2), q),
    ]
}

/// Fills every idle window of length `>= min_window` with
/// `Y δ X δ Y δ X δ`, `δ = (L − 4·d)/4`, `d` the one-qubit pulse time.
pub fn insert_dd(
    sc: &ScheduledCircuit,
    seq: DdSequence,
    min_window: f64,
    dur: &Durations,
) -> Result<ScheduledCircuit, TranspileError> {
    let DdSequence::Xy4 = seq;
    let d = dur.one_qubit;
    if min_window < 4.0 * d {
        return Err(TranspileError::WindowTooShort { min_window, needed: 4.0 * d });
    }
    let mut before: Vec<Vec<(Gate, f64, f64)>> = vec![Vec::new(); sc.circuit.len()];
    for w in &sc.idle_windows {
        let len = w.len();
        if len + 1e-12 < min_window {
            continue;
        }
        let delta = ((len - 4.0 * d) / 4.0).max(0.0);
        let block = &mut before[w.closed_by];
        for k in 0..4 {
            let t0 = w.start + k as f64 * (d + delta);
            if k % 2 == 0 {
                let [a, x, b] = y_pulse(w.qubit);
                block.push((a, t0, 0.0));
                block.push((x, t0, d));
                block.push((b, t0 + d, 0.0));
            } else {
                block.push((Gate::one(GateKind::X, w.qubit), t0, d));
            }
        }
    }
    let mut gates = Vec::new();
    let mut starts = Vec::new();
    let mut durs = Vec::new();
    for (i, g) in sc.circuit.gates().iter().enumerate() {
        for (pg, s, dd) in before[i].drain(..) {
            gates.push(pg);
            starts.push(s);
            durs.push(dd);
        }
        gates.push(g.clone());
        starts.push(sc.start_times[i]);
        durs.push(sc.durations[i]);
    }
    Ok(ScheduledCircuit::from_times(sc.circuit.with_gates(gates), starts, durs))
}
