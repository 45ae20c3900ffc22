//! Circuit-to-circuit optimization passes.

use std::collections::BTreeMap;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::linalg::wrap_angle;

use super::native::{product_1q, zsx, zsx_full, ANGLE_TOL};

fn touched(g: &Gate, width: usize) -> Vec<usize> {
    if g.is_barrier() && g.qubits().is_empty() {
        (0..width).collect()
    } else {
        g.qubits().to_vec()
    }
}

/// Replaces each maximal run of one-qubit gates on a qubit by its shortest
/// native form. A run is kept as is unless resynthesis makes it shorter.
pub fn fuse_1q(c: &Circuit) -> Circuit {
    let mut runs: Vec<Vec<Gate>> = vec![Vec::new(); c.width()];
    let mut out = Vec::with_capacity(c.len());
    let flush = |run: &mut Vec<Gate>, q: usize, out: &mut Vec<Gate>| {
        if run.is_empty() {
            return;
        }
        let synth = zsx(&product_1q(run), q);
        if synth.len() < run.len() {
            out.extend(synth);
        } else {
            out.append(run);
        }
        run.clear();
    };
    for g in c.gates() {
        if g.kind().arity() == Some(1) {
            runs[g.qubits()[0]].push(g.clone());
            continue;
        }
        for q in touched(g, c.width()) {
            flush(&mut runs[q], q, &mut out);
        }
        out.push(g.clone());
    }
    for (q, run) in runs.iter_mut().enumerate() {
        flush(run, q, &mut out);
    }
    c.with_gates(out)
}

/// Rewrites every one-qubit gap (before, between and after a qubit's
/// multi-qubit gates) as exactly one [`zsx_full`] block, so the layout is a
/// function of the multi-qubit skeleton alone.
pub fn normalize_1q_runs(c: &Circuit) -> Circuit {
    let mut runs: Vec<Vec<Gate>> = vec![Vec::new(); c.width()];
    let mut out = Vec::with_capacity(c.len());
    for g in c.gates() {
        if g.kind().arity() == Some(1) {
            runs[g.qubits()[0]].push(g.clone());
            continue;
        }
        for q in touched(g, c.width()) {
            out.extend(zsx_full(&product_1q(&runs[q]), q));
            runs[q].clear();
        }
        out.push(g.clone());
    }
    for (q, run) in runs.iter().enumerate() {
        out.extend(zsx_full(&product_1q(run), q));
    }
    c.with_gates(out)
}

/// Removes back-to-back `ECR` pairs on the same ordered qubit pair.
pub fn cancel_ecr_pairs(c: &Circuit) -> Circuit {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(c.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); c.width()];
    for g in c.gates() {
        if let (GateKind::ECR, [a, b]) = (g.kind(), g.qubits()) {
            let (a, b) = (*a, *b);
            if let (Some(&i), Some(&j)) = (stacks[a].last(), stacks[b].last()) {
                if i == j && out[i].as_ref().is_some_and(|p| p == g) {
                    out[i] = None;
                    stacks[a].pop();
                    stacks[b].pop();
                    continue;
                }
            }
        }
        let idx = out.len();
        for q in touched(g, c.width()) {
            stacks[q].push(idx);
        }
        out.push(Some(g.clone()));
    }
    c.with_gates(out.into_iter().flatten().collect())
}

/// Fusion and cancellation repeated until nothing changes.
pub fn optimize_1(c: &Circuit) -> Circuit {
    let mut cur = c.clone();
    for _ in 0..32 {
        let next = cancel_ecr_pairs(&fuse_1q(&cur));
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Merges commuting diagonal gates (`P`, `RZ`, `CP`, `ID`) into at most one
/// phase per qubit and one controlled phase per qubit pair. Pending terms are
/// emitted just before the first non-diagonal gate that touches them.
pub fn coalesce_diagonals(c: &Circuit) -> Circuit {
    let mut single: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pair: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut out = Vec::with_capacity(c.len());

    fn emit(single: &mut BTreeMap<usize, f64>, pair: &mut BTreeMap<(usize, usize), f64>, qs: &[usize], out: &mut Vec<Gate>) {
        let pairs: Vec<(usize, usize)> = pair.keys().filter(|(a, b)| qs.contains(a) || qs.contains(b)).copied().collect();
        for k in pairs {
            let t = wrap_angle(pair.remove(&k).unwrap());
            if t.abs() >= ANGLE_TOL {
                out.push(Gate::two(GateKind::ControlledPhase(t), k.0, k.1));
            }
        }
        for q in qs {
            if let Some(t) = single.remove(q) {
                let t = wrap_angle(t);
                if t.abs() >= ANGLE_TOL {
                    out.push(Gate::one(GateKind::Phase(t), *q));
                }
            }
        }
    }

    for g in c.gates() {
        match (*g.kind(), g.qubits()) {
            (GateKind::ID, _) => {}
            // RZ(θ) = e^{−iθ/2}·P(θ)
            (GateKind::Phase(t) | GateKind::RZ(t), [q]) => *single.entry(*q).or_default() += t,
            (GateKind::ControlledPhase(t), [a, b]) => *pair.entry((*a.min(b), *a.max(b))).or_default() += t,
            _ => {
                let qs = touched(g, c.width());
                emit(&mut single, &mut pair, &qs, &mut out);
                out.push(g.clone());
            }
        }
    }
    let all: Vec<usize> = (0..c.width()).collect();
    emit(&mut single, &mut pair, &all, &mut out);
    c.with_gates(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::lower_to_unitary;
    use crate::linalg::phase_aligned_distance;

    fn same(a: &Circuit, b: &Circuit) -> bool {
        phase_aligned_distance(&lower_to_unitary(a).unwrap(), &lower_to_unitary(b).unwrap()) < 1e-10
    }

    #[test]
    fn rz_runs_merge() {
        let mut c = Circuit::new(1, "r");
        c.add(GateKind::RZ(0.5), &[0]).unwrap();
        c.add(GateKind::RZ(0.25), &[0]).unwrap();
        let f = fuse_1q(&c);
        assert_eq!(f.gates(), &[Gate::one(GateKind::RZ(0.75), 0)]);
        let mut d = Circuit::new(1, "r");
        d.add(GateKind::RZ(0.5), &[0]).unwrap();
        d.add(GateKind::RZ(-0.5), &[0]).unwrap();
        assert!(fuse_1q(&d).is_empty());
    }

    #[test]
    fn x_pairs_vanish() {
        let mut c = Circuit::new(1, "x");
        c.add(GateKind::X, &[0]).unwrap();
        c.add(GateKind::X, &[0]).unwrap();
        assert!(optimize_1(&c).is_empty());
    }

    #[test]
    fn short_runs_are_kept() {
        let mut c = Circuit::new(1, "s");
        c.add(GateKind::SX, &[0]).unwrap();
        assert_eq!(fuse_1q(&c), c);
    }

    #[test]
    fn ecr_pairs_cancel_through_fusion() {
        let mut c = Circuit::new(2, "e");
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        c.add(GateKind::RZ(0.3), &[0]).unwrap();
        c.add(GateKind::RZ(-0.3), &[0]).unwrap();
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        c.add(GateKind::SX, &[1]).unwrap();
        let o = optimize_1(&c);
        assert_eq!(o.gates(), &[Gate::one(GateKind::SX, 1)]);
        assert!(same(&o, &c));
    }

    #[test]
    fn reversed_ecr_does_not_cancel() {
        let mut c = Circuit::new(2, "e");
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        c.add(GateKind::ECR, &[1, 0]).unwrap();
        assert_eq!(cancel_ecr_pairs(&c).len(), 2);
    }

    #[test]
    fn barrier_blocks_cancellation() {
        let mut c = Circuit::new(2, "b");
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        c.add(GateKind::Barrier, &[]).unwrap();
        c.add(GateKind::ECR, &[0, 1]).unwrap();
        assert_eq!(optimize_1(&c).len(), 3);
    }

    #[test]
    fn diagonals_coalesce_across_disjoint_gates() {
        let mut c = Circuit::new(3, "d");
        c.add(GateKind::ControlledPhase(std::f64::consts::PI), &[2, 1]).unwrap();
        c.add(GateKind::Phase(0.4), &[0]).unwrap();
        c.add(GateKind::H, &[2]).unwrap();
        c.add(GateKind::Phase(0.6), &[0]).unwrap();
        c.add(GateKind::ControlledPhase(std::f64::consts::PI), &[1, 0]).unwrap();
        c.add(GateKind::ControlledPhase(std::f64::consts::PI), &[0, 1]).unwrap();
        let d = coalesce_diagonals(&c);
        assert!(same(&c, &d));
        // CP on (1,2), H, P(1.0) on q0; the two CP(π) on (0,1) cancel.
        assert_eq!(d.len(), 3);
    }
}
