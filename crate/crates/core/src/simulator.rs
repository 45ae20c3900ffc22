//! Circuit execution: statevector, shot sampling, and density matrices under
//! gate and idle noise.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{apply_gate, apply_matrix, Circuit};
use crate::distribution::Distribution;
use crate::error::SimError;
use crate::linalg::{min_hermitian_eigenvalue, ComplexMatrix, Mat2, C64, ONE, ZERO};
use crate::transpiler::schedule::{asap_times, Durations, ScheduledCircuit};
use crate::walk::StateVector;

pub const MAX_DENSITY_WIDTH: usize = 6;

pub fn run_exact(c: &Circuit, initial: &StateVector) -> Result<StateVector, SimError> {
    let dim = 1usize << c.width();
    if initial.dim() != dim {
        return Err(SimError::Dimension { expected: dim, got: initial.dim() });
    }
    let mut amps = initial.amplitudes().to_vec();
    for g in c.gates() {
        apply_gate(&mut amps, g);
    }
    Ok(StateVector::from_unitary_image(amps))
}

/// Per-run seed from a master seed and a run index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn width_of(dim: usize) -> usize {
    dim.trailing_zeros() as usize
}

fn check_measured(width: usize, measured: &[usize]) -> Result<(), SimError> {
    match measured.iter().find(|&&q| q >= width) {
        Some(&qubit) => Err(SimError::QubitOutOfRange { qubit, width }),
        None => Ok(()),
    }
}

/// Marginal over `measured` (first listed qubit = bit 0 of the outcome),
/// including zero-probability outcomes.
pub fn marginal(probs: &[f64], measured: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << measured.len()];
    for (idx, p) in probs.iter().enumerate() {
        let k: usize = measured
            .iter()
            .enumerate()
            .map(|(j, &q)| ((idx >> q) & 1) << j)
            .sum();
        out[k] += p;
    }
    out
}

/// Multinomial draw by inverse-CDF lookup.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[k] += 1;
    }
    counts
}

fn to_distribution(marg: Vec<f64>, shots: u64, seed: u64) -> Distribution {
    if shots == 0 {
        let total: f64 = marg.iter().sum();
        return Distribution::raw(
            marg.into_iter().enumerate().map(|(k, p)| (k as u64, p / total)).collect(),
            None,
        );
    }
    let counts = sample_counts(&marg, shots, seed);
    Distribution::from_counts(counts.into_iter().enumerate().map(|(k, c)| (k as u64, c)).collect())
}

/// Measures `measured` qubits; `shots == 0` returns exact probabilities.
pub fn measure_positions(
    state: &StateVector,
    measured: &[usize],
    shots: u64,
    seed: u64,
) -> Result<Distribution, SimError> {
    check_measured(width_of(state.dim()), measured)?;
    let probs: Vec<f64> = state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    Ok(to_distribution(marginal(&probs, measured), shots, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Depolarizing probability after each timed one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    pub t1: f64,
    pub t2: f64,
    pub dur_1q: f64,
    pub dur_2q: f64,
    /// Duration of an explicit `ID` gate.
    pub dur_idle_unit: f64,
    pub readout_flip: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 2e-4,
            p2: 8e-3,
            t1: 300.0,
            t2: 200.0,
            dur_1q: 1.0,
            dur_2q: 10.0,
            dur_idle_unit: 1.0,
            readout_flip: 0.0,
        }
    }
}

impl NoiseModel {
    /// No errors at all; durations keep their defaults.
    pub fn ideal() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0, t1: f64::INFINITY, t2: f64::INFINITY, readout_flip: 0.0, ..Self::default() }
    }

    /// Relaxation during idle windows only.
    pub fn idle_only(t1: f64, t2: f64) -> Self {
        NoiseModel { t1, t2, ..Self::ideal() }
    }

    pub fn durations(&self) -> Durations {
        Durations { one_qubit: self.dur_1q, two_qubit: self.dur_2q, id: self.dur_idle_unit }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Noise(m));
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        for (name, d) in [("dur_1q", self.dur_1q), ("dur_2q", self.dur_2q), ("dur_idle_unit", self.dur_idle_unit)] {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("{name} = {d} must be a finite non-negative time"));
            }
        }
        if self.t1.is_nan() || self.t2.is_nan() || self.t1 <= 0.0 || self.t2 <= 0.0 {
            return bad(format!("t1 = {}, t2 = {} must be positive", self.t1, self.t2));
        }
        if self.t2 > 2.0 * self.t1 {
            return bad(format!("t2 = {} exceeds 2*t1 = {}", self.t2, 2.0 * self.t1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        DensityMatrix { rho: ComplexMatrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj()) }
    }

    pub fn ground(width: usize) -> Self {
        Self::from_pure(&StateVector::basis(1 << width, 0))
    }

    pub fn from_matrix(rho: ComplexMatrix) -> Self {
        DensityMatrix { rho }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn width(&self) -> usize {
        width_of(self.dim())
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.rho.frobenius_distance(&self.rho.dagger())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.rho)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re.max(0.0)).collect()
    }

    /// Reduced state on `keep` (first listed = most significant local bit).
    pub fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let k = keep.len();
        let local = |idx: usize| -> usize {
            keep.iter().enumerate().map(|(j, &q)| ((idx >> q) & 1) << (k - 1 - j)).sum()
        };
        let mask: usize = keep.iter().map(|&q| 1usize << q).sum();
        let mut out = ComplexMatrix::zeros(1 << k, 1 << k);
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if r & !mask == c & !mask {
                    out[(local(r), local(c))] += self.rho[(r, c)];
                }
            }
        }
        DensityMatrix { rho: out }
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.rho.sub(&other.rho);
        let eig = nalgebra::SymmetricEigen::new(diff.to_nalgebra());
        0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
    }

    /// `ρ → U ρ U†` for a gate matrix on `qubits`.
    pub fn apply_unitary(&mut self, m: &ComplexMatrix, qubits: &[usize]) {
        let n = self.dim();
        let mut cols: Vec<Vec<C64>> = (0..n).map(|c| (0..n).map(|r| self.rho[(r, c)]).collect()).collect();
        for col in cols.iter_mut() {
            apply_matrix(col, m, qubits);
        }
        // cols now holds U ρ column-wise; apply U again to the conjugated rows.
        let mut rows: Vec<Vec<C64>> = (0..n).map(|r| (0..n).map(|c| cols[c][r].conj()).collect()).collect();
        for row in rows.iter_mut() {
            apply_matrix(row, m, qubits);
        }
        self.rho = ComplexMatrix::from_fn(n, n, |r, c| rows[r][c].conj());
    }

    /// `ρ → (1 − p) ρ + p · Tr_Q(ρ) ⊗ I/2^k` on the qubits `Q`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.dim();
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        let k = qubits.len();
        let subs: Vec<usize> = (0..1usize << k)
            .map(|l| (0..k).filter(|&j| l >> j & 1 == 1).map(|j| 1usize << qubits[j]).sum())
            .collect();
        let mut out = self.rho.scale(C64::new(1.0 - p, 0.0));
        let w = p / (1usize << k) as f64;
        for r in 0..n {
            for c in 0..n {
                if r & mask != c & mask {
                    continue;
                }
                let (ro, co) = (r & !mask, c & !mask);
                let tr: C64 = subs.iter().map(|s| self.rho[(ro | s, co | s)]).sum();
                out[(r, c)] += tr * w;
            }
        }
        self.rho = out;
    }

    /// `ρ → Σ K ρ K†` for one-qubit Kraus operators on `q`.
    pub fn apply_kraus_1q(&mut self, kraus: &[Mat2], q: usize) {
        let mut acc = ComplexMatrix::zeros(self.dim(), self.dim());
        for k in kraus {
            let mut part = self.clone();
            part.apply_unitary(&ComplexMatrix::from_mat2(k), &[q]);
            acc = acc.add(&part.rho);
        }
        self.rho = acc;
    }

    /// Amplitude damping then pure dephasing for an idle time `tau`.
    pub fn relax(&mut self, q: usize, tau: f64, t1: f64, t2: f64) {
        if tau <= 0.0 {
            return;
        }
        let e1 = (-tau / t1).exp();
        let e2 = (-tau / t2).exp();
        let gamma = 1.0 - e1;
        // Coherence left by amplitude damping is e^{-τ/2T1}; dephasing
        // supplies the rest of e^{-τ/T2}.
        let lambda = (1.0 - (e2 / e1.sqrt()).powi(2)).clamp(0.0, 1.0);
        let r = |x: f64| C64::new(x, 0.0);
        if gamma > 0.0 {
            self.apply_kraus_1q(
                &[[[ONE, ZERO], [ZERO, r((1.0 - gamma).sqrt())]], [[ZERO, r(gamma.sqrt())], [ZERO, ZERO]]],
                q,
            );
        }
        if lambda > 0.0 {
            self.apply_kraus_1q(
                &[[[ONE, ZERO], [ZERO, r((1.0 - lambda).sqrt())]], [[ZERO, ZERO], [ZERO, r(lambda.sqrt())]]],
                q,
            );
        }
    }
}

/// Schedules `c` as soon as possible with the model's durations and runs it.
pub fn run_noisy(c: &Circuit, initial: &DensityMatrix, nm: &NoiseModel) -> Result<DensityMatrix, SimError> {
    let (starts, durs) = asap_times(c, &nm.durations());
    run_noisy_scheduled(&ScheduledCircuit::from_times(c.clone(), starts, durs), initial, nm)
}

/// Runs a circuit with explicit timing. Before each gate, every operand
/// qubit relaxes through the idle window that the gate closes; after each
/// timed gate the operands are depolarized with `p1` or `p2`. Zero-duration
/// frame changes are noiseless.
pub fn run_noisy_scheduled(
    sc: &ScheduledCircuit,
    initial: &DensityMatrix,
    nm: &NoiseModel,
) -> Result<DensityMatrix, SimError> {
    nm.validate()?;
    let c = &sc.circuit;
    if c.width() > MAX_DENSITY_WIDTH {
        return Err(SimError::TooWide(c.width()));
    }
    if initial.dim() != 1 << c.width() {
        return Err(SimError::Dimension { expected: 1 << c.width(), got: initial.dim() });
    }
    let mut windows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); c.len()];
    for w in &sc.idle_windows {
        windows[w.closed_by].push((w.qubit, w.len()));
    }
    let mut rho = initial.clone();
    for (i, g) in c.gates().iter().enumerate() {
        for &(q, tau) in &windows[i] {
            rho.relax(q, tau, nm.t1, nm.t2);
        }
        let Some(m) = g.kind().matrix() else { continue };
        rho.apply_unitary(&m, g.qubits());
        if sc.durations[i] > 0.0 {
            let p = if g.qubits().len() == 2 { nm.p2 } else { nm.p1 };
            rho.depolarize(g.qubits(), p);
        }
    }
    Ok(rho)
}

/// Diagonal marginal over `measured` with independent readout bit flips.
pub fn readout_distribution(
    rho: &DensityMatrix,
    measured: &[usize],
    nm: &NoiseModel,
) -> Result<Distribution, SimError> {
    check_measured(rho.width(), measured)?;
    let marg = marginal(&rho.probabilities(), measured);
    let f = nm.readout_flip;
    let k = measured.len();
    let mut out = vec![0.0; marg.len()];
    for (x, px) in marg.iter().enumerate() {
        for (y, o) in out.iter_mut().enumerate() {
            let flips = ((x ^ y) as u64).count_ones() as i32;
            *o += px * f.powi(flips) * (1.0 - f).powi(k as i32 - flips);
        }
    }
    let total: f64 = out.iter().sum();
    Ok(Distribution::raw(
        out.into_iter().enumerate().map(|(k, p)| (k as u64, p / total)).collect::<BTreeMap<_, _>>(),
        None,
    ))
}

/// Samples `shots` outcomes from an exact distribution.
pub fn sample_distribution(d: &Distribution, shots: u64, seed: u64) -> Distribution {
    let n = d.values().keys().max().map_or(0, |&k| k as usize + 1);
    let probs: Vec<f64> = (0..n).map(|k| d.get(k as u64)).collect();
    to_distribution(probs, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{lower_to_unitary, GateKind};

    fn bell() -> Circuit {
        let mut c = Circuit::new(2, "bell");
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::ControlledPhase(0.7), &[0, 1]).unwrap();
        c.add(GateKind::SX, &[1]).unwrap();
        c.add(GateKind::ECR, &[1, 0]).unwrap();
        c
    }

    #[test]
    fn exact_run_matches_lowering() {
        let c = bell();
        let s0 = StateVector::basis(4, 0);
        let s = run_exact(&c, &s0).unwrap();
        let want = lower_to_unitary(&c).unwrap().matvec(s0.amplitudes());
        for (a, b) in s.amplitudes().iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(run_exact(&c, &StateVector::basis(8, 0)).is_err());
        assert_eq!(run_exact(&Circuit::new(2, "e"), &s0).unwrap(), s0);
    }

    #[test]
    fn deterministic_and_uniform_sampling() {
        let s0 = StateVector::basis(8, 0);
        let d = measure_positions(&s0, &[0, 1], 1000, 3).unwrap();
        assert_eq!(d.get(0), 1000.0);
        let mut c = Circuit::new(1, "h");
        c.add(GateKind::H, &[0]).unwrap();
        let s = run_exact(&c, &StateVector::basis(2, 0)).unwrap();
        let d = measure_positions(&s, &[0], 100_000, 11).unwrap();
        let sigma = (100_000.0f64 * 0.25).sqrt();
        assert!((d.get(0) - 50_000.0).abs() < 5.0 * sigma);
        assert_eq!(d, measure_positions(&s, &[0], 100_000, 11).unwrap());
        assert_ne!(d, measure_positions(&s, &[0], 100_000, 12).unwrap());
        let e = measure_positions(&s, &[0], 0, 0).unwrap();
        assert!(e.shots().is_none());
        assert!((e.get(1) - 0.5).abs() < 1e-15);
        assert!(measure_positions(&s, &[3], 10, 0).is_err());
    }

    #[test]
    fn marginal_bit_order() {
        // |q2 q1 q0> = |011> gives outcome 3 for measure [0, 1] and 1 for [1, 2].
        let mut p = vec![0.0; 8];
        p[3] = 1.0;
        assert_eq!(marginal(&p, &[0, 1])[3], 1.0);
        assert_eq!(marginal(&p, &[1, 2])[1], 1.0);
    }

    #[test]
    fn zero_noise_matches_pure_state() {
        let c = bell();
        let s0 = StateVector::basis(4, 0);
        let pure = DensityMatrix::from_pure(&run_exact(&c, &s0).unwrap());
        let rho = run_noisy(&c, &DensityMatrix::from_pure(&s0), &NoiseModel::ideal()).unwrap();
        assert!(rho.matrix().frobenius_distance(pure.matrix()) < 1e-12);
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed_qubit() {
        let mut c = Circuit::new(2, "d");
        c.add(GateKind::H, &[0]).unwrap();
        c.add(GateKind::X, &[1]).unwrap();
        let nm = NoiseModel { p1: 1.0, ..NoiseModel::ideal() };
        let rho = run_noisy(&c, &DensityMatrix::ground(2), &nm).unwrap();
        let half = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(rho.reduced(&[0]).matrix().frobenius_distance(&half) < 1e-15);
        assert!(rho.reduced(&[1]).matrix().frobenius_distance(&half) < 1e-15);
    }

    #[test]
    fn channels_keep_trace_and_positivity() {
        let c = bell();
        let nm = NoiseModel { p1: 0.1, p2: 0.3, t1: 20.0, t2: 15.0, ..NoiseModel::default() };
        let rho = run_noisy(&c, &DensityMatrix::ground(2), &nm).unwrap();
        assert!((rho.trace() - ONE).norm() < 1e-12);
        assert!(rho.hermiticity_defect() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn relaxation_rates() {
        // Excited state decays as e^{-τ/T1}; |+> coherence as e^{-τ/T2}.
        let mut rho = DensityMatrix::from_pure(&StateVector::basis(2, 1));
        rho.relax(0, 10.0, 50.0, 40.0);
        assert!((rho.matrix()[(1, 1)].re - (-0.2f64).exp()).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(vec![C64::new(r, 0.0), C64::new(r, 0.0)]).unwrap();
        let mut rho = DensityMatrix::from_pure(&plus);
        rho.relax(0, 10.0, 50.0, 40.0);
        assert!((rho.matrix()[(0, 1)].re - 0.5 * (-0.25f64).exp()).abs() < 1e-12);
        let mut inf = DensityMatrix::from_pure(&plus);
        inf.relax(0, 10.0, f64::INFINITY, f64::INFINITY);
        assert_eq!(inf, DensityMatrix::from_pure(&plus));
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::default().validate().is_ok());
        assert!(NoiseModel { t2: 700.0, ..NoiseModel::default() }.validate().is_err());
        assert!(NoiseModel { p1: 1.5, ..NoiseModel::default() }.validate().is_err());
        assert!(NoiseModel { dur_2q: -1.0, ..NoiseModel::default() }.validate().is_err());
        assert!(NoiseModel::ideal().validate().is_ok());
    }

    #[test]
    fn readout_flips() {
        let rho = DensityMatrix::ground(2);
        let d = readout_distribution(&rho, &[0, 1], &NoiseModel::ideal()).unwrap();
        assert_eq!(d.get(0), 1.0);
        let nm = NoiseModel { readout_flip: 0.01, ..NoiseModel::ideal() };
        let d = readout_distribution(&rho, &[0, 1], &nm).unwrap();
        assert!((d.get(0) - 0.9801).abs() < 1e-12);
        assert!((d.get(1) - 0.0099).abs() < 1e-12);
        assert!((d.get(2) - 0.0099).abs() < 1e-12);
        assert!((d.get(3) - 0.0001).abs() < 1e-12);
        let nm = NoiseModel { readout_flip: 0.5, ..NoiseModel::ideal() };
        let d = readout_distribution(&rho, &[0, 1], &nm).unwrap();
        assert!((0..4).all(|k| (d.get(k) - 0.25).abs() < 1e-12));
    }

    #[test]
    fn too_wide_for_density() {
        let c = Circuit::new(7, "w");
        let rho = DensityMatrix::ground(1);
        assert_eq!(run_noisy(&c, &rho, &NoiseModel::ideal()), Err(SimError::TooWide(7)));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
