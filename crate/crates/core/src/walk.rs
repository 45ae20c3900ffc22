//! Exact dense-matrix dynamics of a two-state walker on an N-cycle.
//!
//! Basis ordering puts the coin in the most significant slot:
//! `index = coin * M + position`, where `M = N` for [`Embedding::Exact`] and
//! `M = 2^n >= N` for [`Embedding::Padded`]. In the padded space the spare
//! nodes `N..M` are fixed points of both shifts.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::WalkError;
use crate::linalg::{cis, eigenvalues, ComplexMatrix, Mat2, C64, ONE, ZERO};

pub const DEFAULT_T_MAX: u32 = 1000;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-8;
pub const UNITARITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    r: f64,
    a: f64,
    b: f64,
}

impl CoinParams {
    pub fn new(r: f64, a: f64, b: f64) -> Result<Self, WalkError> {
        if !(0.0..=1.0).contains(&r) || r.is_nan() {
            return Err(WalkError::CoinR(r));
        }
        for (name, value) in [("a", a), ("b", b)] {
            if !(0.0..TAU).contains(&value) {
                return Err(WalkError::CoinPhase { name, value });
            }
        }
        Ok(CoinParams { r, a, b })
    }

    /// Real coin `C(r, 0, 0)`.
    pub fn real(r: f64) -> Result<Self, WalkError> {
        Self::new(r, 0.0, 0.0)
    }

    pub fn hadamard() -> Self {
        CoinParams { r: 0.5, a: 0.0, b: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn matrix(&self) -> Mat2 {
        let s = self.r.sqrt();
        let c = (1.0 - self.r).sqrt();
        [
            [C64::new(s, 0.0), cis(self.a) * c],
            [cis(self.b) * c, -cis(self.a + self.b) * s],
        ]
    }
}

impl fmt::Display for CoinParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.r, self.a, self.b)
    }
}

pub fn coin_operator(p: &CoinParams) -> ComplexMatrix {
    ComplexMatrix::from_mat2(&p.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Embedding {
    Exact,
    Padded,
}

/// Number of position slots used for a cycle of size `n` under `emb`.
pub fn position_slots(n: usize, emb: Embedding) -> usize {
    match emb {
        Embedding::Exact => n,
        Embedding::Padded => n.next_power_of_two(),
    }
}

pub fn state_dim(n: usize, emb: Embedding) -> usize {
    2 * position_slots(n, emb)
}

fn check_cycle(n: usize) -> Result<(), WalkError> {
    if n < 3 {
        Err(WalkError::CycleTooSmall(n))
    } else {
        Ok(())
    }
}

/// Destination position of `pos` under the shift selected by `coin`.
fn shifted(pos: usize, coin: usize, n: usize) -> usize {
    if pos >= n {
        pos
    } else if coin == 0 {
        (pos + n - 1) % n
    } else {
        (pos + 1) % n
    }
}

pub fn shift_operator(n: usize, emb: Embedding) -> Result<ComplexMatrix, WalkError> {
    check_cycle(n)?;
    let m = position_slots(n, emb);
    let mut s = ComplexMatrix::zeros(2 * m, 2 * m);
    for coin in 0..2 {
        for pos in 0..m {
            s[(coin * m + shifted(pos, coin, n), coin * m + pos)] = ONE;
        }
    }
    Ok(s)
}

/// One walk step `S · (C ⊗ I)` in the coin-major basis.
pub fn step_operator(n: usize, emb: Embedding, p: &CoinParams) -> Result<ComplexMatrix, WalkError> {
    let s = shift_operator(n, emb)?;
    let m = position_slots(n, emb);
    let coin = coin_operator(p).kron(&ComplexMatrix::identity(m));
    Ok(s.matmul(&coin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Validates that the amplitudes have unit norm within 1e-10.
    pub fn new(amps: Vec<C64>) -> Result<Self, WalkError> {
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(WalkError::NotNormalized(n2));
        }
        Ok(StateVector { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        StateVector { amps }
    }

    /// Wraps amplitudes produced by a unitary map without re-checking.
    pub(crate) fn from_unitary_image(amps: Vec<C64>) -> Self {
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<StateVector, WalkError> {
        if u.cols() != self.dim() {
            return Err(WalkError::Dimension { expected: u.cols(), got: self.dim() });
        }
        Ok(StateVector { amps: u.matvec(&self.amps) })
    }
}

/// `cos(θ/2)|0_p,0_c⟩ + e^{iφ} sin(θ/2)|0_p,1_c⟩`.
pub fn initial_state(theta: f64, phi: f64, n: usize, emb: Embedding) -> Result<StateVector, WalkError> {
    check_cycle(n)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(WalkError::InitialAngle { name: "theta", value: theta });
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(WalkError::InitialAngle { name: "phi", value: phi });
    }
    let m = position_slots(n, emb);
    let mut amps = vec![ZERO; 2 * m];
    amps[0] = C64::new((theta / 2.0).cos(), 0.0);
    amps[m] = cis(phi) * (theta / 2.0).sin();
    Ok(StateVector { amps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoinSchedule {
    pattern: Vec<String>,
    coins: BTreeMap<String, CoinParams>,
    length: usize,
}

impl CoinSchedule {
    pub fn new(
        pattern: Vec<String>,
        coins: BTreeMap<String, CoinParams>,
        length: usize,
    ) -> Result<Self, WalkError> {
        if pattern.is_empty() && length > 0 {
            return Err(WalkError::BadPattern(String::new()));
        }
        if let Some(l) = pattern.iter().find(|l| !coins.contains_key(*l)) {
            return Err(WalkError::UnboundLabel(l.clone()));
        }
        Ok(CoinSchedule { pattern, coins, length })
    }

    /// A schedule that applies the same coin at every step.
    pub fn constant(coin: CoinParams, length: usize) -> Self {
        let mut coins = BTreeMap::new();
        coins.insert("C".to_string(), coin);
        CoinSchedule { pattern: vec!["C".to_string()], coins, length }
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn pattern(&self) -> &[String] {
        &self.pattern
    }

    pub fn coins(&self) -> &BTreeMap<String, CoinParams> {
        &self.coins
    }

    pub fn label_at(&self, step: usize) -> &str {
        &self.pattern[step % self.pattern.len()]
    }

    pub fn coin_at(&self, step: usize) -> CoinParams {
        self.coins[self.label_at(step)]
    }

    /// Same pattern and coins, different length.
    pub fn with_length(&self, length: usize) -> Self {
        CoinSchedule { length, ..self.clone() }
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.length).map(move |i| self.label_at(i))
    }
}

/// Splits a pattern such as `AABB` or `A'A'B'B'` into labels. A label is one
/// ASCII letter followed by any number of primes or digits. Whitespace and
/// commas are ignored.
pub fn parse_pattern(pattern: &str) -> Result<Vec<String>, WalkError> {
    let mut labels: Vec<String> = Vec::new();
    for ch in pattern.chars() {
        if ch.is_ascii_alphabetic() {
            labels.push(ch.to_string());
        } else if ch == '\'' || ch.is_ascii_digit() {
            match labels.last_mut() {
                Some(l) => l.push(ch),
                None => return Err(WalkError::BadPattern(pattern.to_string())),
            }
        } else if !(ch.is_whitespace() || ch == ',') {
            return Err(WalkError::BadPattern(pattern.to_string()));
        }
    }
    if labels.is_empty() {
        return Err(WalkError::BadPattern(pattern.to_string()));
    }
    Ok(labels)
}

pub fn parrondo_schedule(
    pattern: &str,
    coins: &BTreeMap<String, CoinParams>,
    t: usize,
) -> Result<CoinSchedule, WalkError> {
    CoinSchedule::new(parse_pattern(pattern)?, coins.clone(), t)
}

/// Applies the schedule step by step; element `i` is the state after `i + 1`
/// steps.
pub fn evolve(
    state: &StateVector,
    schedule: &CoinSchedule,
    n: usize,
    emb: Embedding,
) -> Result<Vec<StateVector>, WalkError> {
    let dim = state_dim(n, emb);
    if state.dim() != dim {
        return Err(WalkError::Dimension { expected: dim, got: state.dim() });
    }
    let mut ops = BTreeMap::new();
    for (label, coin) in schedule.coins() {
        ops.insert(label.as_str(), step_operator(n, emb, coin)?);
    }
    let mut out = Vec::with_capacity(schedule.len());
    let mut cur = state.clone();
    for label in schedule.labels() {
        cur = cur.apply(&ops[label])?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Ordered product `U(t-1) ... U(1) U(0)` of the step operators.
pub fn schedule_operator(
    schedule: &CoinSchedule,
    n: usize,
    emb: Embedding,
) -> Result<ComplexMatrix, WalkError> {
    let mut ops = BTreeMap::new();
    for (label, coin) in schedule.coins() {
        ops.insert(label.as_str(), step_operator(n, emb, coin)?);
    }
    let mut acc = ComplexMatrix::identity(state_dim(n, emb));
    for label in schedule.labels() {
        acc = ops[label].matmul(&acc);
    }
    Ok(acc)
}

/// Probability of finding the walker at position 0, summed over the coin.
pub fn return_probability(state: &StateVector, n: usize, emb: Embedding) -> f64 {
    let m = position_slots(n, emb);
    let a = state.amplitudes();
    (a[0].norm_sqr() + a[m].norm_sqr()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// `U^T = I` exactly.
    Strict,
    /// `U^T = e^{iγ} I` for some global phase γ.
    Insensitive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodResult {
    pub period: Option<u32>,
    /// Distance at the reported period, or the smallest distance seen.
    pub residual: f64,
    /// Global phase γ at the reported period.
    pub phase: f64,
    pub bound: u32,
}

fn check_unitary(u: &ComplexMatrix) -> Result<(), WalkError> {
    let d = u.unitarity_defect();
    if d < UNITARITY_TOL * (u.rows().max(1) as f64) {
        Ok(())
    } else {
        Err(WalkError::NotUnitary(d))
    }
}

/// Smallest `T <= t_max` with `‖U^T − e^{iγ}I‖_F < tol`, by repeated
/// multiplication. γ is the phase of the largest-magnitude diagonal entry of
/// `U^T` (forced to zero in strict mode).
pub fn find_period_power(
    u: &ComplexMatrix,
    t_max: u32,
    tol: f64,
    mode: PhaseMode,
) -> Result<PeriodResult, WalkError> {
    check_unitary(u)?;
    let n = u.rows();
    let mut acc = u.clone();
    let mut best = (f64::INFINITY, 0.0);
    for t in 1..=t_max {
        let gamma = match mode {
            PhaseMode::Strict => 0.0,
            PhaseMode::Insensitive => {
                let d = acc.diagonal();
                let big = d.iter().copied().fold(ZERO, |m, z| if z.norm() > m.norm() { z } else { m });
                big.arg()
            }
        };
        let ph = cis(gamma);
        let mut r2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ph } else { ZERO };
                r2 += (acc[(i, j)] - target).norm_sqr();
            }
        }
        let res = r2.sqrt();
        if res < tol {
            return Ok(PeriodResult { period: Some(t), residual: res, phase: gamma, bound: t_max });
        }
        if res < best.0 {
            best = (res, gamma);
        }
        acc = acc.matmul(u);
    }
    Ok(PeriodResult { period: None, residual: best.0, phase: best.1, bound: t_max })
}

/// Smallest `T <= t_max` with `max_j |λ_j^T − e^{iγ_T}| < tol`, where λ are
/// the eigenvalues of `U` and `γ_T = arg Σ_j λ_j^T` is the least-squares
/// common phase.
pub fn find_period_eigen(
    u: &ComplexMatrix,
    t_max: u32,
    tol: f64,
    mode: PhaseMode,
) -> Result<PeriodResult, WalkError> {
    check_unitary(u)?;
    let angles: Vec<f64> = eigenvalues(u)
        .ok_or(WalkError::EigenNonConvergence)?
        .iter()
        .map(|l| l.arg())
        .collect();
    let mut best = (f64::INFINITY, 0.0);
    for t in 1..=t_max {
        let powers: Vec<C64> = angles.iter().map(|&a| cis(a * t as f64)).collect();
        let gamma = match mode {
            PhaseMode::Strict => 0.0,
            PhaseMode::Insensitive => powers.iter().sum::<C64>().arg(),
        };
        let ph = cis(gamma);
        let res = powers.iter().map(|p| (p - ph).norm()).fold(0.0, f64::max);
        if res < tol {
            return Ok(PeriodResult { period: Some(t), residual: res, phase: gamma, bound: t_max });
        }
        if res < best.0 {
            best = (res, gamma);
        }
    }
    Ok(PeriodResult { period: None, residual: best.0, phase: best.1, bound: t_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_aligned_distance;

    const A: f64 = 0.998489;
    const B: f64 = 0.119545;
    const A3: f64 = 0.264734;
    const B3: f64 = 0.801571;

    fn coins(pairs: &[(&str, f64)]) -> BTreeMap<String, CoinParams> {
        pairs
            .iter()
            .map(|(l, r)| (l.to_string(), CoinParams::real(*r).unwrap()))
            .collect()
    }

    fn period(n: usize, c: CoinParams) -> Option<u32> {
        let u = step_operator(n, Embedding::Exact, &c).unwrap();
        find_period_power(&u, DEFAULT_T_MAX, DEFAULT_PERIOD_TOL, PhaseMode::Insensitive)
            .unwrap()
            .period
    }

    #[test]
    fn hadamard_coin_matrix() {
        let h = coin_operator(&CoinParams::hadamard());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = ComplexMatrix::from_rows(&[
            vec![C64::new(s, 0.0), C64::new(s, 0.0)],
            vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
        ]);
        assert!(h.frobenius_distance(&want) < 1e-15);
    }

    #[test]
    fn diagonal_coin_at_r_one() {
        let m = coin_operator(&CoinParams::real(1.0).unwrap());
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(1, 1)], -ONE);
        assert_eq!(m[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn coin_a_top_left_magnitude() {
        let m = coin_operator(&CoinParams::real(A).unwrap());
        assert!((m[(0, 0)].norm() - 0.999244).abs() < 1e-6);
        assert!(m.is_unitary(1e-12));
    }

    #[test]
    fn coin_rejects_bad_params() {
        assert!(matches!(CoinParams::new(1.5, 0.0, 0.0), Err(WalkError::CoinR(_))));
        assert!(CoinParams::new(-0.1, 0.0, 0.0).is_err());
        assert!(CoinParams::new(0.5, TAU, 0.0).is_err());
        assert!(CoinParams::new(0.5, 3.5, 0.1).is_ok());
    }

    #[test]
    fn shift_four_cycle_blocks() {
        let s = shift_operator(4, Embedding::Exact).unwrap();
        // R0: |j> -> |j-1>, R1: |j> -> |j+1>.
        for j in 0..4 {
            assert_eq!(s[((j + 3) % 4, j)], ONE);
            assert_eq!(s[(4 + (j + 1) % 4, 4 + j)], ONE);
        }
        assert!(s.is_unitary(1e-15));
    }

    #[test]
    fn shift_three_cycle_padded_fixes_node_three() {
        let s = shift_operator(3, Embedding::Padded).unwrap();
        assert_eq!(s.rows(), 8);
        assert_eq!(s[(3, 3)], ONE);
        assert_eq!(s[(7, 7)], ONE);
        assert_eq!(s[(2, 0)], ONE);
        assert_eq!(s[(4 + 1, 4)], ONE);
        assert_eq!(s[(4, 4 + 2)], ONE);
    }

    #[test]
    fn shift_rejects_tiny_cycle() {
        assert_eq!(shift_operator(2, Embedding::Exact), Err(WalkError::CycleTooSmall(2)));
    }

    #[test]
    fn initial_states() {
        let s = initial_state(0.0, 0.0, 4, Embedding::Exact).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        let s = initial_state(PI, 0.0, 4, Embedding::Exact).unwrap();
        assert!((s.amplitudes()[4] - ONE).norm() < 1e-15);
        let s = initial_state(PI / 2.0, PI / 2.0, 3, Embedding::Padded).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[4] - C64::new(0.0, r)).norm() < 1e-15);
        assert!(initial_state(4.0, 0.0, 4, Embedding::Exact).is_err());
    }

    #[test]
    fn one_hadamard_step_from_origin() {
        let s0 = initial_state(0.0, 0.0, 4, Embedding::Exact).unwrap();
        let sched = CoinSchedule::constant(CoinParams::hadamard(), 1);
        let traj = evolve(&s0, &sched, 4, Embedding::Exact).unwrap();
        let a = traj[0].amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // coin 0 lands on position 3, coin 1 on position 1.
        assert!((a[3].norm() - r).abs() < 1e-15);
        assert!((a[4 + 1].norm() - r).abs() < 1e-15);
        assert_eq!(return_probability(&traj[0], 4, Embedding::Exact), 0.0);
        assert_eq!(return_probability(&s0, 4, Embedding::Exact), 1.0);
    }

    #[test]
    fn empty_schedule_gives_empty_trajectory() {
        let s0 = initial_state(0.0, 0.0, 4, Embedding::Exact).unwrap();
        let sched = parrondo_schedule("AABB", &coins(&[("A", A), ("B", B)]), 0).unwrap();
        assert!(evolve(&s0, &sched, 4, Embedding::Exact).unwrap().is_empty());
    }

    #[test]
    fn evolve_rejects_wrong_dimension() {
        let s0 = initial_state(0.0, 0.0, 3, Embedding::Padded).unwrap();
        let sched = CoinSchedule::constant(CoinParams::hadamard(), 2);
        assert!(matches!(
            evolve(&s0, &sched, 3, Embedding::Exact),
            Err(WalkError::Dimension { expected: 6, got: 8 })
        ));
    }

    #[test]
    fn schedule_expansion() {
        let c = coins(&[("A", A), ("B", B)]);
        let s = parrondo_schedule("AABB", &c, 6).unwrap();
        assert_eq!(s.labels().collect::<Vec<_>>(), ["A", "A", "B", "B", "A", "A"]);
        let s = parrondo_schedule("A", &c, 3).unwrap();
        assert_eq!(s.labels().collect::<Vec<_>>(), ["A", "A", "A"]);
        assert!(matches!(
            parrondo_schedule("AC", &c, 3),
            Err(WalkError::UnboundLabel(l)) if l == "C"
        ));
    }

    #[test]
    fn primed_labels_parse() {
        assert_eq!(parse_pattern("A'A'B'B'").unwrap(), ["A'", "A'", "B'", "B'"]);
        assert_eq!(parse_pattern("A1 B2").unwrap(), ["A1", "B2"]);
        assert!(parse_pattern("'A").is_err());
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("A-B").is_err());
    }

    #[test]
    fn known_periods() {
        assert_eq!(period(4, CoinParams::hadamard()), Some(8));
        assert_eq!(period(8, CoinParams::hadamard()), Some(24));
        assert_eq!(period(3, CoinParams::real(2.0 / 3.0).unwrap()), Some(8));
        assert_eq!(period(3, CoinParams::real((5.0 - 5f64.sqrt()) / 6.0).unwrap()), Some(10));
        assert_eq!(period(3, CoinParams::hadamard()), None);
    }

    #[test]
    fn eigen_period_matches_power() {
        let cases = [
            (4, CoinParams::hadamard()),
            (8, CoinParams::hadamard()),
            (3, CoinParams::hadamard()),
            (3, CoinParams::real(2.0 / 3.0).unwrap()),
            (3, CoinParams::real((5.0 - 5f64.sqrt()) / 6.0).unwrap()),
            (4, CoinParams::real(A).unwrap()),
            (4, CoinParams::real(B).unwrap()),
            (3, CoinParams::real(A3).unwrap()),
            (3, CoinParams::real(B3).unwrap()),
        ];
        for (n, c) in cases {
            let u = step_operator(n, Embedding::Exact, &c).unwrap();
            for mode in [PhaseMode::Strict, PhaseMode::Insensitive] {
                let p = find_period_power(&u, 200, 1e-8, mode).unwrap().period;
                let e = find_period_eigen(&u, 200, 1e-8, mode).unwrap().period;
                assert_eq!(p, e, "N={n} coin={c} mode={mode:?}");
            }
        }
    }

    #[test]
    fn identity_has_period_one() {
        let id = ComplexMatrix::identity(5);
        assert_eq!(find_period_eigen(&id, 10, 1e-8, PhaseMode::Strict).unwrap().period, Some(1));
        assert_eq!(find_period_power(&id, 10, 1e-8, PhaseMode::Strict).unwrap().period, Some(1));
    }

    #[test]
    fn strict_mode_sees_global_phase() {
        let u = ComplexMatrix::identity(2).scale(cis(PI / 3.0));
        let s = find_period_power(&u, 20, 1e-8, PhaseMode::Strict).unwrap();
        let i = find_period_power(&u, 20, 1e-8, PhaseMode::Insensitive).unwrap();
        assert_eq!(s.period, Some(6));
        assert_eq!(i.period, Some(1));
        assert!((i.phase - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn period_rejects_non_unitary() {
        let m = ComplexMatrix::identity(2).scale(C64::new(2.0, 0.0));
        assert!(matches!(
            find_period_power(&m, 5, 1e-8, PhaseMode::Strict),
            Err(WalkError::NotUnitary(_))
        ));
        assert!(find_period_eigen(&m, 5, 1e-8, PhaseMode::Strict).is_err());
    }

    #[test]
    fn aabb_block_has_period_five() {
        let c = coins(&[("A", A), ("B", B)]);
        let block = schedule_operator(&parrondo_schedule("AABB", &c, 4).unwrap(), 4, Embedding::Exact).unwrap();
        // Brute force: smallest k with block^k proportional to I. The coins
        // are six-digit roundings, so the block only closes to about 6e-6.
        let mut acc = block.clone();
        let mut brute = None;
        for k in 1..=50 {
            if phase_aligned_distance(&acc, &ComplexMatrix::identity(8)) < 1e-5 {
                brute = Some(k);
                break;
            }
            acc = acc.matmul(&block);
        }
        assert_eq!(brute, Some(5));
        let e = find_period_eigen(&block, 100, 1e-5, PhaseMode::Insensitive).unwrap();
        assert_eq!(e.period, Some(5));
        let p = find_period_power(&block, 100, 1e-5, PhaseMode::Insensitive).unwrap();
        assert_eq!(p.period, Some(5));
        assert!(find_period_eigen(&block, 100, 1e-8, PhaseMode::Insensitive).unwrap().period.is_none());
    }

    #[test]
    fn parrondo_returns_at_twenty() {
        for (n, pat, c) in [
            (4, "AABB", coins(&[("A", A), ("B", B)])),
            (3, "A'A'B'B'", coins(&[("A'", A3), ("B'", B3)])),
        ] {
            let s0 = initial_state(0.0, 0.0, n, Embedding::Exact).unwrap();
            let sched = parrondo_schedule(pat, &c, 20).unwrap();
            let traj = evolve(&s0, &sched, n, Embedding::Exact).unwrap();
            let last = &traj[19];
            assert!((return_probability(last, n, Embedding::Exact) - 1.0).abs() < 1e-6);
            assert!((last.inner(&s0).norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn padded_and_exact_agree_on_three_cycle() {
        let c = coins(&[("A'", A3), ("B'", B3)]);
        let sched = parrondo_schedule("A'A'B'B'", &c, 25).unwrap();
        let e0 = initial_state(1.1, 0.4, 3, Embedding::Exact).unwrap();
        let p0 = initial_state(1.1, 0.4, 3, Embedding::Padded).unwrap();
        let te = evolve(&e0, &sched, 3, Embedding::Exact).unwrap();
        let tp = evolve(&p0, &sched, 3, Embedding::Padded).unwrap();
        for (e, p) in te.iter().zip(&tp) {
            for coin in 0..2 {
                for pos in 0..3 {
                    let d = e.amplitudes()[coin * 3 + pos] - p.amplitudes()[coin * 4 + pos];
                    assert!(d.norm() < 1e-10);
                }
                assert!(p.amplitudes()[coin * 4 + 3].norm() < 1e-15);
            }
        }
    }
}
