//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("coin parameter r = {0} outside [0, 1]")]
    CoinR(f64),
    #[error("coin phase {name} = {value} outside [0, 2pi)")]
    CoinPhase { name: &'static str, value: f64 },
    #[error("cycle size {0} is too small (need N >= 3)")]
    CycleTooSmall(usize),
    #[error("initial-state angle {name} = {value} out of range")]
    InitialAngle { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("eigendecomposition did not converge")]
    EigenNonConvergence,
    #[error("pattern label '{0}' has no bound coin")]
    UnboundLabel(String),
    #[error("cannot parse pattern '{0}'")]
    BadPattern(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("gate {kind} expects {expected} qubits, got {got}")]
    Arity { kind: &'static str, expected: usize, got: usize },
    #[error("repeated qubit {0} in gate")]
    RepeatedQubit(usize),
    #[error("unitary payload is not unitary (defect {0:e})")]
    NonUnitaryPayload(f64),
    #[error("width {0} too large for dense lowering")]
    TooWide(usize),
    #[error("unsupported cycle size {0}")]
    UnsupportedCycle(usize),
    #[error("synthesis residual {0:e} above tolerance")]
    Synthesis(f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: circuit needs {expected}, state has {got}")]
    Dimension { expected: usize, got: usize },
    #[error("width {0} too large for density-matrix simulation")]
    TooWide(usize),
    #[error("measured qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("invalid noise model: {0}")]
    Noise(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranspileError {
    #[error("gate payload is not unitary (defect {0:e})")]
    NonUnitary(f64),
    #[error("resynthesis residual {0:e} above tolerance")]
    Resynthesis(f64),
    #[error("non-native gate {0} in scheduled circuit")]
    NotNative(String),
    #[error("min_window {min_window} shorter than four pulses ({needed})")]
    WindowTooShort { min_window: f64, needed: f64 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("distribution not normalized (sum {0})")]
    NotNormalized(f64),
    #[error("distribution has zero shots")]
    ZeroShots,
    #[error("negative probability {0}")]
    Negative(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("series length mismatch: {0} steps vs {1} values")]
    SeriesLength(usize, usize),
    #[error("fidelity {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("parse error: {0}")]
    Parse(String),
}
