//! Discrete-time quantum walks on cycle graphs.
//!
//! The crate covers the whole pipeline from exact matrix dynamics to noisy
//! circuit execution:
//!
//! - [`walk`]: coin and shift operators, trajectories, period detection.
//! - [`circuit`]: gate IR, Fourier-basis walk circuits, lowering, depth.
//! - [`simulator`]: statevector, sampling and density-matrix execution.
//! - [`transpiler`]: native-gate lowering, optimization levels, scheduling and
//!   dynamical decoupling.
//! - [`metrics`]: Hellinger distance and fidelity.

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod simulator;
pub mod circuit;
pub mod distribution;
pub mod synth;
pub mod transpiler;
pub mod walk;

pub use error::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
