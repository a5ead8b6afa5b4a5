//! Dense qudit simulation of non-destructive discrimination and automated
//! error correction for generalized Bell states, plus Pauli-basis state
//! tomography of the results.
//!
//! Modules, bottom-up:
//!
//! - [`tensor`]: state vectors, density matrices, tensor products, partial trace
//! - [`gates`]: qubit gates and the qudit clock/shift/Fourier/controlled gates
//! - [`circuit`]: gate placement, Born-rule measurement, seeded shot sampling
//! - [`states`]: generalized Bell state labels and constructors
//! - [`discrimination`]: ancilla-based phase and parity checks
//! - [`autocorrect`]: error injection and the three-step correction
//! - [`tomography`]: Pauli expectation estimates, linear-inversion
//!   reconstruction, fidelity and deviation metrics
//! - [`experiments`]: named preset experiments and JSON reports

pub mod autocorrect;
pub mod circuit;
pub mod discrimination;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod states;
pub mod tensor;
pub mod tomography;

pub use circuit::{CheckOutcome, Circuit, ShotResult, Shots};
pub use error::{Error, Result};
pub use gates::{Gate, GateMatrix};
pub use states::{gbs, GbsLabel};
pub use tensor::{DensityMatrix, StateVector};
