//! Process-vector simulation of quantum-switch realizations.
//!
//! This crate models a single particle travelling through Alice's and Bob's
//! laboratories in a superposition of orders, using qutrit wires whose third level is
//! the vacuum `|v⟩`, so that "no particle on this wire" is an ordinary
//! state. Circuits are written as process vectors, i.e. tensor products of
//! transport vectors `|𝟙⟩⟩ = Σ|i⟩|i⟩`, one per wire, and every gate is a
//! Choi–Jamiołkowski vector contracted against it.
//!
//! # Layout
//!
//! - [`tensor`]: label-indexed dense kets and operators, tensor products and
//!   partial contraction.
//! - [`qutrit`]: qutrit basis and transport vectors, plus the Gell-Mann
//!   basis and qubit-in-qutrit embeddings.
//! - [`cj`]: Choi–Jamiołkowski vectors of every gate type, the beam
//!   splitter included.
//! - [`process`]: process vectors stored as factor lists, contracted gate by
//!   gate.
//! - [`scenario`]: the 4-, 3- and 2-event switch realizations and their
//!   outcome tables.
//! - [`friend`]: photon records, the non-demolition observable `M` and
//!   quantum erasure.
//! - [`immersion`]: layering a circuit DAG and placing it in Minkowski
//!   spacetime so that the light-cone order contains the circuit order.
//! - [`oracle`]: an independent wire-register simulation used to cross-check
//!   every process-vector probability.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![deny(unsafe_code)]
// `!(x <= tol)` also rejects NaN, which `x > tol` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cj;
pub mod friend;
pub mod immersion;
pub mod linalg;
pub mod oracle;
pub mod process;
pub mod qutrit;
pub mod random;
pub mod scenario;
pub mod tensor;

pub use linalg::{c64, Matrix, C64};
pub use tensor::{LabeledKet, LabeledOperator, SpaceLabel, TensorError};

/// Tolerance for entrywise equality of scalars and matrix entries.
pub const TAU_EQ: f64 = 1e-12;

/// Tolerance for aggregated checks (sums over many terms, sweeps).
pub const TAU_AGG: f64 = 1e-10;

/// Threshold below which a target vector counts as zero.
pub const TAU_DEG: f64 = 1e-9;
