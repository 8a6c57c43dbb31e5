//! Exact statevector simulation and training of small variational quantum
//! neural network classifiers.
//!
//! The pieces compose bottom-up: [`statevec`] holds the register and gate
//! kernels, [`ansatz`] builds layered circuit templates, [`encoding`] maps
//! classical vectors onto circuits, [`objective`] turns circuit outputs
//! into losses and gradients, [`trainer`] runs seeded Adam, and [`sweep`]
//! fans training runs out over hyperparameter grids. [`spin_models`]
//! supplies the Hamiltonians behind the analog entangler and the
//! quantum-state dataset; [`data`] handles files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod data;
pub mod encoding;
pub mod error;
pub mod objective;
pub mod spin_models;
pub mod statevec;
pub mod sweep;
pub mod trainer;

pub use error::{QnnError, Result};
