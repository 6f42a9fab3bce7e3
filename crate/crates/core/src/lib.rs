//! Dispersion-managed solitons as maximizers of non-local four-linear
//! functionals, on the line and on the lattice.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod dynamics;
pub mod error;
mod fft;
pub mod field;
pub mod functional;
pub mod io;
pub mod propagator;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
