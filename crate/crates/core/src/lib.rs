//! Numerical toolkit for discrete measures modelling Fourier quasicrystals:
//! cut-and-project sets, exponential sums, diffraction, discreteness tests and
//! recovery of periodic comb structure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod cutproject;
pub mod diffraction;
pub mod structure;
pub mod measures;
pub mod numeric;
pub mod io;
pub mod svg;
pub mod config;
pub mod cli;

pub use error::{Error, Result};
