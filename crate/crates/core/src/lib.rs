//! Simulation, curve fitting and parameter optimization for NV-center-driven
//! ¹³C hyperpolarization in diamond.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod fit;
pub mod harness;
pub mod quantities;
pub mod search;
pub mod spectra;
pub mod sweep;
pub mod transfer;

pub use error::{Error, Result};
