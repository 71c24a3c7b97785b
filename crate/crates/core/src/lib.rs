//! Pseudospectral tools for the generalized Boussinesq equation
//! `u_tt - Δu + Δ(Δu + |u|^{p-1}u) = 0` on periodic boxes in one to three
//! dimensions: ground-state traveling waves, stability curves and dynamics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err, clippy::needless_range_loop)]

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod groundstate;
pub mod io_cli;
pub mod scalar;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = spectral::Grid<f64>;
pub type Field64 = spectral::Field<f64>;
pub type Grid32 = spectral::Grid<f32>;
pub type Field32 = spectral::Field<f32>;
