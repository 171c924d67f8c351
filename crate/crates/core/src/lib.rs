//! Numerical core for simulating a topological photonic-crystal interface
//! built from two deformed honeycomb lattices of triangular air holes.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: unit cells, device layouts, permittivity rasters and
//!   closed-form Fourier coefficients.
//! - [`bands`]: plane-wave expansion of the 2D TE master equation, gaps,
//!   band-inversion classification and effective-index calibration.
//! - [`edge`]: ribbon supercells and the projected band structure of the
//!   interface, with localization and spin-texture analysis.
//! - [`emitter`]: Zeeman lines, coupling efficiency, photon streams and
//!   second-order correlation estimates.
//!
//! Lengths inside the numerical kernels are measured in units of the lattice
//! constant `a0`; frequencies are the dimensionless `nu = a0 / lambda` and are
//! converted to THz with [`units::FrequencyScale`].

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod edge;
pub mod emitter;
pub mod error;
pub mod geometry;
pub mod units;

pub use error::{Error, Result};
