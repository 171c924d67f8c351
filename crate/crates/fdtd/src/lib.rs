//! Two-dimensional TE finite-difference time-domain engine for
//! photonic-crystal interface waveguides.
//!
//! The out-of-plane magnetic field `Hz` and the in-plane electric field
//! `(Ex, Ey)` live on a staggered Yee grid bounded by convolutional PML
//! layers. Point dipoles with circular or linear polarization drive the
//! structure and flux monitors accumulate running Fourier transforms of the
//! Poynting flux. [`scenarios`] builds the transport experiments on top:
//! chiral routing, bend transmission and source-position scans, and
//! [`validation`] checks the engine against closed-form references.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod error;
pub mod grid;
pub mod io;
pub mod monitor;
pub mod scenarios;
pub mod source;
pub mod validation;

pub use config::{Absorbers, PmlParams, SimConfig};
pub use engine::{run, EnergyBalance, MonitorSpectrum, RunMeta, RunOptions, SimResult, Simulation};
pub use error::{Error, Result};
pub use grid::Grid;
pub use monitor::{Component, FluxMonitor, MonitorLine, PointProbe, ProbeSeries};
pub use source::{DipoleSource, Envelope, Polarization};
