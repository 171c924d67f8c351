//! Command-line front end: strict scenario configuration, orchestration of
//! the band, edge, transport and emitter computations, a manifest of every
//! output and optional SVG figures drawn from the CSV files.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::{parse_config, parse_str, Scenario, ScenarioConfig};
pub use error::{Error, Result, Violation};
pub use manifest::Manifest;
pub use plot::emit_plots;
pub use run::{run_scenario, RunRequest};
