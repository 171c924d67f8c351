//! Plane-wave expansion of the 2D TE eigenproblem for bulk crystals.

pub mod calibrate;
pub mod gap;
pub mod io;
pub mod kpath;
pub mod operator;
pub mod parity;
pub mod solve;

pub use calibrate::{calibrate_neff, dirac_point, Calibration, DiracPoint, DEVICE_NEFF};
pub use gap::{bulk_gap, find_gap, intersect, GapInfo, ZoneSampling};
pub use kpath::{irreducible_grid, BlochVector, KPath, KSample, KVertex};
pub use operator::{assemble_te_operator, eta_matrix, EtaMatrix, PlaneWaveBasis, TeOperator};
pub use parity::{classify_parity, ModeParity, Parity, ParityReport, Topology};
pub use solve::{solve_bands, solve_modes, solve_samples, BandPoint, BandSet, Modes, PweSettings};
