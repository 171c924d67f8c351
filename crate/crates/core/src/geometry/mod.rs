//! Lattice geometry, device layouts, rasters and Fourier coefficients.

pub mod fourier;
pub mod lattice;
pub mod layout;
pub mod polygon;
pub mod raster;
pub mod smoothing;

pub use fourier::{fourier_epsilon, hex_reciprocal_length, FourierEps, InverseRule};
pub use lattice::{
    build_unit_cell, HolePlacement, Lattice2D, LatticeSpec, Orientation, RadiusSet, Region,
    UnitCell,
};
pub use layout::{
    build_interface_layout, interface_vertex, DeviceLayout, InterfaceKind, LayoutKind, Rect,
};
pub use polygon::{Point, Triangle};
pub use raster::{rasterize, rasterize_grid, PermittivityMap};
