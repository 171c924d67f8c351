//! Band gaps and their intersection.

use serde::{Deserialize, Serialize};

use super::kpath::{irreducible_grid, KPath};
use super::solve::{solve_samples, BandSet, PweSettings};
use crate::error::{Error, Result};
use crate::geometry::{fourier_epsilon, LatticeSpec, Region};

/// Gap between band `below` and band `above` (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapInfo {
    pub below: usize,
    pub above: usize,
    pub lower_nu: f64,
    pub upper_nu: f64,
    pub width_nu: f64,
    pub mid_nu: f64,
    pub lower_thz: f64,
    pub upper_thz: f64,
    pub width_thz: f64,
    pub mid_thz: f64,
    /// Width over mid-gap frequency.
    pub relative_width: f64,
    /// How far the bands overlap when there is no gap (0 otherwise).
    pub overlap_nu: f64,
}

impl GapInfo {
    fn from_edges(
        below: usize,
        above: usize,
        top_of_below: f64,
        bottom_of_above: f64,
        c: f64,
    ) -> Self {
        let (lower, upper, overlap) = if bottom_of_above >= top_of_below {
            (top_of_below, bottom_of_above, 0.0)
        } else {
            let mid = 0.5 * (top_of_below + bottom_of_above);
            (mid, mid, top_of_below - bottom_of_above)
        };
        let width = upper - lower;
        let mid = 0.5 * (upper + lower);
        Self {
            below,
            above,
            lower_nu: lower,
            upper_nu: upper,
            width_nu: width,
            mid_nu: mid,
            lower_thz: lower * c,
            upper_thz: upper * c,
            width_thz: width * c,
            mid_thz: mid * c,
            relative_width: if mid > 0.0 { width / mid } else { 0.0 },
            overlap_nu: overlap,
        }
    }

    pub fn is_open(&self) -> bool {
        self.width_nu > 0.0
    }
}

/// Maximum of band `below` against the minimum of band `above` over every
/// sample in `bands`.
pub fn find_gap(bands: &BandSet, below: usize, above: usize) -> Result<GapInfo> {
    if below >= above || above >= bands.nbands || bands.points.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "gap between bands {below} and {above} needs below < above < {} and at least one sample",
            bands.nbands
        )));
    }
    let (_, top) = bands.band_range(below);
    let (bottom, _) = bands.band_range(above);
    Ok(GapInfo::from_edges(
        below,
        above,
        top,
        bottom,
        bands.c_over_a0_thz,
    ))
}

/// Overlap of two gaps as `(lower, upper)` in dimensionless units.
pub fn intersect(a: &GapInfo, b: &GapInfo) -> Option<(f64, f64)> {
    let lo = a.lower_nu.max(b.lower_nu);
    let hi = a.upper_nu.min(b.upper_nu);
    (a.is_open() && b.is_open() && hi > lo).then_some((lo, hi))
}

/// Sampling used to bound band extrema over the whole zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneSampling {
    pub per_segment: usize,
    pub grid: usize,
}

impl Default for ZoneSampling {
    fn default() -> Self {
        Self {
            per_segment: 32,
            grid: 24,
        }
    }
}

/// Bulk bands on the Γ-K-M-Γ path plus a folded zone grid, and the gap
/// between `below` and `above` over all of them.
pub fn bulk_gap(
    spec: &LatticeSpec,
    region: Region,
    below: usize,
    above: usize,
    settings: PweSettings,
    sampling: ZoneSampling,
) -> Result<(GapInfo, BandSet)> {
    let eps = fourier_epsilon(spec, region, settings.gmax, settings.rule)?;
    let c = spec.frequency_scale().c_over_a0_thz;
    let mut samples = KPath::hexagonal(sampling.per_segment)?.points();
    let offset = samples.len();
    samples.extend(irreducible_grid(sampling.grid).into_iter().map(|mut s| {
        s.index += offset;
        s
    }));
    let bands = solve_samples(&eps, &samples, above + 2, region.name(), c, settings)?;
    Ok((find_gap(&bands, below, above)?, bands))
}
