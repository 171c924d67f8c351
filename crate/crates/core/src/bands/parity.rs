//! Band-inversion classification from the angular structure of the Γ modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::kpath::BlochVector;
use super::solve::{solve_modes, PweSettings};
use crate::error::{Error, Result};
use crate::geometry::{fourier_epsilon, LatticeSpec, Region};
use crate::units::DEGENERACY_TOL;

/// Radius (units of a0) of the ring on which the field is decomposed.
pub const PARITY_RING_RADIUS: f64 = 0.25;
/// Smallest share of ring power the winning harmonic must carry.
pub const PARITY_MIN_WEIGHT: f64 = 0.6;
const RING_SAMPLES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    PLike,
    DLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParity {
    /// 0-based band index.
    pub band: usize,
    pub nu: f64,
    /// Share of ring power in the |ℓ| = 1 harmonics.
    pub p_weight: f64,
    /// Share of ring power in the |ℓ| = 2 harmonics.
    pub d_weight: f64,
    pub label: Parity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub region: Region,
    pub r_nm: f64,
    pub modes: Vec<ModeParity>,
    pub topology: Topology,
}

/// Fraction of `|H_z|²` on the ring carried by each |ℓ|, for ℓ up to `lmax`.
pub fn ring_harmonics(
    indices_q: &[[f64; 2]],
    coeffs: &[Complex64],
    radius: f64,
    lmax: usize,
) -> Vec<f64> {
    let field: Vec<Complex64> = (0..RING_SAMPLES)
        .map(|s| {
            let th = 2.0 * PI * s as f64 / RING_SAMPLES as f64;
            let r = [radius * th.cos(), radius * th.sin()];
            indices_q
                .iter()
                .zip(coeffs)
                .map(|(q, c)| c * Complex64::from_polar(1.0, q[0] * r[0] + q[1] * r[1]))
                .sum()
        })
        .collect();
    let total: f64 = field.iter().map(|f| f.norm_sqr()).sum::<f64>() / RING_SAMPLES as f64;
    let amp = |l: i64| -> Complex64 {
        field
            .iter()
            .enumerate()
            .map(|(s, f)| {
                f * Complex64::from_polar(
                    1.0,
                    -(l as f64) * 2.0 * PI * s as f64 / RING_SAMPLES as f64,
                )
            })
            .sum::<Complex64>()
            / RING_SAMPLES as f64
    };
    (0..=lmax)
        .map(|l| {
            let w = if l == 0 {
                amp(0).norm_sqr()
            } else {
                amp(l as i64).norm_sqr() + amp(-(l as i64)).norm_sqr()
            };
            if total > 0.0 {
                w / total
            } else {
                0.0
            }
        })
        .collect()
}

/// Labels the four modes around the Dirac frequency (bands 1..=4, 0-based)
/// and decides the ordering of the p-like and d-like pairs.
pub fn classify_parity(
    spec: &LatticeSpec,
    region: Region,
    settings: PweSettings,
) -> Result<ParityReport> {
    let eps = fourier_epsilon(spec, region, settings.gmax, settings.rule)?;
    let m = solve_modes(&eps, BlochVector::GAMMA, 6, true)?;
    let u = m.vectors.as_ref().expect("vectors requested");
    let mut modes = Vec::with_capacity(4);
    for band in 1..=4 {
        let coeffs: Vec<Complex64> = (0..u.nrows()).map(|i| u[(i, band)]).collect();
        let h = ring_harmonics(&m.basis.q, &coeffs, PARITY_RING_RADIUS, 3);
        let (p, d) = (h[1], h[2]);
        if p.max(d) < PARITY_MIN_WEIGHT {
            return Err(Error::Inconclusive(format!(
                "{region} band {band}: |l|=1 weight {p:.3} and |l|=2 weight {d:.3} are both below {PARITY_MIN_WEIGHT}"
            )));
        }
        modes.push(ModeParity {
            band,
            nu: m.nu[band],
            p_weight: p,
            d_weight: d,
            label: if p > d { Parity::PLike } else { Parity::DLike },
        });
    }
    let split = modes[2].nu - modes[1].nu;
    if split < DEGENERACY_TOL {
        return Err(Error::Inconclusive(format!(
            "{region}: the two Γ doublets are degenerate (separation {split:.2e}); no gap to classify"
        )));
    }
    let lower = (modes[0].label, modes[1].label);
    let upper = (modes[2].label, modes[3].label);
    let topology = match (lower, upper) {
        ((Parity::PLike, Parity::PLike), (Parity::DLike, Parity::DLike)) => Topology::Trivial,
        ((Parity::DLike, Parity::DLike), (Parity::PLike, Parity::PLike)) => Topology::Nontrivial,
        _ => {
            return Err(Error::Inconclusive(format!(
                "{region}: Γ doublets are not pure p/d pairs: {:?}",
                modes.iter().map(|m| m.label).collect::<Vec<_>>()
            )))
        }
    };
    Ok(ParityReport {
        region,
        r_nm: spec.radius_nm(region),
        modes,
        topology,
    })
}
