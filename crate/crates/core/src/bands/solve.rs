//! Dense eigensolves over k samples.

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::kpath::{BlochVector, KPath, KSample};
use super::operator::{assemble_te_operator, EtaMatrix, PlaneWaveBasis};
use crate::error::{Error, Result};
use crate::geometry::{fourier_epsilon, FourierEps, InverseRule, LatticeSpec, Region};

/// Plane-wave discretisation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PweSettings {
    /// Cutoff |k + G| < gmax, in units of `4π/(√3·a0)`.
    pub gmax: f64,
    pub rule: InverseRule,
}

impl Default for PweSettings {
    fn default() -> Self {
        Self {
            gmax: 11.0,
            rule: InverseRule::Smoothed,
        }
    }
}

/// Eigenpairs at one k.
#[derive(Debug, Clone)]
pub struct Modes {
    pub k: BlochVector,
    /// Dimensionless frequencies `a0/λ`, ascending.
    pub nu: Vec<f64>,
    pub basis: PlaneWaveBasis,
    /// Columns are unit-norm plane-wave amplitudes of `H_z`.
    pub vectors: Option<Mat<Complex64>>,
    /// Fourier matrix of `1/ε` on `basis`, kept when vectors are requested.
    pub eta: Option<EtaMatrix>,
}

fn to_nu(lambda: f64) -> f64 {
    lambda.max(0.0).sqrt() / (2.0 * PI)
}

/// Lowest `nbands` modes of the TE operator at `k`.
pub fn solve_modes(
    eps: &FourierEps,
    k: BlochVector,
    nbands: usize,
    want_vectors: bool,
) -> Result<Modes> {
    let op = assemble_te_operator(eps, k)?;
    let n = op.basis.len();
    if nbands == 0 || 2 * nbands > n {
        return Err(Error::InvalidArgument(format!(
            "{nbands} bands requested from a basis of {n} plane waves (at most half may be used)"
        )));
    }
    let fail = |reason: String| Error::Eigen {
        kx: k.kx,
        ky: k.ky,
        reason,
    };
    if want_vectors {
        let evd = op
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| fail(format!("{e:?}")))?;
        let s = evd.S();
        let nu = (0..nbands).map(|i| to_nu(s[i].re)).collect();
        let u = evd.U();
        let vectors = Mat::from_fn(n, nbands, |i, j| u[(i, j)]);
        Ok(Modes {
            k,
            nu,
            basis: op.basis,
            vectors: Some(vectors),
            eta: Some(op.eta),
        })
    } else {
        let vals = op
            .matrix
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| fail(format!("{e:?}")))?;
        Ok(Modes {
            k,
            nu: vals[..nbands].iter().map(|&l| to_nu(l)).collect(),
            basis: op.basis,
            vectors: None,
            eta: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub segment: String,
    pub k_index: usize,
    pub k: BlochVector,
    pub nu: Vec<f64>,
    pub basis_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub label: String,
    pub c_over_a0_thz: f64,
    pub nbands: usize,
    pub settings: PweSettings,
    pub points: Vec<BandPoint>,
}

impl BandSet {
    pub fn thz(&self, nu: f64) -> f64 {
        nu * self.c_over_a0_thz
    }

    /// Extremes of one band over all samples.
    pub fn band_range(&self, band: usize) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.nu[band]), hi.max(p.nu[band]))
            })
    }

    pub fn max_basis_size(&self) -> usize {
        self.points.iter().map(|p| p.basis_size).max().unwrap_or(0)
    }

    /// Concatenates the samples of another set computed with the same settings.
    pub fn merged(mut self, other: &BandSet) -> Self {
        let offset = self.points.len();
        self.points
            .extend(other.points.iter().cloned().map(|mut p| {
                p.k_index += offset;
                p
            }));
        self
    }
}

/// Solves an arbitrary list of k samples on a precomputed coefficient table.
pub fn solve_samples(
    eps: &FourierEps,
    samples: &[KSample],
    nbands: usize,
    label: &str,
    c_over_a0_thz: f64,
    settings: PweSettings,
) -> Result<BandSet> {
    let points = samples
        .par_iter()
        .map(|s| {
            let m = solve_modes(eps, s.k, nbands, false)?;
            Ok(BandPoint {
                segment: s.segment.clone(),
                k_index: s.index,
                k: s.k,
                nu: m.nu,
                basis_size: m.basis.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandSet {
        label: label.to_owned(),
        c_over_a0_thz,
        nbands,
        settings,
        points,
    })
}

/// Lowest `nbands` bands of the bulk crystal of `region` along `path`.
pub fn solve_bands(
    spec: &LatticeSpec,
    region: Region,
    path: &KPath,
    nbands: usize,
    settings: PweSettings,
) -> Result<BandSet> {
    let eps = fourier_epsilon(spec, region, settings.gmax, settings.rule)?;
    solve_samples(
        &eps,
        &path.points(),
        nbands,
        region.name(),
        spec.frequency_scale().c_over_a0_thz,
        settings,
    )
}
