//! Field reconstruction for supercell modes: transverse profiles,
//! localization and local circular polarization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::supercell::{InterfaceTag, Supercell, ROW_PITCH};
use crate::bands::PlaneWaveBasis;
use crate::error::{Error, Result};
use crate::geometry::{Lattice2D, Point};

/// Transverse samples per row used for profiles.
const SAMPLES_PER_ROW: usize = 8;
/// Half-width (a0) of the 5×5 stencil used for the spin texture.
pub const STENCIL_HALF_WIDTH: f64 = 0.05;

/// One eigenmode (or localized combination of a hybridized pair) of a
/// ribbon supercell.
#[derive(Debug, Clone)]
pub struct SupercellMode {
    /// Bloch phase per cell along the interface, `k·a1` (rad).
    pub phi: f64,
    pub nu: f64,
    /// Position of the mode in the sorted spectrum at this `phi`.
    pub band: usize,
    /// Unit-norm plane-wave amplitudes of `H_z` on `basis`.
    pub coeffs: Vec<Complex64>,
    pub basis: Arc<PlaneWaveBasis>,
    /// `dν/dk_x` with `k_x` in units of 2π/a0, i.e. the group velocity in units of c.
    pub vg: f64,
}

impl SupercellMode {
    pub fn kx(&self) -> f64 {
        self.phi / (2.0 * std::f64::consts::PI)
    }

    /// `H_z` and its gradient at a Cartesian point (a0 units).
    pub fn field_at(&self, r: Point) -> (Complex64, [Complex64; 2]) {
        let mut h = Complex64::new(0.0, 0.0);
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for (q, c) in self.basis.q.iter().zip(&self.coeffs) {
            let t = c * Complex64::from_polar(1.0, q[0] * r[0] + q[1] * r[1]);
            h += t;
            gx += Complex64::new(0.0, q[0]) * t;
            gy += Complex64::new(0.0, q[1]) * t;
        }
        (h, [gx, gy])
    }
}

/// Sums over plane waves sharing the index along `B1`, evaluated on the
/// transverse sample grid: `F[m][s] = Σ_n c_mn exp(2πi n v_s)`.
fn transverse_components(
    basis: &PlaneWaveBasis,
    coeffs: &[Complex64],
    n_rows: usize,
) -> Vec<Vec<Complex64>> {
    let mut groups: BTreeMap<i32, Vec<(i32, Complex64)>> = BTreeMap::new();
    for (&(m, n), &c) in basis.indices.iter().zip(coeffs) {
        groups.entry(m).or_default().push((n, c));
    }
    let ns = n_rows * SAMPLES_PER_ROW;
    let vs: Vec<f64> = (0..ns)
        .map(|s| (s as f64 + 0.5) / SAMPLES_PER_ROW as f64 - 0.5)
        .map(|row_pos| row_pos / n_rows as f64)
        .collect();
    groups
        .values()
        .map(|terms| {
            vs.iter()
                .map(|&v| {
                    terms
                        .iter()
                        .map(|&(n, c)| {
                            c * Complex64::from_polar(
                                1.0,
                                2.0 * std::f64::consts::PI * n as f64 * v,
                            )
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Overlap matrices `W[j][a][b] = ⟨mode a| P_j |mode b⟩` of the projector on
/// row `j` (averaged along the interface), for a set of coefficient vectors.
pub fn row_overlaps(
    basis: &PlaneWaveBasis,
    modes: &[&[Complex64]],
    n_rows: usize,
) -> Vec<Vec<Vec<Complex64>>> {
    let comps: Vec<Vec<Vec<Complex64>>> = modes
        .iter()
        .map(|c| transverse_components(basis, c, n_rows))
        .collect();
    let k = modes.len();
    let mut w = vec![vec![vec![Complex64::new(0.0, 0.0); k]; k]; n_rows];
    for a in 0..k {
        for b in a..k {
            for (fa, fb) in comps[a].iter().zip(&comps[b]) {
                for (s, (x, y)) in fa.iter().zip(fb).enumerate() {
                    w[s / SAMPLES_PER_ROW][a][b] += x.conj() * y;
                }
            }
            for row in w.iter_mut() {
                row[b][a] = row[a][b].conj();
            }
        }
    }
    for row in w.iter_mut() {
        for x in row.iter_mut().flatten() {
            *x /= (n_rows * SAMPLES_PER_ROW) as f64;
        }
    }
    w
}

/// Share of `|H_z|²` in each row, summing to one.
pub fn row_profile(mode: &SupercellMode, cell: &Supercell) -> Vec<f64> {
    let w = row_overlaps(&mode.basis, &[&mode.coeffs], cell.n_rows());
    let p: Vec<f64> = w.iter().map(|m| m[0][0].re).collect();
    let total: f64 = p.iter().sum();
    p.into_iter().map(|x| x / total).collect()
}

/// Rows closer to interface `tag` than to the other interface.
pub fn interface_half(cell: &Supercell, tag: InterfaceTag) -> Vec<usize> {
    let (Some(own), Some(other)) = (
        cell.interface(tag),
        cell.interfaces.iter().find(|s| s.tag != tag),
    ) else {
        return Vec::new();
    };
    (0..cell.n_rows())
        .filter(|&j| {
            cell.row_offset(j, own.boundary).abs() < cell.row_offset(j, other.boundary).abs()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub tag: InterfaceTag,
    /// Interface the mode leans towards, whatever its extent.
    pub nearest: InterfaceTag,
    pub weight_a: f64,
    /// Transverse coordinate `y` of the intensity centroid (a0), taken on the
    /// periodic row circle.
    pub center_a0: f64,
    /// Decay length of the row intensity away from the nearest interface (a0).
    pub length_a0: f64,
}

/// Decay length of `profile` away from `boundary`, from a least-squares fit
/// of `ln I = c - d/ℓ` over rows within a quarter period of the boundary.
pub fn fit_decay_length(cell: &Supercell, profile: &[f64], boundary: usize) -> f64 {
    let quarter = 0.25 * cell.n_rows() as f64;
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .filter_map(|(j, &p)| {
            let d = cell.row_offset(j, boundary).abs();
            (d < quarter).then(|| (d * ROW_PITCH, p.max(1e-300).ln()))
        })
        .collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if slope < 0.0 {
        -1.0 / slope
    } else {
        f64::INFINITY
    }
}

pub fn localize_profile(cell: &Supercell, profile: &[f64]) -> Localization {
    let n = cell.n_rows();
    let theta = |j: usize| 2.0 * std::f64::consts::PI * j as f64 / n as f64;
    let (cx, cy) = profile
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(x, y), (j, p)| {
            (x + p * theta(j).cos(), y + p * theta(j).sin())
        });
    let center_a0 = cy.atan2(cx).rem_euclid(2.0 * std::f64::consts::PI)
        / (2.0 * std::f64::consts::PI)
        * n as f64
        * ROW_PITCH;
    let half_a = interface_half(cell, InterfaceTag::A);
    let weight_a: f64 = half_a.iter().map(|&j| profile[j]).sum();
    let nearest = match (
        cell.interface(InterfaceTag::A),
        cell.interface(InterfaceTag::B),
    ) {
        (Some(_), Some(_)) => {
            if weight_a >= 0.5 {
                InterfaceTag::A
            } else {
                InterfaceTag::B
            }
        }
        (Some(_), None) => InterfaceTag::A,
        (None, Some(_)) => InterfaceTag::B,
        (None, None) => InterfaceTag::Bulk,
    };
    let length_a0 = cell.interface(nearest).map_or(f64::INFINITY, |s| {
        fit_decay_length(cell, profile, s.boundary)
    });
    let tag = if length_a0 > 0.25 * cell.width_a0() {
        InterfaceTag::Bulk
    } else {
        nearest
    };
    Localization {
        tag,
        nearest,
        weight_a,
        center_a0,
        length_a0,
    }
}

/// Intensity decay length (a0) of the mode away from the interface it leans
/// towards; infinite when the profile does not decay.
pub fn localization_length(mode: &SupercellMode, cell: &Supercell) -> f64 {
    localize_profile(cell, &row_profile(mode, cell)).length_a0
}

/// Cell centers adjacent to an interface: `[+y side, -y side]`.
pub fn interface_cell_centers(cell: &Supercell, tag: InterfaceTag) -> Option<[Point; 2]> {
    let site = cell.interface(tag)?;
    let n = cell.n_rows();
    let hex = Lattice2D::hexagonal();
    let above = site.boundary;
    let below = (site.boundary + n - 1) % n;
    // Keep both cells on the same side of the periodic seam.
    let below_pos = if below > above {
        below as f64 - n as f64
    } else {
        below as f64
    };
    Some([hex.point(0.0, above as f64), hex.point(0.0, below_pos)])
}

/// Normalized circular-polarization content of the in-plane electric field,
/// averaged as Stokes parameters over a 5×5 stencil centred at `site`.
///
/// `S = -2 Im(E_x* E_y) / (|E_x|² + |E_y|²)` for phasors with time
/// dependence `exp(-iωt)`, so `E ∝ (1, -i)` gives `S = +1`.
pub fn spin_texture_at(mode: &SupercellMode, site: Point) -> Result<f64> {
    let mut s0 = 0.0;
    let mut s3 = 0.0;
    for a in -2..=2 {
        for b in -2..=2 {
            let r = [
                site[0] + 0.5 * STENCIL_HALF_WIDTH * a as f64,
                site[1] + 0.5 * STENCIL_HALF_WIDTH * b as f64,
            ];
            let (_, g) = mode.field_at(r);
            // Background permittivity is constant on the stencil; E ∝ (∂y H, -∂x H).
            let (ex, ey) = (g[1], -g[0]);
            s0 += ex.norm_sqr() + ey.norm_sqr();
            s3 += -2.0 * (ex.conj() * ey).im;
        }
    }
    let scale: f64 = mode
        .basis
        .q
        .iter()
        .zip(&mode.coeffs)
        .map(|(q, c)| (q[0] * q[0] + q[1] * q[1]) * c.norm_sqr())
        .sum();
    if s0 <= 1e-10 * 25.0 * scale {
        return Err(Error::UndefinedTexture(format!(
            "in-plane field vanishes at ({:.3}, {:.3}) a0",
            site[0], site[1]
        )));
    }
    Ok((s3 / s0).clamp(-1.0, 1.0))
}

/// Spin texture at the center of the interface-adjacent cell on the shrunk
/// side of the mode's interface.
pub fn spin_texture(mode: &SupercellMode, cell: &Supercell, tag: InterfaceTag) -> Result<f64> {
    let sites = interface_cell_centers(cell, tag).ok_or_else(|| {
        Error::UndefinedTexture(format!("supercell has no interface {}", tag.name()))
    })?;
    let region_above = cell.rows[cell.interface(tag).expect("checked").boundary];
    let site = if region_above == crate::geometry::Region::Shrunk {
        sites[0]
    } else {
        sites[1]
    };
    spin_texture_at(mode, site)
}
