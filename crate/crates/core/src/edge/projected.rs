//! Projected band structure of a ribbon supercell.

use faer::Side;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use super::analysis::{
    interface_half, localize_profile, row_overlaps, spin_texture, SupercellMode,
};
use super::supercell::{InterfaceTag, Supercell};
use crate::bands::{eta_matrix, BlochVector, EtaMatrix, PlaneWaveBasis, PweSettings};
use crate::error::{Error, Result};
use crate::geometry::FourierEps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSettings {
    pub pwe: PweSettings,
    /// Only modes below this dimensionless frequency are reported.
    pub ceiling_nu: f64,
    /// Largest splitting of an interface-hybridized pair that is undone.
    pub pair_tol: f64,
    /// Fill negative `k_x` from positive samples by time reversal.
    pub mirror: bool,
}

impl Default for EdgeSettings {
    fn default() -> Self {
        Self {
            pwe: PweSettings {
                gmax: 6.0,
                ..PweSettings::default()
            },
            ceiling_nu: 0.52,
            pair_tol: 3e-3,
            mirror: true,
        }
    }
}

/// `2n + 1` samples of `k_x` spanning `[-kmax, kmax]`, symmetric bit for bit.
pub fn kx_grid(kmax: f64, n: usize) -> Vec<f64> {
    let pos: Vec<f64> = (1..=n).map(|i| kmax * i as f64 / n as f64).collect();
    pos.iter()
        .rev()
        .map(|k| -k)
        .chain(std::iter::once(0.0))
        .chain(pos.iter().copied())
        .collect()
}

/// Direction of `dk/dφ` in rad/a0 per radian for `k = φ·B1/2π`.
const DK_DPHI: [f64; 2] = [1.0, -0.577_350_269_189_625_8];

/// Bloch vector with `k·a1 = φ` and `k·A2 = 0` (`k = kx·(1, -1/√3)` in 2π/a0).
pub fn supercell_k(kx: f64) -> BlochVector {
    BlochVector::new(kx, -kx / 3f64.sqrt())
}

fn hf_velocity(eta: &EtaMatrix, basis: &PlaneWaveBasis, u: &[Complex64], nu: f64) -> f64 {
    // λ = (2πν)², so dν/dk_x = (dλ/dφ)(dφ/dk_x) / (8π²ν) with dφ/dk_x = 2π.
    let dlam = eta.derivative_expectation(&basis.q, DK_DPHI, u);
    if nu > 0.0 {
        dlam / (4.0 * PI * nu)
    } else {
        0.0
    }
}

/// Eigenmodes below the ceiling at one `k_x` (units of 2π/a0). Pairs of
/// modes hybridized across the two interfaces are rotated into their
/// interface-localized combinations.
pub fn solve_supercell_modes(
    cell: &Supercell,
    eps: &FourierEps,
    kx: f64,
    settings: &EdgeSettings,
) -> Result<Vec<SupercellMode>> {
    let k = supercell_k(kx);
    let basis = PlaneWaveBasis::new(eps, k);
    let eta = eta_matrix(eps, &basis)?;
    let n = basis.len();
    let m = eta.te_operator(&basis.q);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen {
            kx: k.kx,
            ky: k.ky,
            reason: format!("{e:?}"),
        })?;
    let lam_ceiling = (2.0 * PI * settings.ceiling_nu).powi(2);
    let s = evd.S();
    let u = evd.U();
    let count = (0..n).take_while(|&i| s[i].re < lam_ceiling).count();
    let lams: Vec<f64> = (0..count).map(|i| s[i].re.max(0.0)).collect();
    let mut vecs: Vec<Vec<Complex64>> = (0..count)
        .map(|j| (0..n).map(|i| u[(i, j)]).collect())
        .collect();
    drop(evd);
    drop(m);

    let basis = Arc::new(basis);
    let mut lam_out = lams.clone();
    if cell.interface(InterfaceTag::A).is_some() && cell.interface(InterfaceTag::B).is_some() {
        let half_a = interface_half(cell, InterfaceTag::A);
        let weight_a = |w: &Vec<Vec<Vec<Complex64>>>, a: usize, b: usize| -> Complex64 {
            half_a.iter().map(|&j| w[j][a][b]).sum::<Complex64>()
        };
        let refs: Vec<&[Complex64]> = vecs.iter().map(|v| v.as_slice()).collect();
        let w = row_overlaps(&basis, &refs, cell.n_rows());
        let totals: Vec<f64> = (0..count)
            .map(|a| w.iter().map(|r| r[a][a].re).sum())
            .collect();
        let wa: Vec<f64> = (0..count)
            .map(|a| weight_a(&w, a, a).re / totals[a])
            .collect();
        let mixed = |a: usize| wa[a] > 0.2 && wa[a] < 0.8;
        let mut a = 0;
        while a + 1 < count {
            let b = a + 1;
            let nu_a = lams[a].sqrt() / (2.0 * PI);
            let nu_b = lams[b].sqrt() / (2.0 * PI);
            if !(mixed(a) && mixed(b) && nu_b - nu_a < settings.pair_tol) {
                a += 1;
                continue;
            }
            // Diagonalize the A-half weight inside the pair.
            let h = [
                [weight_a(&w, a, a), weight_a(&w, a, b)],
                [weight_a(&w, b, a), weight_a(&w, b, b)],
            ];
            let (x, y, z) = (h[0][0].re, h[0][1], h[1][1].re);
            let disc = ((0.5 * (x - z)).powi(2) + y.norm_sqr()).sqrt();
            let hi = 0.5 * (x + z) + disc;
            // Eigenvector for the larger eigenvalue, then its orthogonal partner.
            let (mut p, mut r) = if y.norm() > 1e-300 {
                (y, Complex64::new(hi - x, 0.0))
            } else if x >= z {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
            };
            let nrm = (p.norm_sqr() + r.norm_sqr()).sqrt();
            p /= nrm;
            r /= nrm;
            let va: Vec<Complex64> = vecs[a]
                .iter()
                .zip(&vecs[b])
                .map(|(s, t)| p * s + r * t)
                .collect();
            let vb: Vec<Complex64> = vecs[a]
                .iter()
                .zip(&vecs[b])
                .map(|(s, t)| -r.conj() * s + p.conj() * t)
                .collect();
            let refs2: [&[Complex64]; 2] = [&va, &vb];
            let w2 = row_overlaps(&basis, &refs2, cell.n_rows());
            let share = |i: usize| {
                let t: f64 = w2.iter().map(|row| row[i][i].re).sum();
                half_a.iter().map(|&j| w2[j][i][i].re).sum::<f64>() / t
            };
            let (sa, sb) = (share(0), share(1));
            if sa.max(sb) > 0.8 && sa.min(sb) < 0.2 {
                let la = p.norm_sqr() * lams[a] + r.norm_sqr() * lams[b];
                let lb = r.norm_sqr() * lams[a] + p.norm_sqr() * lams[b];
                vecs[a] = va;
                vecs[b] = vb;
                lam_out[a] = la;
                lam_out[b] = lb;
                a += 2;
            } else {
                a += 1;
            }
        }
    }

    let phi = 2.0 * PI * kx;
    let mut modes: Vec<SupercellMode> = vecs
        .into_iter()
        .zip(lam_out)
        .map(|(coeffs, lam)| {
            let nu = lam.sqrt() / (2.0 * PI);
            let vg = hf_velocity(&eta, &basis, &coeffs, nu);
            SupercellMode {
                phi,
                nu,
                band: 0,
                coeffs,
                basis: Arc::clone(&basis),
                vg,
            }
        })
        .collect();
    modes.sort_by(|x, y| x.nu.total_cmp(&y.nu));
    for (i, m) in modes.iter_mut().enumerate() {
        m.band = i;
    }
    Ok(modes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMode {
    /// Wavevector along the interface, units of 2π/a0.
    pub kx: f64,
    pub band: usize,
    pub nu: f64,
    pub thz: f64,
    pub tag: InterfaceTag,
    /// Interface the mode leans towards, even when tagged bulk.
    pub nearest: InterfaceTag,
    pub weight_a: f64,
    pub loc_center_a0: f64,
    pub loc_len_a0: f64,
    /// Group velocity `dν/dk_x` in units of c.
    pub vg: f64,
    /// Spin texture at the interface cell; `None` where the field vanishes.
    pub spin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBandSet {
    pub kx: Vec<f64>,
    /// Sorted by `kx` sample order, then frequency.
    pub modes: Vec<EdgeMode>,
    pub c_over_a0_thz: f64,
    pub width_a0: f64,
    pub n_rows: usize,
    pub settings: EdgeSettings,
}

impl EdgeBandSet {
    pub fn at(&self, kx: f64) -> impl Iterator<Item = &EdgeMode> {
        self.modes.iter().filter(move |m| m.kx == kx)
    }

    pub fn tagged(&self, tag: InterfaceTag) -> impl Iterator<Item = &EdgeMode> {
        self.modes.iter().filter(move |m| m.tag == tag)
    }
}

/// Analyses one supercell mode.
pub fn describe_mode(mode: &SupercellMode, cell: &Supercell, c_over_a0_thz: f64) -> EdgeMode {
    let profile = super::analysis::row_profile(mode, cell);
    let loc = localize_profile(cell, &profile);
    let spin = if loc.nearest == InterfaceTag::Bulk {
        None
    } else {
        spin_texture(mode, cell, loc.nearest).ok()
    };
    EdgeMode {
        kx: mode.kx(),
        band: mode.band,
        nu: mode.nu,
        thz: mode.nu * c_over_a0_thz,
        tag: loc.tag,
        nearest: loc.nearest,
        weight_a: loc.weight_a,
        loc_center_a0: loc.center_a0,
        loc_len_a0: loc.length_a0,
        vg: mode.vg,
        spin,
    }
}

fn time_reversed(m: &EdgeMode) -> EdgeMode {
    EdgeMode {
        kx: -m.kx,
        vg: -m.vg,
        spin: m.spin.map(|s| -s),
        ..*m
    }
}

/// Modes below the ceiling at every `k_x` sample (units of 2π/a0, within
/// `[-1/2, 1/2]`), each tagged by interface or as bulk.
pub fn solve_projected_bands(
    cell: &Supercell,
    kx_samples: &[f64],
    settings: &EdgeSettings,
) -> Result<EdgeBandSet> {
    if let Some(k) = kx_samples.iter().find(|k| !(k.abs() <= 0.5)) {
        return Err(Error::InvalidArgument(format!(
            "k_x = {k} lies outside [-1/2, 1/2] (units of 2π/a0)"
        )));
    }
    let eps = cell.fourier(settings.pwe.gmax, settings.pwe.rule)?;
    let c = cell.spec.frequency_scale().c_over_a0_thz;
    let mut solve_list: Vec<f64> = kx_samples
        .iter()
        .map(|&k| if settings.mirror { k.abs() } else { k })
        .collect();
    solve_list.sort_by(f64::total_cmp);
    solve_list.dedup();
    let solved: Vec<(f64, Vec<EdgeMode>)> = solve_list
        .par_iter()
        .map(|&kx| {
            let modes = solve_supercell_modes(cell, &eps, kx, settings)?;
            Ok((
                kx,
                modes.iter().map(|m| describe_mode(m, cell, c)).collect(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut modes = Vec::new();
    for &kx in kx_samples {
        let key = if settings.mirror { kx.abs() } else { kx };
        let (_, set) = solved.iter().find(|(k, _)| *k == key).expect("solved");
        // Modes carry the caller's sample exactly so that `at` can match it.
        let exact = |m: EdgeMode| EdgeMode { kx, ..m };
        if key == kx {
            modes.extend(set.iter().copied().map(exact));
        } else {
            modes.extend(set.iter().map(time_reversed).map(exact));
        }
    }
    Ok(EdgeBandSet {
        kx: kx_samples.to_vec(),
        modes,
        c_over_a0_thz: c,
        width_a0: cell.width_a0(),
        n_rows: cell.n_rows(),
        settings: *settings,
    })
}
