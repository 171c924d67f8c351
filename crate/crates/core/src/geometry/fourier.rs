//! Reciprocal-space coefficients of the permittivity and its inverse.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::lattice::{build_unit_cell, Lattice2D, LatticeSpec, Region};
use super::polygon::{Point, Triangle};
use super::smoothing::smoothed_inverse_table;
use crate::error::{Error, Result};

/// Length of the primitive reciprocal vectors of the hexagonal lattice, rad/a0.
pub fn hex_reciprocal_length() -> f64 {
    4.0 * PI / 3f64.sqrt()
}

/// Blur width (a0) of the smoothed rule as a fraction of the shortest
/// half-wavelength `π/gmax` the basis resolves. Chosen from a convergence
/// sweep: wider blurs bias frequencies upwards, narrower ones converge slowly.
pub const SMOOTHING_WIDTH: f64 = 0.3;

pub fn smoothing_window(gmax: f64) -> f64 {
    SMOOTHING_WIDTH * PI / gmax
}

/// How the operator obtains the Fourier matrix of `1/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InverseRule {
    /// Invert the truncated Toeplitz matrix of `ε̂` (Ho et al.).
    Ho,
    /// Use the Fourier coefficients of `1/ε` directly.
    Direct,
    /// Fourier coefficients of an anisotropically smoothed `1/ε` tensor.
    #[default]
    Smoothed,
}

/// Fourier coefficients `ε̂(G)` and `η̂(G)` (with `η = 1/ε`) of a periodic
/// medium made of polygonal holes, tabulated for every `G = m·b1 + n·b2`
/// that can appear as a difference of two basis vectors.
#[derive(Debug, Clone)]
pub struct FourierEps {
    pub lattice: Lattice2D,
    pub recip: [Point; 2],
    /// Plane-wave cutoff |k + G| < gmax, rad/a0.
    pub gmax: f64,
    pub eps_background: f64,
    pub eps_hole: f64,
    pub rule: InverseRule,
    m_max: i32,
    n_max: i32,
    eps: Vec<Complex64>,
    eta: Vec<Complex64>,
    eta_tensor: Option<Vec<[Complex64; 3]>>,
}

impl FourierEps {
    /// Tabulates coefficients for a lattice whose unit cell contains `holes`
    /// (triangles in units of `a0`, disjoint, possibly straddling the cell
    /// boundary).
    pub fn from_holes(
        lattice: Lattice2D,
        holes: &[Triangle],
        eps_background: f64,
        eps_hole: f64,
        gmax: f64,
        rule: InverseRule,
    ) -> Self {
        let recip = lattice.reciprocal();
        let norm = |p: Point| p[0].hypot(p[1]);
        // Reach of |k + G| for any k inside the reciprocal unit cell.
        let reach = gmax + 0.5 * (norm(recip[0]) + norm(recip[1]));
        let m_basis = (reach * norm(lattice.a1) / (2.0 * PI)).ceil() as i32 + 1;
        let n_basis = (reach * norm(lattice.a2) / (2.0 * PI)).ceil() as i32 + 1;
        let (m_max, n_max) = (2 * m_basis, 2 * n_basis);
        let area = lattice.area();
        let (w, h) = ((2 * m_max + 1) as usize, (2 * n_max + 1) as usize);
        let mut eps = vec![Complex64::new(0.0, 0.0); w * h];
        let mut eta = vec![Complex64::new(0.0, 0.0); w * h];
        let (de, dn) = (
            eps_hole - eps_background,
            1.0 / eps_hole - 1.0 / eps_background,
        );
        for n in -n_max..=n_max {
            for m in -m_max..=m_max {
                let g = [
                    m as f64 * recip[0][0] + n as f64 * recip[1][0],
                    m as f64 * recip[0][1] + n as f64 * recip[1][1],
                ];
                let f: Complex64 = holes.iter().map(|t| t.fourier(g)).sum::<Complex64>() / area;
                let idx = (n + n_max) as usize * w + (m + m_max) as usize;
                eps[idx] = de * f;
                eta[idx] = dn * f;
                if m == 0 && n == 0 {
                    eps[idx] += eps_background;
                    eta[idx] += 1.0 / eps_background;
                }
            }
        }
        let eta_tensor = (rule == InverseRule::Smoothed).then(|| {
            smoothed_inverse_table(
                &lattice,
                holes,
                eps_background,
                eps_hole,
                m_max,
                n_max,
                smoothing_window(gmax),
            )
        });
        Self {
            lattice,
            recip,
            gmax,
            eps_background,
            eps_hole,
            rule,
            m_max,
            n_max,
            eps,
            eta,
            eta_tensor,
        }
    }

    /// A medium with no holes.
    pub fn uniform(lattice: Lattice2D, eps: f64, gmax: f64) -> Self {
        Self::from_holes(lattice, &[], eps, 1.0, gmax, InverseRule::Ho)
    }

    fn index(&self, m: i32, n: i32) -> Option<usize> {
        if m.abs() > self.m_max || n.abs() > self.n_max {
            return None;
        }
        let w = (2 * self.m_max + 1) as usize;
        Some((n + self.n_max) as usize * w + (m + self.m_max) as usize)
    }

    /// `ε̂(m·b1 + n·b2)`; zero outside the tabulated range.
    pub fn eps(&self, m: i32, n: i32) -> Complex64 {
        self.index(m, n)
            .map_or(Complex64::new(0.0, 0.0), |i| self.eps[i])
    }

    /// Fourier coefficient of `1/ε` at `m·b1 + n·b2`.
    pub fn eta(&self, m: i32, n: i32) -> Complex64 {
        self.index(m, n)
            .map_or(Complex64::new(0.0, 0.0), |i| self.eta[i])
    }

    /// `[η_xx, η_xy, η_yy]` of the smoothed tensor; `None` unless the rule is
    /// [`InverseRule::Smoothed`].
    pub fn eta_tensor(&self, m: i32, n: i32) -> Option<[Complex64; 3]> {
        let table = self.eta_tensor.as_ref()?;
        Some(
            self.index(m, n)
                .map_or([Complex64::new(0.0, 0.0); 3], |i| table[i]),
        )
    }

    pub fn g_vector(&self, m: i32, n: i32) -> Point {
        [
            m as f64 * self.recip[0][0] + n as f64 * self.recip[1][0],
            m as f64 * self.recip[0][1] + n as f64 * self.recip[1][1],
        ]
    }

    /// Largest index magnitudes for which coefficients are tabulated.
    pub fn table_extent(&self) -> (i32, i32) {
        (self.m_max, self.n_max)
    }

    /// Reciprocal vectors with `|k + G| < gmax`, in a fixed (n, m) order.
    /// `k` is Cartesian in rad/a0.
    pub fn basis(&self, k: Point) -> Vec<(i32, i32)> {
        let (mb, nb) = (self.m_max / 2, self.n_max / 2);
        let mut out = Vec::new();
        for n in -nb..=nb {
            for m in -mb..=mb {
                let g = self.g_vector(m, n);
                // Shells within roundoff of the cutoff are dropped whole.
                if (k[0] + g[0]).hypot(k[1] + g[1]) < self.gmax * (1.0 - 1e-9) {
                    out.push((m, n));
                }
            }
        }
        out
    }

    /// Reciprocal vectors inside the cutoff at `k = 0`.
    pub fn vectors(&self) -> Vec<(i32, i32)> {
        self.basis([0.0, 0.0])
    }
}

/// Coefficients of one bulk unit cell. `gmax` is given in units of the
/// hexagonal reciprocal-lattice constant `4π/(√3·a0)`.
pub fn fourier_epsilon(
    spec: &LatticeSpec,
    region: Region,
    gmax: f64,
    rule: InverseRule,
) -> Result<FourierEps> {
    let cell = build_unit_cell(spec, region)?;
    let fe = FourierEps::from_holes(
        Lattice2D::hexagonal(),
        &cell.triangles(spec.a0_nm),
        spec.eps_background(),
        spec.eps_hole(),
        gmax * hex_reciprocal_length(),
        rule,
    );
    let n = fe.vectors().len();
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "plane-wave cutoff {gmax} keeps only {n} reciprocal vectors; at least 100 are required"
        )));
    }
    Ok(fe)
}
