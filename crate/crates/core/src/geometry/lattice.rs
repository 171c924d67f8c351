//! Deformed honeycomb lattice of triangular holes.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::polygon::{Point, Triangle};
use crate::error::{Error, Result};
use crate::units::FrequencyScale;

/// Relative tolerance under which a centroid distance counts as `a0/3`.
pub const PRISTINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Pristine,
    Expanded,
    Shrunk,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Pristine => "pristine",
            Region::Expanded => "expanded",
            Region::Shrunk => "shrunk",
        }
    }

    /// The partner region across an interface.
    pub fn swapped(self) -> Self {
        match self {
            Region::Expanded => Region::Shrunk,
            Region::Shrunk => Region::Expanded,
            Region::Pristine => Region::Pristine,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which way each triangle points relative to the cell center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// One vertex points at the cell center; flat edges face the neighbouring cells.
    ApexInward,
    /// One vertex points away from the cell center.
    ApexOutward,
}

/// Centroid distances from the cell center for the three regions, in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSet {
    pub pristine_nm: f64,
    pub expanded_nm: f64,
    pub shrunk_nm: f64,
}

impl RadiusSet {
    pub fn standard(a0_nm: f64) -> Self {
        Self {
            pristine_nm: a0_nm / 3.0,
            expanded_nm: 1.05 * a0_nm / 3.0,
            shrunk_nm: 0.94 * a0_nm / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub a0_nm: f64,
    /// Triangle edge length.
    pub s_nm: f64,
    /// Slab thickness; carried as metadata by the 2D model.
    pub h_nm: f64,
    pub radii: RadiusSet,
    pub n_eff: f64,
    pub n_hole: f64,
    pub orientation: Orientation,
}

impl LatticeSpec {
    /// The fabricated device geometry with a given effective index.
    pub fn device(n_eff: f64) -> Self {
        Self {
            a0_nm: 445.0,
            s_nm: 140.0,
            h_nm: 160.0,
            radii: RadiusSet::standard(445.0),
            n_eff,
            n_hole: 1.0,
            orientation: Orientation::ApexInward,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.a0_nm > 0.0 && self.a0_nm.is_finite()) {
            bad.push(format!("a0 = {} nm must be positive", self.a0_nm));
        }
        if !(self.s_nm > 0.0 && self.s_nm.is_finite()) {
            bad.push(format!("s = {} nm must be positive", self.s_nm));
        }
        if !(self.h_nm > 0.0 && self.h_nm.is_finite()) {
            bad.push(format!("h = {} nm must be positive", self.h_nm));
        }
        for (name, r) in [
            ("pristine", self.radii.pristine_nm),
            ("expanded", self.radii.expanded_nm),
            ("shrunk", self.radii.shrunk_nm),
        ] {
            if !(r > 0.0 && r < self.a0_nm / 2.0) {
                bad.push(format!("{name} R = {r} nm must lie in (0, a0/2)"));
            }
        }
        if !(self.n_hole >= 1.0) {
            bad.push(format!("n_hole = {} must be >= 1", self.n_hole));
        }
        if !(self.n_eff > self.n_hole) {
            bad.push(format!(
                "n_eff = {} must exceed n_hole = {}",
                self.n_eff, self.n_hole
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(bad.join("; ")))
        }
    }

    pub fn radius_nm(&self, region: Region) -> f64 {
        match region {
            Region::Pristine => self.radii.pristine_nm,
            Region::Expanded => self.radii.expanded_nm,
            Region::Shrunk => self.radii.shrunk_nm,
        }
    }

    /// Returns a copy whose `region` uses centroid distance `r_nm`.
    pub fn with_radius(&self, region: Region, r_nm: f64) -> Self {
        let mut out = *self;
        match region {
            Region::Pristine => out.radii.pristine_nm = r_nm,
            Region::Expanded => out.radii.expanded_nm = r_nm,
            Region::Shrunk => out.radii.shrunk_nm = r_nm,
        }
        out
    }

    pub fn is_pristine_radius(&self, r_nm: f64) -> bool {
        (r_nm - self.a0_nm / 3.0).abs() <= PRISTINE_TOL * self.a0_nm
    }

    pub fn eps_background(&self) -> f64 {
        self.n_eff * self.n_eff
    }

    pub fn eps_hole(&self) -> f64 {
        self.n_hole * self.n_hole
    }

    pub fn frequency_scale(&self) -> FrequencyScale {
        FrequencyScale::for_lattice_constant(self.a0_nm)
    }

    /// Analytic hole-area fraction of one cell: six triangles over the
    /// hexagonal cell area.
    pub fn fill_fraction(&self) -> f64 {
        let tri = 3f64.sqrt() / 4.0 * self.s_nm * self.s_nm;
        6.0 * tri / (3f64.sqrt() / 2.0 * self.a0_nm * self.a0_nm)
    }

    /// Uniform length rescaling (all lengths multiplied by `alpha`).
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = *self;
        out.a0_nm *= alpha;
        out.s_nm *= alpha;
        out.h_nm *= alpha;
        out.radii.pristine_nm *= alpha;
        out.radii.expanded_nm *= alpha;
        out.radii.shrunk_nm *= alpha;
        out
    }
}

/// 2D Bravais lattice; vectors in units of `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    pub a1: Point,
    pub a2: Point,
}

impl Lattice2D {
    /// Triangular lattice with `a1 = (1, 0)` and `a2 = (1/2, √3/2)`.
    pub fn hexagonal() -> Self {
        Self {
            a1: [1.0, 0.0],
            a2: [0.5, 3f64.sqrt() / 2.0],
        }
    }

    pub fn area(&self) -> f64 {
        (self.a1[0] * self.a2[1] - self.a1[1] * self.a2[0]).abs()
    }

    /// Reciprocal vectors with `a_i · b_j = 2π δ_ij`, in rad/a0.
    pub fn reciprocal(&self) -> [Point; 2] {
        let det = self.a1[0] * self.a2[1] - self.a1[1] * self.a2[0];
        let s = 2.0 * PI / det;
        [
            [s * self.a2[1], -s * self.a2[0]],
            [-s * self.a1[1], s * self.a1[0]],
        ]
    }

    pub fn point(&self, i: f64, j: f64) -> Point {
        [
            i * self.a1[0] + j * self.a2[0],
            i * self.a1[1] + j * self.a2[1],
        ]
    }

    /// Fractional coordinates of a Cartesian point.
    pub fn fractional(&self, p: Point) -> Point {
        let [b1, b2] = self.reciprocal();
        [
            (p[0] * b1[0] + p[1] * b1[1]) / (2.0 * PI),
            (p[0] * b2[0] + p[1] * b2[1]) / (2.0 * PI),
        ]
    }
}

/// One triangular hole of a unit cell, positioned relative to the cell center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolePlacement {
    pub centroid_nm: Point,
    /// Direction of one vertex as seen from the centroid (rad).
    pub apex_angle: f64,
    pub edge_nm: f64,
}

impl HolePlacement {
    /// The hole as a triangle in units of `a0`.
    pub fn triangle(&self, a0_nm: f64) -> Triangle {
        Triangle::equilateral(
            [self.centroid_nm[0] / a0_nm, self.centroid_nm[1] / a0_nm],
            self.edge_nm / a0_nm / 3f64.sqrt(),
            self.apex_angle,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCell {
    pub region: Region,
    pub r_nm: f64,
    pub holes: Vec<HolePlacement>,
}

impl UnitCell {
    /// The six holes in units of `a0`, relative to the cell center.
    pub fn triangles(&self, a0_nm: f64) -> Vec<Triangle> {
        self.holes.iter().map(|h| h.triangle(a0_nm)).collect()
    }
}

/// Places six equilateral holes at distance R from the cell center, at
/// angles `jπ/3`, oriented per `spec.orientation`.
pub fn build_unit_cell(spec: &LatticeSpec, region: Region) -> Result<UnitCell> {
    spec.validate()?;
    let r = spec.radius_nm(region);
    let flip = match spec.orientation {
        Orientation::ApexInward => PI,
        Orientation::ApexOutward => 0.0,
    };
    let holes: Vec<HolePlacement> = (0..6)
        .map(|j| {
            let theta = j as f64 * PI / 3.0;
            HolePlacement {
                centroid_nm: [r * theta.cos(), r * theta.sin()],
                apex_angle: theta + flip,
                edge_nm: spec.s_nm,
            }
        })
        .collect();
    let cell = UnitCell {
        region,
        r_nm: r,
        holes,
    };
    check_disjoint(&cell, spec)?;
    Ok(cell)
}

fn check_disjoint(cell: &UnitCell, spec: &LatticeSpec) -> Result<()> {
    let tris = cell.triangles(spec.a0_nm);
    let lat = Lattice2D::hexagonal();
    let tol = 1e-9;
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            if tris[i].overlaps(&tris[j], tol) {
                return Err(Error::InvalidGeometry(format!(
                    "holes {i} and {j} of the {} cell overlap (s = {} nm, R = {:.3} nm, {:?})",
                    cell.region, spec.s_nm, cell.r_nm, spec.orientation
                )));
            }
        }
    }
    // Holes must also clear those of the six neighbouring cells.
    for (di, dj) in [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)] {
        let d = lat.point(di as f64, dj as f64);
        for a in &tris {
            for b in &tris {
                if a.overlaps(&b.translated(d), tol) {
                    return Err(Error::InvalidGeometry(format!(
                        "holes of adjacent {} cells overlap (s = {} nm, R = {:.3} nm)",
                        cell.region, spec.s_nm, cell.r_nm
                    )));
                }
            }
        }
    }
    Ok(())
}
