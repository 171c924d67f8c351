//! Ribbon supercells: a column of `N` cells stacked along `a2`, periodic in
//! both directions.
//!
//! Row `j` is the cell centred at `j·a2`. Rows `0..n_shrunk` are shrunk and
//! the remaining rows expanded, so the periodic stack carries two interfaces.
//! Interface A has the expanded crystal on the `-y` side and the shrunk one
//! on the `+y` side; interface B is its mirror image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    build_unit_cell, hex_reciprocal_length, FourierEps, InverseRule, Lattice2D, LatticeSpec,
    Region, Triangle,
};

/// Minimum number of rows of each crystal in an interface supercell.
pub const MIN_ROWS: usize = 6;

/// Row pitch along `y`, in units of a0.
pub const ROW_PITCH: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterfaceTag {
    A,
    B,
    #[serde(rename = "bulk")]
    Bulk,
}

impl InterfaceTag {
    pub fn name(self) -> &'static str {
        match self {
            InterfaceTag::A => "A",
            InterfaceTag::B => "B",
            InterfaceTag::Bulk => "bulk",
        }
    }
}

/// An interface sits on the boundary between rows `boundary - 1` and
/// `boundary` (indices modulo the row count).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceSite {
    pub boundary: usize,
    pub tag: InterfaceTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supercell {
    pub spec: LatticeSpec,
    pub rows: Vec<Region>,
    pub lattice: Lattice2D,
    pub interfaces: Vec<InterfaceSite>,
}

impl Supercell {
    fn from_rows(spec: &LatticeSpec, rows: Vec<Region>) -> Result<Self> {
        spec.validate()?;
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGeometry(
                "supercell needs at least one row".into(),
            ));
        }
        let hex = Lattice2D::hexagonal();
        let lattice = Lattice2D {
            a1: hex.a1,
            a2: [n as f64 * hex.a2[0], n as f64 * hex.a2[1]],
        };
        let interfaces = (0..n)
            .filter_map(|b| {
                let below = rows[(b + n - 1) % n];
                let above = rows[b];
                match (below, above) {
                    (Region::Expanded, Region::Shrunk) => Some(InterfaceSite {
                        boundary: b,
                        tag: InterfaceTag::A,
                    }),
                    (Region::Shrunk, Region::Expanded) => Some(InterfaceSite {
                        boundary: b,
                        tag: InterfaceTag::B,
                    }),
                    _ => None,
                }
            })
            .collect();
        Ok(Self {
            spec: *spec,
            rows,
            lattice,
            interfaces,
        })
    }

    /// A single-crystal stack, used to check band folding.
    pub fn uniform(spec: &LatticeSpec, region: Region, n: usize) -> Result<Self> {
        Self::from_rows(spec, vec![region; n])
    }

    /// Exchanges expanded and shrunk rows, which swaps the interface types.
    pub fn swapped(&self) -> Result<Self> {
        Self::from_rows(&self.spec, self.rows.iter().map(|r| r.swapped()).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Transverse period in units of a0.
    pub fn width_a0(&self) -> f64 {
        self.n_rows() as f64 * ROW_PITCH
    }

    pub fn interface(&self, tag: InterfaceTag) -> Option<InterfaceSite> {
        self.interfaces.iter().copied().find(|s| s.tag == tag)
    }

    /// Holes of every row, in units of a0.
    pub fn holes(&self) -> Result<Vec<Triangle>> {
        let hex = Lattice2D::hexagonal();
        let mut out = Vec::with_capacity(6 * self.n_rows());
        let mut cache: Vec<(Region, Vec<Triangle>)> = Vec::new();
        for (j, &region) in self.rows.iter().enumerate() {
            if !cache.iter().any(|(r, _)| *r == region) {
                cache.push((
                    region,
                    build_unit_cell(&self.spec, region)?.triangles(self.spec.a0_nm),
                ));
            }
            let proto = &cache.iter().find(|(r, _)| *r == region).expect("cached").1;
            let c = hex.point(0.0, j as f64);
            out.extend(proto.iter().map(|t| t.translated(c)));
        }
        Ok(out)
    }

    /// Fourier coefficients on the supercell reciprocal lattice; `gmax` is in
    /// units of the bulk reciprocal-lattice constant, as for bulk solves.
    pub fn fourier(&self, gmax: f64, rule: InverseRule) -> Result<FourierEps> {
        Ok(FourierEps::from_holes(
            self.lattice,
            &self.holes()?,
            self.spec.eps_background(),
            self.spec.eps_hole(),
            gmax * hex_reciprocal_length(),
            rule,
        ))
    }

    /// Signed distance in rows from the center of row `j` to `boundary`,
    /// wrapped to `[-N/2, N/2)`.
    pub fn row_offset(&self, j: usize, boundary: usize) -> f64 {
        let n = self.n_rows() as f64;
        let d = j as f64 + 0.5 - boundary as f64;
        (d + 0.5 * n).rem_euclid(n) - 0.5 * n
    }
}

/// Interface supercell with `n_shrunk` shrunk rows followed by `n_expanded`
/// expanded rows.
pub fn build_supercell(
    spec: &LatticeSpec,
    n_shrunk: usize,
    n_expanded: usize,
) -> Result<Supercell> {
    if n_shrunk < MIN_ROWS || n_expanded < MIN_ROWS {
        return Err(Error::InvalidGeometry(format!(
            "supercell needs at least {MIN_ROWS} rows of each crystal, got {n_shrunk} shrunk and {n_expanded} expanded"
        )));
    }
    let mut rows = vec![Region::Shrunk; n_shrunk];
    rows.extend(std::iter::repeat_n(Region::Expanded, n_expanded));
    Supercell::from_rows(spec, rows)
}
