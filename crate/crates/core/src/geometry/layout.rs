//! Finite device layouts: which cells are expanded and which are shrunk.
//!
//! Cell `(i, j)` is centred at `i·a1 + j·a2`. Layouts are described by a rule
//! over lattice indices plus a rectangular extent in units of `a0`; cells
//! whose centers fall in the half-open rectangle belong to the device, and
//! holes of cells just outside it are still drawn when rasterizing.

use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use super::lattice::{build_unit_cell, Lattice2D, LatticeSpec, Region};
use super::polygon::{Point, Triangle};
use crate::error::{Error, Result};

/// Axis-aligned rectangle in units of `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Half-open containment `[x0, x1) × [y0, y1)`.
    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] < self.x1 && p[1] >= self.y0 && p[1] < self.y1
    }

    pub fn expanded(&self, m: f64) -> Rect {
        Rect {
            x0: self.x0 - m,
            x1: self.x1 + m,
            y0: self.y0 - m,
            y1: self.y1 + m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfaceKind {
    Straight,
    Bend60,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutKind {
    /// Unpatterned slab.
    Homogeneous,
    /// Every cell of one region.
    Bulk { region: Region },
    /// Shrunk for `j >= 0`, expanded below; the interface runs along `a1`
    /// at `y = -√3/4`.
    Straight,
    /// Like `Straight` for `i <= 0`; the interface turns by 60° at
    /// `(1/4, -√3/4)` and continues along `a2` between columns `i = 0` and `i = 1`.
    Bend60,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceLayout {
    pub kind: LayoutKind,
    pub bounds: Rect,
    /// Arm length in cells (interface layouts only).
    pub arm_length: usize,
    /// Rows on each side of the interface (interface layouts only).
    pub width: usize,
    /// Exchanges expanded and shrunk everywhere.
    pub swapped: bool,
}

/// Corner of the bend and the height of the straight interface line.
pub fn interface_vertex() -> Point {
    [0.25, -3f64.sqrt() / 4.0]
}

const NEIGHBOURS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

impl DeviceLayout {
    pub fn homogeneous(bounds: Rect) -> Self {
        Self {
            kind: LayoutKind::Homogeneous,
            bounds,
            arm_length: 0,
            width: 0,
            swapped: false,
        }
    }

    pub fn bulk(region: Region, bounds: Rect) -> Self {
        Self {
            kind: LayoutKind::Bulk { region },
            bounds,
            arm_length: 0,
            width: 0,
            swapped: false,
        }
    }

    pub fn with_bounds(mut self, bounds: Rect) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn swapped_regions(mut self) -> Self {
        self.swapped = !self.swapped;
        self
    }

    /// Region of cell `(i, j)`, or `None` if the layout has no holes.
    pub fn region_at(&self, i: i32, j: i32) -> Option<Region> {
        let r = match self.kind {
            LayoutKind::Homogeneous => return None,
            LayoutKind::Bulk { region } => region,
            LayoutKind::Straight => {
                if j >= 0 {
                    Region::Shrunk
                } else {
                    Region::Expanded
                }
            }
            LayoutKind::Bend60 => {
                if j >= 0 && i <= 0 {
                    Region::Shrunk
                } else {
                    Region::Expanded
                }
            }
        };
        Some(if self.swapped { r.swapped() } else { r })
    }

    pub fn cell_center(i: i32, j: i32) -> Point {
        Lattice2D::hexagonal().point(i as f64, j as f64)
    }

    /// Cells whose centers lie inside `rect` (half-open).
    pub fn cells_in(&self, rect: &Rect) -> Vec<(i32, i32)> {
        let h = 3f64.sqrt() / 2.0;
        let j0 = (rect.y0 / h).floor() as i32 - 1;
        let j1 = (rect.y1 / h).ceil() as i32 + 1;
        let mut out = Vec::new();
        for j in j0..=j1 {
            let i0 = (rect.x0 - 0.5 * j as f64).floor() as i32 - 1;
            let i1 = (rect.x1 - 0.5 * j as f64).ceil() as i32 + 1;
            for i in i0..=i1 {
                if rect.contains(Self::cell_center(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Cells that belong to the device.
    pub fn cells(&self) -> Vec<(i32, i32)> {
        self.cells_in(&self.bounds)
    }

    /// Holes (in units of `a0`) of every cell that can intersect `rect`.
    pub fn holes_near(&self, spec: &LatticeSpec, rect: &Rect) -> Result<Vec<Triangle>> {
        if matches!(self.kind, LayoutKind::Homogeneous) {
            return Ok(Vec::new());
        }
        let mut protos: BTreeMap<Region, Vec<Triangle>> = BTreeMap::new();
        let mut out = Vec::new();
        for (i, j) in self.cells_in(&rect.expanded(0.6)) {
            let Some(region) = self.region_at(i, j) else {
                continue;
            };
            if let Entry::Vacant(e) = protos.entry(region) {
                e.insert(build_unit_cell(spec, region)?.triangles(spec.a0_nm));
            }
            let c = Self::cell_center(i, j);
            out.extend(protos[&region].iter().map(|t| t.translated(c)));
        }
        Ok(out)
    }

    /// Nearest-neighbour cell pairs inside the device with differing regions,
    /// each listed once with the shrunk cell first.
    pub fn interface_pairs(&self) -> Vec<((i32, i32), (i32, i32))> {
        let cells: BTreeSet<(i32, i32)> = self.cells().into_iter().collect();
        let mut out = Vec::new();
        for &(i, j) in &cells {
            for (di, dj) in &NEIGHBOURS[..3] {
                let n = (i + di, j + dj);
                if !cells.contains(&n) {
                    continue;
                }
                let (a, b) = (self.region_at(i, j), self.region_at(n.0, n.1));
                if a != b {
                    if a == Some(Region::Shrunk) {
                        out.push(((i, j), n));
                    } else {
                        out.push((n, (i, j)));
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Number of connected components of the interface, where two pairs are
    /// joined when they share a cell.
    pub fn interface_components(&self) -> usize {
        let pairs = self.interface_pairs();
        let n = pairs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut owner: BTreeMap<(i32, i32), usize> = BTreeMap::new();
        for (k, (a, b)) in pairs.iter().enumerate() {
            for c in [a, b] {
                if let Some(&o) = owner.get(c) {
                    let (ra, rb) = (find(&mut parent, o), find(&mut parent, k));
                    parent[ra] = rb;
                } else {
                    owner.insert(*c, k);
                }
            }
        }
        (0..n).filter(|&k| find(&mut parent, k) == k).count()
    }

    /// The interface as a polyline in units of `a0`.
    pub fn interface_polyline(&self) -> Vec<Point> {
        let v = interface_vertex();
        match self.kind {
            LayoutKind::Straight => vec![[self.bounds.x0, v[1]], [self.bounds.x1, v[1]]],
            LayoutKind::Bend60 => {
                let l = self.arm_length as f64;
                vec![
                    [v[0] - l, v[1]],
                    v,
                    [v[0] + 0.5 * l, v[1] + 3f64.sqrt() / 2.0 * l],
                ]
            }
            _ => Vec::new(),
        }
    }
}

/// Straight or 60°-bend interface between an expanded and a shrunk crystal.
///
/// The straight layout is `arm_length` cells long; the bend has two arms of
/// `arm_length` cells each. Both carry `width` rows of cells on each side.
pub fn build_interface_layout(
    kind: InterfaceKind,
    arm_length: usize,
    width: usize,
) -> Result<DeviceLayout> {
    if arm_length < 8 || width < 8 {
        return Err(Error::InvalidGeometry(format!(
            "interface layouts need arm_length >= 8 and width >= 8 cells, got {arm_length} and {width}"
        )));
    }
    let h = 3f64.sqrt() / 2.0;
    let v = interface_vertex();
    let (l, w) = (arm_length as f64, width as f64);
    let (kind, bounds) = match kind {
        InterfaceKind::Straight => (
            LayoutKind::Straight,
            Rect {
                x0: -0.5 * l,
                x1: 0.5 * l,
                y0: v[1] - w * h,
                y1: v[1] + w * h,
            },
        ),
        InterfaceKind::Bend60 => (
            LayoutKind::Bend60,
            Rect {
                x0: v[0] - l,
                x1: v[0] + 0.5 * l + w * h,
                y0: v[1] - w * h,
                y1: v[1] + h * l,
            },
        ),
    };
    Ok(DeviceLayout {
        kind,
        bounds,
        arm_length,
        width,
        swapped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
        let d = [b[0] - a[0], b[1] - a[1]];
        let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]))
            .clamp(0.0, 1.0);
        (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
    }

    fn midpoint(a: (i32, i32), b: (i32, i32)) -> Point {
        let (p, q) = (
            DeviceLayout::cell_center(a.0, a.1),
            DeviceLayout::cell_center(b.0, b.1),
        );
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    #[test]
    fn straight_interface() {
        let lay = build_interface_layout(InterfaceKind::Straight, 16, 8).unwrap();
        let cells = lay.cells();
        assert_eq!(cells.len(), 16 * 16);
        let pairs = lay.interface_pairs();
        let shrunk: BTreeSet<_> = pairs.iter().map(|p| p.0).collect();
        assert_eq!(shrunk.len(), 16);
        assert_eq!(lay.interface_components(), 1);
        let line = lay.interface_polyline();
        for (a, b) in &pairs {
            assert!(seg_dist(midpoint(*a, *b), line[0], line[1]) < 0.3);
        }
    }

    #[test]
    fn bend_interface() {
        let lay = build_interface_layout(InterfaceKind::Bend60, 8, 8).unwrap();
        let line = lay.interface_polyline();
        assert_eq!(line.len(), 3);
        let d1 = [line[1][0] - line[0][0], line[1][1] - line[0][1]];
        let d2 = [line[2][0] - line[1][0], line[2][1] - line[1][1]];
        let turn = (d1[0] * d2[0] + d1[1] * d2[1]) / (d1[0].hypot(d1[1]) * d2[0].hypot(d2[1]));
        assert!((turn.acos().to_degrees() - 60.0).abs() < 1e-9);
        assert!((d1[0].hypot(d1[1]) - 8.0).abs() < 1e-12);
        assert!((d2[0].hypot(d2[1]) - 8.0).abs() < 1e-12);

        let pairs = lay.interface_pairs();
        assert_eq!(lay.interface_components(), 1);
        let mut arm1 = BTreeSet::new();
        let mut arm2 = BTreeSet::new();
        for (a, b) in &pairs {
            let m = midpoint(*a, *b);
            let (e1, e2) = (seg_dist(m, line[0], line[1]), seg_dist(m, line[1], line[2]));
            assert!(e1.min(e2) < 0.3, "pair {a:?}-{b:?} is off the interface");
            if e1 < 0.3 {
                arm1.insert(*a);
            }
            if e2 < 0.3 {
                arm2.insert(*a);
            }
        }
        assert_eq!(arm1.len(), 8);
        assert_eq!(arm2.len(), 8);
        // The two arms share exactly the corner cell.
        assert_eq!(arm1.intersection(&arm2).count(), 1);
    }

    #[test]
    fn swapping_keeps_interface() {
        for kind in [InterfaceKind::Straight, InterfaceKind::Bend60] {
            let lay = build_interface_layout(kind, 10, 8).unwrap();
            let sw = lay.swapped_regions();
            let norm = |v: Vec<((i32, i32), (i32, i32))>| -> BTreeSet<BTreeSet<(i32, i32)>> {
                v.into_iter()
                    .map(|(a, b)| [a, b].into_iter().collect())
                    .collect()
            };
            assert_eq!(norm(lay.interface_pairs()), norm(sw.interface_pairs()));
            for (i, j) in lay.cells() {
                assert_eq!(lay.region_at(i, j).map(Region::swapped), sw.region_at(i, j));
            }
        }
    }

    #[test]
    fn degenerate_sizes_rejected() {
        assert!(build_interface_layout(InterfaceKind::Straight, 7, 8).is_err());
        assert!(build_interface_layout(InterfaceKind::Bend60, 8, 2).is_err());
    }

    #[test]
    fn every_cell_has_one_region() {
        let lay = build_interface_layout(InterfaceKind::Bend60, 9, 8).unwrap();
        for (i, j) in lay.cells() {
            assert!(matches!(
                lay.region_at(i, j),
                Some(Region::Expanded) | Some(Region::Shrunk)
            ));
        }
        let h = DeviceLayout::homogeneous(lay.bounds);
        assert!(h.interface_pairs().is_empty());
    }
}
