//! Real-space permittivity rasters with area-weighted subpixel averaging.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::lattice::LatticeSpec;
use super::layout::{DeviceLayout, Rect};
use super::polygon::Triangle;
use crate::error::{Error, Result};

pub const GRID_FORMAT_VERSION: u32 = 1;
const GRID_MAGIC: &str = "HELIX-GRID";

/// Row-major scalar grid. Pixel `(i, j)` covers
/// `[x0 + i·dx, x0 + (i+1)·dx] × [y0 + j·dx, y0 + (j+1)·dx]` in units of `a0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermittivityMap {
    pub nx: usize,
    pub ny: usize,
    /// Pixel size in units of `a0`.
    pub dx: f64,
    pub a0_nm: f64,
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

impl PermittivityMap {
    pub fn dx_nm(&self) -> f64 {
        self.dx * self.a0_nm
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{GRID_MAGIC} {GRID_FORMAT_VERSION}")?;
        writeln!(f, "dims {} {}", self.nx, self.ny)?;
        writeln!(f, "dx_a0 {:e}", self.dx)?;
        writeln!(f, "a0_nm {:e}", self.a0_nm)?;
        writeln!(f, "origin_a0 {:e} {:e}", self.origin[0], self.origin[1])?;
        writeln!(f, "data f64le")?;
        for v in &self.values {
            f.write_all(&v.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut line = String::new();
        let mut next = |r: &mut BufReader<std::fs::File>| -> Result<Vec<String>> {
            line.clear();
            r.read_line(&mut line)?;
            Ok(line.split_whitespace().map(str::to_owned).collect())
        };
        let bad = |what: &str| Error::Format(format!("grid header: {what}"));
        let num = |s: Option<&String>| -> Result<f64> {
            s.ok_or_else(|| bad("missing value"))?
                .parse()
                .map_err(|_| bad("unparsable number"))
        };
        let magic = next(&mut r)?;
        if magic.first().map(String::as_str) != Some(GRID_MAGIC) {
            return Err(bad("not a grid file"));
        }
        let version = num(magic.get(1))? as u32;
        if version != GRID_FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let dims = next(&mut r)?;
        let (nx, ny) = (num(dims.get(1))? as usize, num(dims.get(2))? as usize);
        let dx = num(next(&mut r)?.get(1))?;
        let a0_nm = num(next(&mut r)?.get(1))?;
        let o = next(&mut r)?;
        let origin = [num(o.get(1))?, num(o.get(2))?];
        if next(&mut r)?.get(1).map(String::as_str) != Some("f64le") {
            return Err(bad("expected f64le payload"));
        }
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() != nx * ny * 8 {
            return Err(bad("payload size does not match dimensions"));
        }
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self {
            nx,
            ny,
            dx,
            a0_nm,
            origin,
            values,
        })
    }

    /// `x_a0,y_a0,value` per pixel center.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x_a0", "y_a0", "value"])?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let x = self.origin[0] + (i as f64 + 0.5) * self.dx;
                let y = self.origin[1] + (j as f64 + 0.5) * self.dx;
                w.write_record([
                    format!("{x:.6}"),
                    format!("{y:.6}"),
                    format!("{:.9}", self.get(i, j)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Adds the area of `tri` covered by each pixel into `frac` (in units of
/// pixel area).
pub fn accumulate_coverage(
    frac: &mut [f64],
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    dx: f64,
    tri: &Triangle,
) {
    let (lo, hi) = tri.bbox();
    let i0 = ((lo[0] - origin[0]) / dx).floor().max(0.0) as usize;
    let j0 = ((lo[1] - origin[1]) / dx).floor().max(0.0) as usize;
    let i1 = (((hi[0] - origin[0]) / dx).ceil().max(0.0) as usize).min(nx);
    let j1 = (((hi[1] - origin[1]) / dx).ceil().max(0.0) as usize).min(ny);
    let inv = 1.0 / (dx * dx);
    for j in j0..j1 {
        let y0 = origin[1] + j as f64 * dx;
        for i in i0..i1 {
            let x0 = origin[0] + i as f64 * dx;
            let a = tri.clipped_area(x0, x0 + dx, y0, y0 + dx);
            if a > 0.0 {
                frac[j * nx + i] += a * inv;
            }
        }
    }
}

/// Samples the layout on an arbitrary grid of `nx × ny` square pixels of
/// side `dx` starting at `origin` (all in units of `a0`).
pub fn rasterize_grid(
    layout: &DeviceLayout,
    spec: &LatticeSpec,
    origin: [f64; 2],
    nx: usize,
    ny: usize,
    dx: f64,
) -> Result<PermittivityMap> {
    let rect = Rect {
        x0: origin[0],
        x1: origin[0] + nx as f64 * dx,
        y0: origin[1],
        y1: origin[1] + ny as f64 * dx,
    };
    let mut frac = vec![0.0; nx * ny];
    for tri in layout.holes_near(spec, &rect)? {
        accumulate_coverage(&mut frac, nx, ny, origin, dx, &tri);
    }
    let (eb, eh) = (spec.eps_background(), spec.eps_hole());
    let values = frac
        .into_iter()
        .map(|f| {
            let f = f.clamp(0.0, 1.0);
            (1.0 - f) * eb + f * eh
        })
        .collect();
    Ok(PermittivityMap {
        nx,
        ny,
        dx,
        a0_nm: spec.a0_nm,
        origin,
        values,
    })
}

/// Rasterizes the layout's bounds at `resolution` pixels per `a0`.
pub fn rasterize(
    layout: &DeviceLayout,
    spec: &LatticeSpec,
    resolution: usize,
) -> Result<PermittivityMap> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "raster resolution must be at least 16 px/a0, got {resolution}"
        )));
    }
    let dx = 1.0 / resolution as f64;
    let b = layout.bounds;
    let nx = (b.width() * resolution as f64).round().max(1.0) as usize;
    let ny = (b.height() * resolution as f64).round().max(1.0) as usize;
    rasterize_grid(layout, spec, [b.x0, b.y0], nx, ny, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lattice::{build_unit_cell, Lattice2D, Region};
    use approx::assert_relative_eq;

    fn spec() -> LatticeSpec {
        LatticeSpec::device(2.9)
    }

    /// Hole fraction of one isolated pristine cell measured on a raster whose
    /// pixel grid is deliberately misaligned with the hole edges.
    fn cell_fill(res: usize) -> f64 {
        let s = spec();
        let dx = 1.0 / res as f64;
        let origin = [-1.0 + 0.37 * dx, -1.0 + 0.11 * dx];
        let n = 2 * res;
        let mut frac = vec![0.0; n * n];
        for t in build_unit_cell(&s, Region::Pristine)
            .unwrap()
            .triangles(s.a0_nm)
        {
            accumulate_coverage(&mut frac, n, n, origin, dx, &t);
        }
        frac.iter().sum::<f64>() * dx * dx / Lattice2D::hexagonal().area()
    }

    #[test]
    fn homogeneous_is_uniform() {
        let s = spec();
        let lay = DeviceLayout::homogeneous(Rect {
            x0: -2.0,
            x1: 2.0,
            y0: -1.0,
            y1: 1.0,
        });
        let map = rasterize(&lay, &s, 16).unwrap();
        assert_eq!((map.nx, map.ny), (64, 32));
        assert!(map.values.iter().all(|&e| e == s.eps_background()));
    }

    #[test]
    fn resolution_floor() {
        let lay = DeviceLayout::homogeneous(Rect {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        });
        assert!(rasterize(&lay, &spec(), 15).is_err());
    }

    #[test]
    fn single_cell_fill_fraction() {
        let frac = cell_fill(64);
        assert_relative_eq!(frac, 0.2971, max_relative = 0.01);
        assert_relative_eq!(frac, spec().fill_fraction(), max_relative = 1e-10);
    }

    #[test]
    fn fill_fraction_converges() {
        let (lo, hi) = (cell_fill(32), cell_fill(64));
        assert!(((hi - lo) / hi).abs() < 2e-3, "{lo} vs {hi}");
    }

    #[test]
    fn values_are_convex_combinations() {
        let s = spec();
        let lay =
            crate::geometry::build_interface_layout(crate::geometry::InterfaceKind::Straight, 8, 8)
                .unwrap();
        let map = rasterize(&lay, &s, 20).unwrap();
        let (eb, eh) = (s.eps_background(), s.eps_hole());
        assert!(map
            .values
            .iter()
            .all(|&e| e >= eh - 1e-12 && e <= eb + 1e-12));
        assert!(map.values.contains(&eh));
        assert!(map.values.iter().any(|&e| e > eh && e < eb));
        assert_eq!(map, rasterize(&lay, &s, 20).unwrap());
    }

    #[test]
    fn binary_round_trip() {
        let s = spec();
        let lay = DeviceLayout::bulk(
            Region::Expanded,
            Rect {
                x0: 0.0,
                x1: 2.0,
                y0: 0.0,
                y1: 1.0,
            },
        );
        let map = rasterize(&lay, &s, 16).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("eps.grid");
        map.write_binary(&p).unwrap();
        assert_eq!(PermittivityMap::read_binary(&p).unwrap(), map);
        map.write_csv(&dir.path().join("eps.csv")).unwrap();
    }
}
