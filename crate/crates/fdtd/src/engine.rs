//! Leapfrog time stepping of `(Ex, Ey, Hz)` with CPML absorbers.
//!
//! Units: lengths in a0, time in a0/c, `ε0 = μ0 = c = 1`. Per step, `Hz`
//! advances from `t = (n - ½)Δt` to `(n + ½)Δt`, then `E` from `nΔt` to
//! `(n + 1)Δt` with the source current taken at `(n + ½)Δt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use helix_core::geometry::{DeviceLayout, LatticeSpec, PermittivityMap, Rect};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::monitor::{
    Component, DftMonitor, FluxMonitor, MonitorLine, PointProbe, ProbeSeries, SnappedLine,
    SnappedProbe,
};
use crate::source::DipoleSource;

pub const SIM_FORMAT_VERSION: u32 = 1;

/// Rows per parallel work item.
const ROWS_PER_TASK: usize = 8;

/// Extra inputs to [`run`] beyond the flux monitors.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub probes: Vec<PointProbe>,
    /// Closed box for the energy balance; must contain the source.
    pub energy_box: Option<Rect>,
    /// Keep the final `Hz` field.
    pub snapshot: bool,
    /// Permit the dipole to sit inside an air hole.
    pub allow_source_in_hole: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    /// Work done by the source on the field.
    pub injected: f64,
    /// Time-integrated Poynting flux out of the box.
    pub outflow: f64,
    /// Field energy left inside the box at the end.
    pub stored: f64,
}

impl EnergyBalance {
    /// `|outflow + stored - injected| / injected`.
    pub fn relative_error(&self) -> f64 {
        ((self.outflow + self.stored - self.injected) / self.injected).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSpectrum {
    pub name: String,
    pub freqs_nu: Vec<f64>,
    pub power: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub format_version: u32,
    pub nx: usize,
    pub ny: usize,
    pub dx_a0: f64,
    pub dt: f64,
    pub steps: usize,
    pub resolution: usize,
    pub courant: f64,
    pub source: DipoleSource,
    /// Source position used on the grid and its offset from the request.
    pub snapped_position: [f64; 2],
    pub snap_offset_a0: [f64; 2],
    pub c_over_a0_thz: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub monitors: Vec<MonitorSpectrum>,
    pub probes: Vec<ProbeSeries>,
    pub energy: Option<EnergyBalance>,
    #[serde(skip)]
    pub snapshot: Option<PermittivityMap>,
    pub meta: RunMeta,
}

impl SimResult {
    pub fn monitor(&self, name: &str) -> Result<&MonitorSpectrum> {
        self.monitors
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::InvalidSetup(format!("no monitor named {name}")))
    }
}

/// Source current split over the two `Ex` and two `Ey` nodes around an
/// integer grid node, so both components are centred on the same point.
struct SourceNodes {
    ex: [usize; 2],
    ey: [usize; 2],
    /// `Δt / (ε dx²)` per node, times ½ for the split.
    cx: [f64; 2],
    cy: [f64; 2],
}

struct EnergyTracker {
    sides: Vec<(SnappedLine, f64)>,
    prev_e: Vec<Vec<f64>>,
    cells: Rect,
    injected: f64,
    outflow: f64,
}

pub struct Simulation {
    pub grid: Grid,
    hz: Vec<f64>,
    ex: Vec<f64>,
    ey: Vec<f64>,
    psi_hz_x: Vec<f64>,
    psi_hz_y: Vec<f64>,
    psi_ex_y: Vec<f64>,
    psi_ey_x: Vec<f64>,
    cex: Vec<f64>,
    cey: Vec<f64>,
    step: usize,
}

impl Simulation {
    pub fn new(grid: Grid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let f = grid.dt / grid.dx;
        let cex = grid.eps_ex.iter().map(|e| f / e).collect();
        let cey = grid.eps_ey.iter().map(|e| f / e).collect();
        Self {
            hz: vec![0.0; nx * ny],
            ex: vec![0.0; nx * (ny + 1)],
            ey: vec![0.0; (nx + 1) * ny],
            psi_hz_x: vec![0.0; nx * ny],
            psi_hz_y: vec![0.0; nx * ny],
            psi_ex_y: vec![0.0; nx * (ny + 1)],
            psi_ey_x: vec![0.0; (nx + 1) * ny],
            cex,
            cey,
            grid,
            step: 0,
        }
    }

    pub fn hz(&self) -> &[f64] {
        &self.hz
    }

    pub fn ex(&self) -> &[f64] {
        &self.ex
    }

    pub fn ey(&self) -> &[f64] {
        &self.ey
    }

    fn update_h(&mut self) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let c = g.dt / g.dx;
        let (ex, ey) = (&self.ex, &self.ey);
        let (kx, ky) = (&g.pml_x.inv_kappa_h, &g.pml_y.inv_kappa_h);
        self.hz
            .par_chunks_mut(nx)
            .with_min_len(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(j, row)| {
                let eyr = &ey[j * (nx + 1)..(j + 1) * (nx + 1)];
                let ex0 = &ex[j * nx..(j + 1) * nx];
                let ex1 = &ex[(j + 1) * nx..(j + 2) * nx];
                let kyj = ky[j];
                for ((((h, ey), (e0, e1)), k), ey1) in row
                    .iter_mut()
                    .zip(&eyr[..nx])
                    .zip(ex0.iter().zip(ex1))
                    .zip(kx)
                    .zip(&eyr[1..])
                {
                    *h -= c * ((ey1 - ey) * k - (e1 - e0) * kyj);
                }
            });
        let ax = &g.pml_x;
        for r in ax.layer_ranges(nx) {
            let (b, a) = (&ax.b_h[r.clone()], &ax.a_h[r.clone()]);
            for j in 0..ny {
                let (row, e) = (j * nx, j * (nx + 1));
                let hz = &mut self.hz[row + r.start..row + r.end];
                let psi = &mut self.psi_hz_x[row + r.start..row + r.end];
                let e0 = &ey[e + r.start..e + r.end];
                let e1 = &ey[e + r.start + 1..e + r.end + 1];
                for (((((h, p), b), a), e0), e1) in
                    hz.iter_mut().zip(psi).zip(b).zip(a).zip(e0).zip(e1)
                {
                    *p = b * *p + a * (e1 - e0);
                    *h -= c * *p;
                }
            }
        }
        let ay = &g.pml_y;
        for r in ay.layer_ranges(ny) {
            for j in r {
                let (b, a) = (ay.b_h[j], ay.a_h[j]);
                let hz = &mut self.hz[j * nx..(j + 1) * nx];
                let psi = &mut self.psi_hz_y[j * nx..(j + 1) * nx];
                let e0 = &ex[j * nx..(j + 1) * nx];
                let e1 = &ex[(j + 1) * nx..(j + 2) * nx];
                for (((h, p), e0), e1) in hz.iter_mut().zip(psi).zip(e0).zip(e1) {
                    *p = b * *p + a * (e1 - e0);
                    *h += c * *p;
                }
            }
        }
    }

    fn update_e(&mut self) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let hz = &self.hz;
        let (kx, ky) = (&g.pml_x.inv_kappa_e, &g.pml_y.inv_kappa_e);
        let cex = &self.cex;
        self.ex
            .par_chunks_mut(nx)
            .with_min_len(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(j, row)| {
                if j == 0 || j == ny {
                    return;
                }
                let h0 = &hz[(j - 1) * nx..j * nx];
                let h1 = &hz[j * nx..(j + 1) * nx];
                let c = &cex[j * nx..(j + 1) * nx];
                let kyj = ky[j];
                for (((e, c), a), b) in row.iter_mut().zip(c).zip(h0).zip(h1) {
                    *e += c * (b - a) * kyj;
                }
            });
        let cey = &self.cey;
        self.ey
            .par_chunks_mut(nx + 1)
            .with_min_len(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(j, row)| {
                let h = &hz[j * nx..(j + 1) * nx];
                let c = &cey[j * (nx + 1)..(j + 1) * (nx + 1)];
                for ((((e, c), k), a), b) in row[1..nx]
                    .iter_mut()
                    .zip(&c[1..nx])
                    .zip(&kx[1..nx])
                    .zip(&h[..nx - 1])
                    .zip(&h[1..])
                {
                    *e -= c * (b - a) * k;
                }
            });
        let ay = &g.pml_y;
        for range in ay.layer_ranges(ny) {
            // E rows on the layer side of each half-integer range.
            let rows = if range.start == 0 {
                1..range.end + 1
            } else {
                range.start..ny
            };
            for j in rows {
                let (b, a) = (ay.b_e[j], ay.a_e[j]);
                let r = j * nx..(j + 1) * nx;
                let ex = &mut self.ex[r.clone()];
                let psi = &mut self.psi_ex_y[r.clone()];
                let cex = &self.cex[r];
                let (h0, h1) = (&hz[(j - 1) * nx..j * nx], &hz[j * nx..(j + 1) * nx]);
                for ((((e, p), c), h0), h1) in ex.iter_mut().zip(psi).zip(cex).zip(h0).zip(h1) {
                    *p = b * *p + a * (h1 - h0);
                    *e += c * *p;
                }
            }
        }
        let ax = &g.pml_x;
        for range in ax.layer_ranges(nx) {
            let cols = if range.start == 0 {
                1..range.end + 1
            } else {
                range.start..nx
            };
            let (b, a) = (&ax.b_e[cols.clone()], &ax.a_e[cols.clone()]);
            for j in 0..ny {
                let e = j * (nx + 1);
                let ey = &mut self.ey[e + cols.start..e + cols.end];
                let psi = &mut self.psi_ey_x[e + cols.start..e + cols.end];
                let cey = &self.cey[e + cols.start..e + cols.end];
                let h0 = &hz[j * nx + cols.start - 1..j * nx + cols.end - 1];
                let h1 = &hz[j * nx + cols.start..j * nx + cols.end];
                for ((((((e, p), c), b), a), h0), h1) in ey
                    .iter_mut()
                    .zip(psi)
                    .zip(cey)
                    .zip(b)
                    .zip(a)
                    .zip(h0)
                    .zip(h1)
                {
                    *p = b * *p + a * (h1 - h0);
                    *e -= c * *p;
                }
            }
        }
    }

    /// `½ Σ (ε E² + H²) dx²` over nodes inside `r`.
    pub fn energy_in(&self, r: &Rect) -> f64 {
        let g = &self.grid;
        let (nx, ny, dx) = (g.nx, g.ny, g.dx);
        let inside = |x: f64, y: f64| x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1;
        let mut u = 0.0;
        for j in 0..=ny {
            for i in 0..nx {
                let p = [
                    g.origin[0] + (i as f64 + 0.5) * dx,
                    g.origin[1] + j as f64 * dx,
                ];
                if inside(p[0], p[1]) {
                    let k = j * nx + i;
                    u += g.eps_ex[k] * self.ex[k] * self.ex[k];
                }
            }
        }
        for j in 0..ny {
            for i in 0..=nx {
                let p = [
                    g.origin[0] + i as f64 * dx,
                    g.origin[1] + (j as f64 + 0.5) * dx,
                ];
                if inside(p[0], p[1]) {
                    let k = j * (nx + 1) + i;
                    u += g.eps_ey[k] * self.ey[k] * self.ey[k];
                }
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let p = [
                    g.origin[0] + (i as f64 + 0.5) * dx,
                    g.origin[1] + (j as f64 + 0.5) * dx,
                ];
                if inside(p[0], p[1]) {
                    u += self.hz[j * nx + i].powi(2);
                }
            }
        }
        0.5 * u * dx * dx
    }
}

fn source_nodes(grid: &Grid, source: &DipoleSource) -> Result<(SourceNodes, [f64; 2], [f64; 2])> {
    let ((i, j), off) = grid.nearest_node(source.position);
    if !grid.node_in_interior(i, j) || i < 1 || j < 1 {
        return Err(Error::InvalidSetup(format!(
            "source at {:?} lies outside the non-absorbing region",
            source.position
        )));
    }
    let (i, j) = (i as usize, j as usize);
    let ex = [grid.ex_index(i - 1, j), grid.ex_index(i, j)];
    let ey = [grid.ey_index(i, j - 1), grid.ey_index(i, j)];
    let w = 0.5 * grid.dt / (grid.dx * grid.dx);
    Ok((
        SourceNodes {
            ex,
            ey,
            cx: ex.map(|k| w / grid.eps_ex[k]),
            cy: ey.map(|k| w / grid.eps_ey[k]),
        },
        grid.node_position(i, j),
        off,
    ))
}

fn box_sides(grid: &Grid, r: &Rect) -> Result<Vec<(SnappedLine, f64)>> {
    let lines = [
        (
            MonitorLine::Vertical {
                x: r.x1,
                y0: r.y0,
                y1: r.y1,
            },
            1.0,
        ),
        (
            MonitorLine::Vertical {
                x: r.x0,
                y0: r.y0,
                y1: r.y1,
            },
            -1.0,
        ),
        (
            MonitorLine::Horizontal {
                y: r.y1,
                x0: r.x0,
                x1: r.x1,
            },
            1.0,
        ),
        (
            MonitorLine::Horizontal {
                y: r.y0,
                x0: r.x0,
                x1: r.x1,
            },
            -1.0,
        ),
    ];
    lines
        .iter()
        .map(|(l, s)| Ok((SnappedLine::new(grid, l)?, *s)))
        .collect()
}

/// Runs one simulation of `layout` driven by `source` for
/// `cfg.duration_periods` carrier periods.
pub fn run(
    layout: &DeviceLayout,
    spec: &LatticeSpec,
    source: &DipoleSource,
    monitors: &[FluxMonitor],
    cfg: &SimConfig,
    opts: &RunOptions,
) -> Result<SimResult> {
    source.validate()?;
    let grid = Grid::new(layout, spec, cfg)?;
    let mut warnings = Vec::new();
    let (src, snapped, off) = source_nodes(&grid, source)?;
    if off[0].abs() > 0.5 * grid.dx + 1e-12 || off[1].abs() > 0.5 * grid.dx + 1e-12 {
        warnings.push(format!(
            "source snapped by ({:.4}, {:.4}) a0, more than half a pixel",
            off[0], off[1]
        ));
    }
    if !opts.allow_source_in_hole {
        let probe = Rect {
            x0: source.position[0] - 1e-6,
            x1: source.position[0] + 1e-6,
            y0: source.position[1] - 1e-6,
            y1: source.position[1] + 1e-6,
        };
        if layout
            .holes_near(spec, &probe)?
            .iter()
            .any(|t| t.contains(source.position))
        {
            return Err(Error::InvalidSetup(format!(
                "source at {:?} lies inside an air hole",
                source.position
            )));
        }
    }
    let mut dft: Vec<DftMonitor> = monitors
        .iter()
        .map(|m| DftMonitor::new(&grid, m))
        .collect::<Result<_>>()?;
    let mut probes: Vec<SnappedProbe> = opts
        .probes
        .iter()
        .map(|p| SnappedProbe::new(&grid, p))
        .collect::<Result<_>>()?;
    let mut energy = match opts.energy_box {
        Some(r) => {
            let sides = box_sides(&grid, &r)?;
            let prev_e = sides
                .iter()
                .map(|(l, _)| vec![0.0; l.points.len()])
                .collect();
            Some(EnergyTracker {
                sides,
                prev_e,
                cells: r,
                injected: 0.0,
                outflow: 0.0,
            })
        }
        None => None,
    };

    let steps = (cfg.duration_periods / source.carrier_nu / grid.dt).ceil() as usize;
    let stride = cfg.dft_stride;
    let (dt, dx) = (grid.dt, grid.dx);
    let mut sim = Simulation::new(grid);
    for n in 0..steps {
        sim.update_h();
        if let Some(tr) = energy.as_mut() {
            for ((line, _), prev) in tr.sides.iter().zip(tr.prev_e.iter_mut()) {
                let e = if line.vertical { &sim.ey } else { &sim.ex };
                for (p, v) in line.points.iter().zip(prev.iter_mut()) {
                    *v = e[p.e];
                }
            }
        }
        let e_before = src.ex.map(|k| sim.ex[k]);
        let e_before_y = src.ey.map(|k| sim.ey[k]);
        sim.update_e();
        let t_src = (n as f64 + 0.5) * dt;
        let p = source.moment(t_src);
        let mut work = 0.0;
        for k in 0..2 {
            let (ix, iy) = (src.ex[k], src.ey[k]);
            sim.ex[ix] -= src.cx[k] * p[0];
            sim.ey[iy] -= src.cy[k] * p[1];
            // -J·(Eⁿ + Eⁿ⁺¹)/2 Δt with J Δt / ε = c·p on each node.
            work += src.cx[k] * p[0] * 0.5 * (e_before[k] + sim.ex[ix]) * sim.grid.eps_ex[ix]
                + src.cy[k] * p[1] * 0.5 * (e_before_y[k] + sim.ey[iy]) * sim.grid.eps_ey[iy];
        }
        let work = -work;
        if let Some(tr) = energy.as_mut() {
            tr.injected += work * dx * dx;
            for ((line, sign), prev) in tr.sides.iter().zip(&tr.prev_e) {
                let e = if line.vertical { &sim.ey } else { &sim.ex };
                let s: f64 = line
                    .points
                    .iter()
                    .zip(prev)
                    .map(|(q, &e0)| 0.5 * (e0 + e[q.e]) * 0.5 * (sim.hz[q.h[0]] + sim.hz[q.h[1]]))
                    .sum();
                let s = if line.vertical { s } else { -s };
                tr.outflow += sign * s * dx * dt;
            }
        }
        for pr in probes.iter_mut() {
            let field = match pr.series.component {
                Component::Ex => &sim.ex,
                Component::Ey => &sim.ey,
                Component::Hz => &sim.hz,
            };
            pr.sample(field);
        }
        if (n + 1) % stride == 0 {
            let (t_e, t_h) = ((n + 1) as f64 * dt, (n as f64 + 0.5) * dt);
            for m in dft.iter_mut() {
                let e = if m.line.vertical { &sim.ey } else { &sim.ex };
                m.accumulate(e, &sim.hz, t_e, t_h, stride as f64 * dt);
            }
        }
        sim.step += 1;
    }
    if probes
        .iter()
        .any(|p| p.series.values.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Unstable("fields diverged".into()));
    }
    let monitors = dft
        .iter()
        .map(|m| MonitorSpectrum {
            name: m.spec.name.clone(),
            freqs_nu: m.spec.freqs_nu.clone(),
            power: m.power(dx),
        })
        .collect::<Vec<_>>();
    if monitors
        .iter()
        .any(|m| m.power.iter().any(|p| !p.is_finite()))
    {
        return Err(Error::Unstable("fields diverged".into()));
    }
    let energy = energy.map(|tr| EnergyBalance {
        injected: tr.injected,
        outflow: tr.outflow,
        stored: sim.energy_in(&tr.cells),
    });
    let snapshot = opts.snapshot.then(|| PermittivityMap {
        nx: sim.grid.nx,
        ny: sim.grid.ny,
        dx,
        a0_nm: spec.a0_nm,
        origin: sim.grid.origin,
        values: sim.hz.clone(),
    });
    Ok(SimResult {
        monitors,
        probes: probes.into_iter().map(|p| p.series).collect(),
        energy,
        snapshot,
        meta: RunMeta {
            format_version: SIM_FORMAT_VERSION,
            nx: sim.grid.nx,
            ny: sim.grid.ny,
            dx_a0: dx,
            dt,
            steps,
            resolution: cfg.resolution,
            courant: cfg.courant,
            source: *source,
            snapped_position: snapped,
            snap_offset_a0: off,
            c_over_a0_thz: spec.frequency_scale().c_over_a0_thz,
            warnings,
        },
    })
}
