//! Flux monitors with running Fourier transforms, and point probes.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Grid-aligned line segment in units of a0. The positive normal is `+x`
/// for vertical lines and `+y` for horizontal ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonitorLine {
    Vertical { x: f64, y0: f64, y1: f64 },
    Horizontal { y: f64, x0: f64, x1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxMonitor {
    pub name: String,
    pub line: MonitorLine,
    /// `+1` counts power along the positive normal, `-1` against it.
    pub orientation: f64,
    /// Dimensionless frequencies.
    pub freqs_nu: Vec<f64>,
}

impl FluxMonitor {
    pub fn new(name: &str, line: MonitorLine, orientation: f64, freqs_nu: &[f64]) -> Self {
        Self {
            name: name.into(),
            line,
            orientation,
            freqs_nu: freqs_nu.to_vec(),
        }
    }
}

/// Field component sampled by a point probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Ex,
    Ey,
    Hz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProbe {
    pub name: String,
    pub position: [f64; 2],
    pub component: Component,
}

/// One point of a snapped monitor line: the tangential `E` node and the two
/// `Hz` nodes averaged onto it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinePoint {
    pub e: usize,
    pub h: [usize; 2],
}

#[derive(Debug, Clone)]
pub(crate) struct SnappedLine {
    pub points: Vec<LinePoint>,
    /// `true` when `E` is `Ey` (vertical line).
    pub vertical: bool,
}

impl SnappedLine {
    pub fn new(grid: &Grid, line: &MonitorLine) -> Result<Self> {
        let (nx, ny) = (grid.nx as i64, grid.ny as i64);
        let r = grid.interior;
        let inside = |lo: f64, hi: f64, a: f64, b: f64| a >= lo - 1e-9 && b <= hi + 1e-9;
        match *line {
            MonitorLine::Vertical { x, y0, y1 } => {
                if !(inside(r.x0, r.x1, x, x) && inside(r.y0, r.y1, y0, y1) && y1 > y0) {
                    return Err(Error::InvalidSetup(format!(
                        "monitor {line:?} leaves the non-absorbing region {r:?}"
                    )));
                }
                let ((i, _), _) = grid.nearest_node([x, y0]);
                let i = i.clamp(1, nx - 1) as usize;
                let points = (0..ny)
                    .filter(|&j| {
                        let y = grid.origin[1] + (j as f64 + 0.5) * grid.dx;
                        y >= y0 && y < y1
                    })
                    .map(|j| LinePoint {
                        e: grid.ey_index(i, j as usize),
                        h: [
                            grid.hz_index(i - 1, j as usize),
                            grid.hz_index(i, j as usize),
                        ],
                    })
                    .collect();
                Ok(Self {
                    points,
                    vertical: true,
                })
            }
            MonitorLine::Horizontal { y, x0, x1 } => {
                if !(inside(r.y0, r.y1, y, y) && inside(r.x0, r.x1, x0, x1) && x1 > x0) {
                    return Err(Error::InvalidSetup(format!(
                        "monitor {line:?} leaves the non-absorbing region {r:?}"
                    )));
                }
                let ((_, j), _) = grid.nearest_node([x0, y]);
                let j = j.clamp(1, ny - 1) as usize;
                let points = (0..nx)
                    .filter(|&i| {
                        let x = grid.origin[0] + (i as f64 + 0.5) * grid.dx;
                        x >= x0 && x < x1
                    })
                    .map(|i| LinePoint {
                        e: grid.ex_index(i as usize, j),
                        h: [
                            grid.hz_index(i as usize, j - 1),
                            grid.hz_index(i as usize, j),
                        ],
                    })
                    .collect();
                Ok(Self {
                    points,
                    vertical: false,
                })
            }
        }
    }
}

/// Running transforms `F(ω) = Σ f(t) e^{iωt} Δt` of the tangential fields.
#[derive(Debug, Clone)]
pub(crate) struct DftMonitor {
    pub spec: FluxMonitor,
    pub line: SnappedLine,
    omega: Vec<f64>,
    e_re: Vec<f64>,
    e_im: Vec<f64>,
    h_re: Vec<f64>,
    h_im: Vec<f64>,
}

impl DftMonitor {
    pub fn new(grid: &Grid, spec: &FluxMonitor) -> Result<Self> {
        let line = SnappedLine::new(grid, &spec.line)?;
        if line.points.is_empty() {
            return Err(Error::InvalidSetup(format!(
                "monitor {} covers no grid points",
                spec.name
            )));
        }
        let n = line.points.len() * spec.freqs_nu.len();
        Ok(Self {
            spec: spec.clone(),
            line,
            omega: spec.freqs_nu.iter().map(|nu| 2.0 * PI * nu).collect(),
            e_re: vec![0.0; n],
            e_im: vec![0.0; n],
            h_re: vec![0.0; n],
            h_im: vec![0.0; n],
        })
    }

    /// Adds one sample of `E` taken at `t_e` and `Hz` taken at `t_h`.
    pub fn accumulate(&mut self, e: &[f64], hz: &[f64], t_e: f64, t_h: f64, weight: f64) {
        let np = self.line.points.len();
        let ev: Vec<f64> = self.line.points.iter().map(|p| e[p.e]).collect();
        let hv: Vec<f64> = self
            .line
            .points
            .iter()
            .map(|p| 0.5 * (hz[p.h[0]] + hz[p.h[1]]))
            .collect();
        for (f, &w) in self.omega.iter().enumerate() {
            let (se, ce) = (w * t_e).sin_cos();
            let (sh, ch) = (w * t_h).sin_cos();
            let (ce, se, ch, sh) = (ce * weight, se * weight, ch * weight, sh * weight);
            let r = f * np..(f + 1) * np;
            for (k, ((er, ei), (hr, hi))) in self.e_re[r.clone()]
                .iter_mut()
                .zip(&mut self.e_im[r.clone()])
                .zip(self.h_re[r.clone()].iter_mut().zip(&mut self.h_im[r]))
                .enumerate()
            {
                *er += ce * ev[k];
                *ei += se * ev[k];
                *hr += ch * hv[k];
                *hi += sh * hv[k];
            }
        }
    }

    /// `orientation · ∫ Re(E H*) dl` per frequency, with the sign of the
    /// Poynting component along the line normal.
    pub fn power(&self, dx: f64) -> Vec<f64> {
        let np = self.line.points.len();
        let sign = if self.line.vertical { 1.0 } else { -1.0 } * self.spec.orientation;
        (0..self.omega.len())
            .map(|f| {
                let r = f * np..(f + 1) * np;
                let s: f64 = (r.clone())
                    .map(|k| self.e_re[k] * self.h_re[k] + self.e_im[k] * self.h_im[k])
                    .sum();
                sign * s * dx
            })
            .collect()
    }
}

/// Time series of one field component at one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub name: String,
    pub component: Component,
    /// Snapped node position in a0.
    pub position: [f64; 2],
    /// Time of the first sample and the spacing, in a0/c.
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ProbeSeries {
    /// `Σ f(t) e^{iωt} Δt` at each frequency, as `(re, im)`.
    pub fn spectrum(&self, freqs_nu: &[f64]) -> Vec<(f64, f64)> {
        freqs_nu
            .iter()
            .map(|nu| {
                let w = 2.0 * PI * nu;
                self.values
                    .iter()
                    .enumerate()
                    .fold((0.0, 0.0), |(re, im), (n, v)| {
                        let (s, c) = (w * (self.t0 + n as f64 * self.dt)).sin_cos();
                        (re + c * v * self.dt, im + s * v * self.dt)
                    })
            })
            .collect()
    }
}

/// E probes average the two nodes a dipole at the same point would drive,
/// so source and probe are interchangeable; `Hz` probes read one cell.
#[derive(Debug, Clone)]
pub(crate) struct SnappedProbe {
    pub nodes: Vec<usize>,
    pub series: ProbeSeries,
}

impl SnappedProbe {
    pub fn new(grid: &Grid, probe: &PointProbe) -> Result<Self> {
        let ((i, j), _) = grid.nearest_node(probe.position);
        if !grid.node_in_interior(i, j) {
            return Err(Error::InvalidSetup(format!(
                "probe {} lies outside the non-absorbing region",
                probe.name
            )));
        }
        let (i, j) = (i as usize, j as usize);
        let (i, j) = (i.clamp(1, grid.nx - 1), j.clamp(1, grid.ny - 1));
        let base = grid.node_position(i, j);
        let h = 0.5 * grid.dx;
        let (nodes, position, t0) = match probe.component {
            Component::Ex => (
                vec![grid.ex_index(i - 1, j), grid.ex_index(i, j)],
                base,
                grid.dt,
            ),
            Component::Ey => (
                vec![grid.ey_index(i, j - 1), grid.ey_index(i, j)],
                base,
                grid.dt,
            ),
            Component::Hz => (
                vec![grid.hz_index(i, j)],
                [base[0] + h, base[1] + h],
                0.5 * grid.dt,
            ),
        };
        Ok(Self {
            nodes,
            series: ProbeSeries {
                name: probe.name.clone(),
                component: probe.component,
                position,
                t0,
                dt: grid.dt,
                values: Vec::new(),
            },
        })
    }

    pub fn sample(&mut self, field: &[f64]) {
        let v = self.nodes.iter().map(|&k| field[k]).sum::<f64>() / self.nodes.len() as f64;
        self.series.values.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_spectrum_of_a_tone() {
        let (nu, dt) = (0.5, 0.01);
        let n = 20_000;
        let s = ProbeSeries {
            name: "p".into(),
            component: Component::Hz,
            position: [0.0, 0.0],
            t0: 0.0,
            dt,
            values: (0..n)
                .map(|k| (2.0 * PI * nu * k as f64 * dt).cos())
                .collect(),
        };
        let sp = s.spectrum(&[nu, 0.8]);
        let t = n as f64 * dt;
        assert!((sp[0].0 - 0.5 * t).abs() < 1e-3 * t);
        assert!(sp[1].0.hypot(sp[1].1) < 1e-2 * t);
    }
}
