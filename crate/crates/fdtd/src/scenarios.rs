//! Transport experiments on interface waveguides: chiral routing, bend
//! transmission and source-position scans.
//!
//! Every power is normalized against the total power the same dipole emits
//! into the unpatterned slab, so spectra read as the fraction of emitted
//! power carried past a monitor.

use serde::{Deserialize, Serialize};

use helix_core::geometry::{
    build_interface_layout, interface_vertex, DeviceLayout, InterfaceKind, LatticeSpec, Rect,
};

use crate::config::SimConfig;
use crate::engine::{run, RunMeta, RunOptions, SimResult};
use crate::error::{Error, Result};
use crate::monitor::{FluxMonitor, MonitorLine};
use crate::source::{DipoleSource, Envelope, Polarization};

/// Powers summed over a band below this fraction of the reference count as
/// no signal.
pub const NOISE_FLOOR: f64 = 1e-6;

/// Half side of the closed monitor box in the reference run, a0.
const REFERENCE_BOX: f64 = 2.0;

/// Evenly spaced frequencies from `lo` to `hi` inclusive.
pub fn freq_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Frequency interval `[lo, hi]`, dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, nu: f64) -> bool {
        nu >= self.lo && nu <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Shared parameters of the waveguide experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub sim: SimConfig,
    /// Straight waveguide length in cells.
    pub length: usize,
    /// Rows on each side of the interface.
    pub width: usize,
    /// Bend arm length in cells.
    pub arm_length: usize,
    /// Gap between a monitor and the absorbing layer, a0.
    pub monitor_inset: f64,
    /// Monitors extend this far to each side of the interface, a0.
    pub capture_half_width: f64,
    pub freqs_nu: Vec<f64>,
    pub carrier_nu: f64,
    pub bandwidth_nu: f64,
    /// Band over which scalar summaries are averaged.
    pub band: Band,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                duration_periods: 400.0,
                ..SimConfig::default()
            },
            length: 48,
            width: 8,
            arm_length: 16,
            monitor_inset: 2.0,
            capture_half_width: 3.5,
            freqs_nu: freq_grid(0.44, 0.53, 0.0005),
            carrier_nu: 0.48,
            bandwidth_nu: 0.025,
            band: Band {
                lo: 0.4700,
                hi: 0.4888,
            },
        }
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        let bad = |m: String| Err(Error::InvalidSetup(m));
        if self.freqs_nu.is_empty() || self.freqs_nu.iter().any(|f| !(*f > 0.0)) {
            return bad("frequency list must be non-empty and positive".into());
        }
        if !(self.band.lo < self.band.hi) || !self.freqs_nu.iter().any(|f| self.band.contains(*f)) {
            return bad(format!("band {:?} holds no sampled frequency", self.band));
        }
        if !(self.monitor_inset > 0.0 && self.capture_half_width > 0.0) {
            return bad("monitor inset and capture width must be positive".into());
        }
        if !(self.bandwidth_nu > 0.0 && self.bandwidth_nu < self.carrier_nu) {
            return bad("pulse bandwidth must lie in (0, carrier)".into());
        }
        let (lo, hi) = (
            self.carrier_nu - 4.0 * self.bandwidth_nu,
            self.carrier_nu + 4.0 * self.bandwidth_nu,
        );
        if self.freqs_nu.iter().any(|f| *f < lo || *f > hi) {
            return bad(format!(
                "monitor frequencies must lie within four pulse widths of the carrier ({lo:.4}..{hi:.4})"
            ));
        }
        Ok(())
    }

    fn source(&self, position: [f64; 2], polarization: Polarization) -> DipoleSource {
        DipoleSource {
            position,
            polarization,
            carrier_nu: self.carrier_nu,
            envelope: Envelope::GaussianPulse {
                bandwidth_nu: self.bandwidth_nu,
            },
        }
    }

    fn band_mask(&self) -> Vec<bool> {
        self.freqs_nu
            .iter()
            .map(|f| self.band.contains(*f))
            .collect()
    }
}

/// Default emitter site: centre of the shrunk cell next to the interface,
/// where the edge modes carry the largest spin density.
pub fn default_site() -> [f64; 2] {
    [0.0, 0.0]
}

/// Height of the straight interface line.
pub fn interface_y() -> f64 {
    interface_vertex()[1]
}

/// Total power radiated by `source` into the unpatterned slab.
pub fn reference_power(
    spec: &LatticeSpec,
    source: &DipoleSource,
    tc: &TransportConfig,
) -> Result<Vec<f64>> {
    let [x, y] = source.position;
    let m = REFERENCE_BOX + 1.0;
    let layout = DeviceLayout::homogeneous(Rect {
        x0: x - m,
        x1: x + m,
        y0: y - m,
        y1: y + m,
    });
    let b = REFERENCE_BOX;
    let f = &tc.freqs_nu;
    let monitors = [
        FluxMonitor::new(
            "right",
            MonitorLine::Vertical {
                x: x + b,
                y0: y - b,
                y1: y + b,
            },
            1.0,
            f,
        ),
        FluxMonitor::new(
            "left",
            MonitorLine::Vertical {
                x: x - b,
                y0: y - b,
                y1: y + b,
            },
            -1.0,
            f,
        ),
        FluxMonitor::new(
            "top",
            MonitorLine::Horizontal {
                y: y + b,
                x0: x - b,
                x1: x + b,
            },
            1.0,
            f,
        ),
        FluxMonitor::new(
            "bottom",
            MonitorLine::Horizontal {
                y: y - b,
                x0: x - b,
                x1: x + b,
            },
            -1.0,
            f,
        ),
    ];
    let res = run(
        &layout,
        spec,
        source,
        &monitors,
        &tc.sim,
        &RunOptions::default(),
    )?;
    let mut total = vec![0.0; f.len()];
    for m in &res.monitors {
        for (t, p) in total.iter_mut().zip(&m.power) {
            *t += p;
        }
    }
    if total.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Undefined(
            "reference power vanishes inside the frequency list; widen the pulse".into(),
        ));
    }
    Ok(total)
}

fn normalized(p: &[f64], reference: &[f64]) -> Vec<f64> {
    p.iter().zip(reference).map(|(p, r)| p / r).collect()
}

fn band_sum(v: &[f64], mask: &[bool]) -> f64 {
    v.iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(v, _)| v)
        .sum()
}

fn band_mean(v: &[f64], mask: &[bool]) -> f64 {
    let n = mask.iter().filter(|m| **m).count();
    band_sum(v, mask) / n as f64
}

/// Vertical monitor across the straight interface at `x`.
fn interface_monitor(name: &str, x: f64, orientation: f64, tc: &TransportConfig) -> FluxMonitor {
    let y = interface_y();
    FluxMonitor::new(
        name,
        MonitorLine::Vertical {
            x,
            y0: y - tc.capture_half_width,
            y1: y + tc.capture_half_width,
        },
        orientation,
        &tc.freqs_nu,
    )
}

/// Left and right monitor positions of a straight layout.
fn straight_monitor_x(layout: &DeviceLayout, tc: &TransportConfig) -> (f64, f64) {
    (
        layout.bounds.x0 + tc.monitor_inset,
        layout.bounds.x1 - tc.monitor_inset,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Directionality {
    pub polarization: Polarization,
    pub position: [f64; 2],
    pub freqs_nu: Vec<f64>,
    /// Normalized power through the left and right monitors.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `(P_R − P_L)/(P_R + P_L)` per frequency.
    pub d: Vec<f64>,
    pub band: Band,
    /// Directionality of the band-integrated powers.
    pub band_average: f64,
    pub meta: RunMeta,
}

/// Spectrally resolved routing of a dipole at `position` on the straight
/// interface into the left and right arms.
pub fn chirality_directionality(
    spec: &LatticeSpec,
    polarization: Polarization,
    position: [f64; 2],
    tc: &TransportConfig,
) -> Result<Directionality> {
    tc.validate()?;
    let layout = build_interface_layout(InterfaceKind::Straight, tc.length, tc.width)?;
    let source = tc.source(position, polarization);
    let reference = reference_power(spec, &source, tc)?;
    let (xl, xr) = straight_monitor_x(&layout, tc);
    let monitors = [
        interface_monitor("left", xl, -1.0, tc),
        interface_monitor("right", xr, 1.0, tc),
    ];
    let res = run(
        &layout,
        spec,
        &source,
        &monitors,
        &tc.sim,
        &RunOptions::default(),
    )?;
    directionality_from(&res, &reference, polarization, position, tc)
}

fn directionality_from(
    res: &SimResult,
    reference: &[f64],
    polarization: Polarization,
    position: [f64; 2],
    tc: &TransportConfig,
) -> Result<Directionality> {
    let left = normalized(&res.monitor("left")?.power, reference);
    let right = normalized(&res.monitor("right")?.power, reference);
    let mask = tc.band_mask();
    let (sl, sr) = (band_sum(&left, &mask), band_sum(&right, &mask));
    let n = mask.iter().filter(|m| **m).count() as f64;
    if sl.abs() + sr.abs() < NOISE_FLOOR * n {
        return Err(Error::Undefined(format!(
            "left and right powers ({sl:.3e}, {sr:.3e}) are below the noise floor"
        )));
    }
    let d = left
        .iter()
        .zip(&right)
        .map(|(l, r)| if l + r != 0.0 { (r - l) / (r + l) } else { 0.0 })
        .collect();
    Ok(Directionality {
        polarization,
        position,
        freqs_nu: tc.freqs_nu.clone(),
        left,
        right,
        d,
        band: tc.band,
        band_average: (sr - sl) / (sr + sl),
        meta: res.meta.clone(),
    })
}

/// Normalized transmission of a straight waveguide to the monitor the
/// dipole routes toward.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transmission {
    pub freqs_nu: Vec<f64>,
    pub t: Vec<f64>,
    pub meta: RunMeta,
}

/// Frequencies where `t` crosses half its maximum on either side of the
/// peak, linearly interpolated; the pass band is the outermost crossings of
/// the connected region above half maximum that holds the peak, with dips
/// narrower than `merge` bridged.
pub fn half_max_edges(freqs: &[f64], t: &[f64], merge: f64) -> Result<Band> {
    if freqs.len() != t.len() || freqs.len() < 3 {
        return Err(Error::InvalidSetup(
            "transmission spectrum too short".into(),
        ));
    }
    let (peak_idx, peak) = t
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    if !(peak > 0.0) {
        return Err(Error::Undefined("transmission has no positive peak".into()));
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| -> f64 {
        let (a, b) = (t[i] - half, t[j] - half);
        freqs[i] + (freqs[j] - freqs[i]) * a / (a - b)
    };
    let above = |i: usize| t[i] >= half;
    // Walk outward from the peak, hopping dips narrower than `merge`.
    let mut hi = peak_idx;
    loop {
        match (hi + 1..t.len()).find(|&k| !above(k)) {
            None => {
                hi = t.len() - 1;
                break;
            }
            Some(k) => match (k..t.len()).find(|&m| above(m)) {
                Some(m) if freqs[m] - freqs[k - 1] <= merge => hi = m,
                _ => {
                    hi = k;
                    break;
                }
            },
        }
    }
    let mut lo = peak_idx;
    loop {
        match (0..lo).rev().find(|&k| !above(k)) {
            None => {
                lo = 0;
                break;
            }
            Some(k) => match (0..=k).rev().find(|&m| above(m)) {
                Some(m) if freqs[k + 1] - freqs[m] <= merge => lo = m,
                _ => {
                    lo = k;
                    break;
                }
            },
        }
    }
    if above(lo) || above(hi) {
        return Err(Error::Undefined(
            "transmission stays above half maximum at the end of the frequency list".into(),
        ));
    }
    Ok(Band {
        lo: cross(lo, lo + 1),
        hi: cross(hi - 1, hi),
    })
}

/// Transmission of the straight waveguide from a dipole at `position`
/// to the monitor on the side it routes toward.
pub fn straight_transmission(
    spec: &LatticeSpec,
    polarization: Polarization,
    position: [f64; 2],
    tc: &TransportConfig,
) -> Result<Transmission> {
    let dir = chirality_directionality(spec, polarization, position, tc)?;
    let t = if dir.band_average >= 0.0 {
        dir.right
    } else {
        dir.left
    };
    Ok(Transmission {
        freqs_nu: dir.freqs_nu,
        t,
        meta: dir.meta,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BendTransmission {
    pub freqs_nu: Vec<f64>,
    /// Normalized forward power past the bend and along the straight guide
    /// at equal path length.
    pub t_bend: Vec<f64>,
    pub t_straight: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Normalized power reaching the monitor behind the source.
    pub back_bend: Vec<f64>,
    pub back_straight: Vec<f64>,
    pub band: Band,
    /// Ratio of band-integrated transmissions.
    pub band_ratio: f64,
    /// Extra band-integrated back-scattered power in the bend run, as a
    /// fraction of the straight forward power.
    pub backscatter: f64,
    pub meta_bend: RunMeta,
    pub meta_straight: RunMeta,
}

/// Distance between the source and the monitor behind it, a0.
const BACK_MONITOR_DISTANCE: f64 = 3.0;

/// Compares transport around the 60° corner with a straight guide of equal
/// source-to-monitor path length.
///
/// The source sits on the shrunk cell next to the interface, halfway along
/// the first arm. With `control` set, the straight geometry is simulated in
/// place of the bend, so the ratio must come out as one.
pub fn bend_transmission(
    spec: &LatticeSpec,
    polarization: Polarization,
    tc: &TransportConfig,
    control: bool,
) -> Result<BendTransmission> {
    tc.validate()?;
    let l = tc.arm_length;
    let s3 = 3f64.sqrt();
    let v = interface_vertex();
    let xs = -((l / 2) as f64);
    let source = tc.source([xs, 0.0], polarization);
    let reference = reference_power(spec, &source, tc)?;
    let f = &tc.freqs_nu;

    // Straight run: long enough to hold the full path plus the inset.
    let bend = build_interface_layout(InterfaceKind::Bend60, l, tc.width)?;
    let y_mon = bend.bounds.y1 - tc.monitor_inset;
    let along = (y_mon - v[1]) * 2.0 / s3;
    let path = (v[0] - xs) + along;
    let back_x = xs - BACK_MONITOR_DISTANCE;
    let mut straight = build_interface_layout(InterfaceKind::Straight, 2 * l, tc.width)?;
    straight.bounds.x0 = back_x - tc.monitor_inset;
    straight.bounds.x1 = xs + path + tc.monitor_inset;
    let straight_monitors = [
        interface_monitor("forward", xs + path, 1.0, tc),
        interface_monitor("back", back_x, -1.0, tc),
    ];
    let run_straight = || -> Result<SimResult> {
        run(
            &straight,
            spec,
            &source,
            &straight_monitors,
            &tc.sim,
            &RunOptions::default(),
        )
    };
    let (rs, rb) = if control {
        (run_straight()?, run_straight()?)
    } else {
        let x_if = v[0] + (y_mon - v[1]) / s3;
        // A horizontal cut across the second arm spans the capture width
        // measured normal to the arm.
        let half = tc.capture_half_width * 2.0 / s3;
        let bend_monitors = [
            FluxMonitor::new(
                "forward",
                MonitorLine::Horizontal {
                    y: y_mon,
                    x0: x_if - half,
                    x1: x_if + half,
                },
                1.0,
                f,
            ),
            interface_monitor("back", back_x, -1.0, tc),
        ];
        let mut bend = bend;
        bend.bounds.x0 = back_x - tc.monitor_inset;
        let (a, b) = rayon::join(run_straight, || {
            run(
                &bend,
                spec,
                &source,
                &bend_monitors,
                &tc.sim,
                &RunOptions::default(),
            )
        });
        (a?, b?)
    };
    let t_straight = normalized(&rs.monitor("forward")?.power, &reference);
    let t_bend = normalized(&rb.monitor("forward")?.power, &reference);
    let back_straight = normalized(&rs.monitor("back")?.power, &reference);
    let back_bend = normalized(&rb.monitor("back")?.power, &reference);
    let mask = tc.band_mask();
    let fwd = band_sum(&t_straight, &mask);
    let n = mask.iter().filter(|m| **m).count() as f64;
    if fwd < NOISE_FLOOR * n {
        return Err(Error::Undefined(format!(
            "straight forward power {fwd:.3e} is below the noise floor"
        )));
    }
    let ratio = t_bend
        .iter()
        .zip(&t_straight)
        .map(|(b, s)| if *s != 0.0 { b / s } else { 0.0 })
        .collect();
    Ok(BendTransmission {
        freqs_nu: f.clone(),
        band_ratio: band_sum(&t_bend, &mask) / fwd,
        backscatter: (band_sum(&back_bend, &mask) - band_sum(&back_straight, &mask)) / fwd,
        t_bend,
        t_straight,
        ratio,
        back_bend,
        back_straight,
        band: tc.band,
        meta_bend: rb.meta,
        meta_straight: rs.meta,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Offset across the interface, a0.
    pub offset: f64,
    pub t: Vec<f64>,
    /// Mean transmission over the band.
    pub band_mean: f64,
    /// `band_mean` relative to the on-interface point.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionScan {
    pub freqs_nu: Vec<f64>,
    pub band: Band,
    pub points: Vec<ScanPoint>,
}

impl PositionScan {
    pub fn at(&self, offset: f64) -> Option<&ScanPoint> {
        self.points
            .iter()
            .find(|p| (p.offset - offset).abs() < 1e-9)
    }
}

/// Transmission to the left monitor as a linearly polarized dipole moves
/// across the straight interface. Offset zero is on the interface line;
/// positive offsets go into the shrunk crystal. The dipole may land inside
/// a hole.
pub fn position_scan(
    spec: &LatticeSpec,
    offsets: &[f64],
    tc: &TransportConfig,
) -> Result<PositionScan> {
    tc.validate()?;
    if offsets.is_empty() {
        return Err(Error::InvalidSetup("empty offset list".into()));
    }
    let layout = build_interface_layout(InterfaceKind::Straight, tc.length, tc.width)?;
    let (xl, _) = straight_monitor_x(&layout, tc);
    let monitors = [interface_monitor("left", xl, -1.0, tc)];
    let pol = Polarization::Linear { angle: 0.0 };
    let opts = RunOptions {
        allow_source_in_hole: true,
        ..RunOptions::default()
    };
    // The slab is uniform, so one reference serves every offset.
    let reference = reference_power(spec, &tc.source([0.0, interface_y()], pol), tc)?;
    let mask = tc.band_mask();
    let runs: Vec<Result<(f64, Vec<f64>)>> = {
        use rayon::prelude::*;
        offsets
            .par_iter()
            .map(|&o| {
                let src = tc.source([0.0, interface_y() + o], pol);
                let res = run(&layout, spec, &src, &monitors, &tc.sim, &opts)?;
                Ok((o, normalized(&res.monitor("left")?.power, &reference)))
            })
            .collect()
    };
    let mut points = Vec::with_capacity(runs.len());
    for r in runs {
        let (offset, t) = r?;
        let band_mean = band_mean(&t, &mask);
        points.push(ScanPoint {
            offset,
            t,
            band_mean,
            relative: 0.0,
        });
    }
    let center = points
        .iter()
        .min_by(|a, b| a.offset.abs().total_cmp(&b.offset.abs()))
        .map(|p| p.band_mean)
        .unwrap_or(0.0);
    if !(center > 0.0) {
        return Err(Error::Undefined(
            "no transmission at the on-interface point".into(),
        ));
    }
    for p in &mut points {
        p.relative = p.band_mean / center;
    }
    Ok(PositionScan {
        freqs_nu: tc.freqs_nu.clone(),
        band: tc.band,
        points,
    })
}

/// Converts a lateral offset in micrometres to a0.
pub fn um_to_a0(um: f64, a0_nm: f64) -> f64 {
    um * 1000.0 / a0_nm
}
