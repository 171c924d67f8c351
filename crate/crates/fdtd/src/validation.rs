//! Self-checks of the engine against closed-form and two-run references:
//! pulse speed in a uniform slab, reflection from the absorbing layers and
//! the energy budget of a lossless crystal.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use helix_core::geometry::{DeviceLayout, LatticeSpec, Rect, Region};

use crate::config::{Absorbers, SimConfig};
use crate::engine::{run, EnergyBalance, RunOptions};
use crate::error::{Error, Result};
use crate::monitor::{Component, PointProbe};
use crate::source::{DipoleSource, Envelope, Polarization};

/// Height of the parallel-plate channel used by the one-dimensional checks.
const CHANNEL: f64 = 0.25;

fn channel(len: f64) -> DeviceLayout {
    DeviceLayout::homogeneous(Rect {
        x0: 0.0,
        x1: len,
        y0: 0.0,
        y1: CHANNEL,
    })
}

/// A `y`-polarized line current across a channel closed in `y` launches a
/// plane pulse along `x`.
fn plane_pulse(bandwidth_nu: f64) -> DipoleSource {
    DipoleSource {
        position: [2.0, 0.5 * CHANNEL],
        polarization: Polarization::Linear { angle: FRAC_PI_2 },
        carrier_nu: 0.48,
        envelope: Envelope::GaussianPulse { bandwidth_nu },
    }
}

fn channel_config(resolution: usize) -> SimConfig {
    SimConfig {
        resolution,
        absorbers: Absorbers { x: true, y: false },
        duration_periods: 60.0,
        ..SimConfig::default()
    }
}

fn probe(name: &str, x: f64) -> PointProbe {
    PointProbe {
        name: name.into(),
        position: [x, 0.5 * CHANNEL],
        component: Component::Hz,
    }
}

/// Arrival time of the energy centroid of a probe trace.
fn centroid(values: &[f64], dt: f64) -> f64 {
    let w: f64 = values.iter().map(|v| v * v).sum();
    values
        .iter()
        .enumerate()
        .map(|(i, v)| i as f64 * v * v)
        .sum::<f64>()
        / w
        * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedCheck {
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Group speed of a pulse between two probes 4 a0 apart in the uniform
/// slab, against `c/n`.
pub fn pulse_speed(spec: &LatticeSpec, resolution: usize) -> Result<SpeedCheck> {
    let opts = RunOptions {
        probes: vec![probe("near", 4.0), probe("far", 8.0)],
        ..RunOptions::default()
    };
    let res = run(
        &channel(40.0),
        spec,
        &plane_pulse(0.05),
        &[],
        &channel_config(resolution),
        &opts,
    )?;
    let dt = res.meta.dt;
    let t0 = centroid(&res.probes[0].values, dt);
    let t1 = centroid(&res.probes[1].values, dt);
    let measured = 4.0 / (t1 - t0);
    let expected = 1.0 / spec.eps_background().sqrt();
    Ok(SpeedCheck {
        measured,
        expected,
        relative_error: (measured - expected).abs() / expected,
    })
}

/// Energy of the wave returned by the absorbing layer at normal incidence,
/// relative to the incident pulse: a short channel ending in the layer is
/// compared with a channel long enough that nothing returns in time.
pub fn pml_reflection(spec: &LatticeSpec, resolution: usize, cells: usize) -> Result<f64> {
    let mut cfg = channel_config(resolution);
    cfg.pml.cells = cells;
    let opts = RunOptions {
        probes: vec![probe("p", 8.0)],
        ..RunOptions::default()
    };
    let src = plane_pulse(0.05);
    let short = run(&channel(10.0), spec, &src, &[], &cfg, &opts)?;
    let long = run(&channel(40.0), spec, &src, &[], &cfg, &opts)?;
    let (a, b) = (&short.probes[0].values, &long.probes[0].values);
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let inc: f64 = b.iter().map(|y| y * y).sum();
    if !(inc > 0.0) {
        return Err(Error::Undefined("no incident pulse recorded".into()));
    }
    Ok(diff / inc)
}

/// Energy injected by a circular dipole inside a lossless shrunk crystal
/// against the flux through a closed box plus the energy still stored.
pub fn energy_balance(spec: &LatticeSpec, resolution: usize) -> Result<EnergyBalance> {
    let layout = DeviceLayout::bulk(
        Region::Shrunk,
        Rect {
            x0: -4.0,
            x1: 4.0,
            y0: -4.0,
            y1: 4.0,
        },
    );
    let cfg = SimConfig {
        resolution,
        duration_periods: 300.0,
        ..SimConfig::default()
    };
    let src = DipoleSource {
        position: [0.0, 0.0],
        polarization: Polarization::SIGMA_PLUS,
        carrier_nu: 0.45,
        envelope: Envelope::GaussianPulse { bandwidth_nu: 0.05 },
    };
    let opts = RunOptions {
        energy_box: Some(Rect {
            x0: -3.5,
            x1: 3.5,
            y0: -3.5,
            y1: 3.5,
        }),
        ..RunOptions::default()
    };
    let res = run(&layout, spec, &src, &[], &cfg, &opts)?;
    res.energy
        .ok_or_else(|| Error::Undefined("energy tracking was not recorded".into()))
}
