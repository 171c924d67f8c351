//! Point dipole sources with circular or linear in-plane polarization.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use helix_core::emitter::Helicity;

use crate::error::{Error, Result};

/// In-plane dipole orientation. `σ±` is the pair `(x, y)` with the `y`
/// component lagging (σ+) or leading (σ−) by 90°, i.e. phasors `(1, ∓i)`
/// for time dependence `exp(-iωt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Polarization {
    Circular {
        helicity: Helicity,
    },
    /// Angle from the x axis, radians.
    Linear {
        angle: f64,
    },
}

impl Polarization {
    pub const SIGMA_PLUS: Self = Self::Circular {
        helicity: Helicity::Plus,
    };
    pub const SIGMA_MINUS: Self = Self::Circular {
        helicity: Helicity::Minus,
    };

    pub fn label(&self) -> String {
        match self {
            Self::Circular {
                helicity: Helicity::Plus,
            } => "sigma+".into(),
            Self::Circular {
                helicity: Helicity::Minus,
            } => "sigma-".into(),
            Self::Linear { angle } => format!("linear({:.1}deg)", angle.to_degrees()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// Gaussian pulse whose spectrum has standard deviation `bandwidth_nu`.
    GaussianPulse { bandwidth_nu: f64 },
    /// Continuous wave switched on with a `sin²` ramp.
    Continuous { ramp_periods: f64 },
}

/// Pulse delay in units of the envelope width.
const PULSE_DELAY_WIDTHS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSource {
    /// Position in units of a0.
    pub position: [f64; 2],
    pub polarization: Polarization,
    /// Carrier frequency, dimensionless `a0/λ`.
    pub carrier_nu: f64,
    pub envelope: Envelope,
}

impl DipoleSource {
    pub fn validate(&self) -> Result<()> {
        let ok = self.carrier_nu > 0.0
            && self.position.iter().all(|p| p.is_finite())
            && match self.envelope {
                Envelope::GaussianPulse { bandwidth_nu } => {
                    bandwidth_nu > 0.0 && bandwidth_nu < self.carrier_nu
                }
                Envelope::Continuous { ramp_periods } => ramp_periods > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSetup(format!("bad dipole source {self:?}")))
        }
    }

    fn envelope(&self, t: f64) -> (f64, f64) {
        match self.envelope {
            Envelope::GaussianPulse { bandwidth_nu } => {
                let tau = 1.0 / (2.0 * PI * bandwidth_nu);
                let t0 = PULSE_DELAY_WIDTHS * tau;
                let u = (t - t0) / tau;
                ((-0.5 * u * u).exp(), t0)
            }
            Envelope::Continuous { ramp_periods } => {
                let ramp = ramp_periods / self.carrier_nu;
                let e = if t >= ramp {
                    1.0
                } else if t <= 0.0 {
                    0.0
                } else {
                    (0.5 * PI * t / ramp).sin().powi(2)
                };
                (e, 0.0)
            }
        }
    }

    /// Dipole moment components `(p_x, p_y)` at time `t` (a0/c).
    pub fn moment(&self, t: f64) -> [f64; 2] {
        let (env, t0) = self.envelope(t);
        let phase = 2.0 * PI * self.carrier_nu * (t - t0);
        let (s, c) = phase.sin_cos();
        match self.polarization {
            // Re[(1, ∓i) e^{-iφ}] = (cos φ, ∓sin φ)
            Polarization::Circular { helicity } => [env * c, -helicity.sign() * env * s],
            Polarization::Linear { angle } => [env * c * angle.cos(), env * c * angle.sin()],
        }
    }

    /// Time after which a pulse has decayed to `e^-18` of its peak.
    pub fn pulse_end(&self) -> f64 {
        match self.envelope {
            Envelope::GaussianPulse { bandwidth_nu } => {
                2.0 * PULSE_DELAY_WIDTHS / (2.0 * PI * bandwidth_nu)
            }
            Envelope::Continuous { .. } => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(p: Polarization) -> DipoleSource {
        DipoleSource {
            position: [0.0, 0.0],
            polarization: p,
            carrier_nu: 0.5,
            envelope: Envelope::Continuous { ramp_periods: 1.0 },
        }
    }

    #[test]
    fn sigma_plus_rotates_clockwise() {
        // (cos φ, -sin φ): from +x toward -y as time advances.
        let s = src(Polarization::SIGMA_PLUS);
        let a = s.moment(10.0);
        let b = s.moment(10.1);
        assert!((a[0] - 1.0).abs() < 1e-12 && a[1].abs() < 1e-12);
        assert!(a[0] * b[1] - a[1] * b[0] < 0.0);
        let m = src(Polarization::SIGMA_MINUS).moment(10.1);
        assert!((m[1] + b[1]).abs() < 1e-12 && (m[0] - b[0]).abs() < 1e-12);
    }

    #[test]
    fn pulse_is_centered_and_bounded() {
        let s = DipoleSource {
            envelope: Envelope::GaussianPulse { bandwidth_nu: 0.05 },
            ..src(Polarization::Linear { angle: 0.0 })
        };
        assert!(s.moment(0.0)[0].abs() < 1e-7);
        assert!(s.moment(s.pulse_end())[0].abs() < 1e-7);
        let tau = 1.0 / (2.0 * PI * 0.05);
        assert!((s.moment(6.0 * tau)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_sources_rejected() {
        let mut s = src(Polarization::SIGMA_PLUS);
        s.carrier_nu = 0.0;
        assert!(s.validate().is_err());
        s.carrier_nu = 0.4;
        s.envelope = Envelope::GaussianPulse { bandwidth_nu: 0.5 };
        assert!(s.validate().is_err());
    }
}
