//! Discretisation and absorbing-layer settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded convolutional PML. The layer sits outside the device bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlParams {
    /// Thickness in pixels.
    pub cells: usize,
    /// Polynomial grading order.
    pub order: f64,
    /// Design round-trip reflection at normal incidence.
    pub reflection: f64,
    pub kappa_max: f64,
    /// Complex-frequency shift at the inner edge, in units of c/a0.
    pub alpha_max: f64,
}

impl Default for PmlParams {
    fn default() -> Self {
        Self {
            cells: 24,
            order: 3.0,
            reflection: 1e-8,
            kappa_max: 1.0,
            alpha_max: 0.1,
        }
    }
}

/// Which sides absorb; the others are perfect electric conductors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorbers {
    pub x: bool,
    pub y: bool,
}

impl Default for Absorbers {
    fn default() -> Self {
        Self { x: true, y: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Pixels per a0.
    pub resolution: usize,
    /// Fraction of the 2D Courant limit `dx / √2`.
    pub courant: f64,
    /// Run length in optical periods of the source carrier.
    pub duration_periods: f64,
    pub pml: PmlParams,
    pub absorbers: Absorbers,
    /// Time steps between samples of the running Fourier transforms.
    pub dft_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            resolution: 24,
            courant: 0.95,
            duration_periods: 600.0,
            pml: PmlParams::default(),
            absorbers: Absorbers::default(),
            dft_stride: 8,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.courant > 0.0 && self.courant < 1.0) {
            return Err(Error::Unstable(format!(
                "safety factor {} must lie in (0, 1)",
                self.courant
            )));
        }
        if self.resolution < 16 {
            return Err(Error::InvalidSetup(format!(
                "resolution must be at least 16 px/a0, got {}",
                self.resolution
            )));
        }
        if self.pml.cells < 8 {
            return Err(Error::InvalidSetup(format!(
                "absorbing layer must be at least 8 px thick, got {}",
                self.pml.cells
            )));
        }
        if !(self.pml.reflection > 0.0 && self.pml.reflection < 1.0)
            || !(self.pml.kappa_max >= 1.0)
            || !(self.pml.alpha_max >= 0.0)
            || !(self.pml.order >= 0.0)
        {
            return Err(Error::InvalidSetup(format!(
                "bad absorbing-layer grading {:?}",
                self.pml
            )));
        }
        if !(self.duration_periods > 0.0) || self.dft_stride == 0 {
            return Err(Error::InvalidSetup(
                "duration and DFT stride must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Time step in units of a0/c.
    pub fn dt(&self) -> f64 {
        self.courant * self.dx() / std::f64::consts::SQRT_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_enforced() {
        assert!(SimConfig::default().validate().is_ok());
        for c in [0.0, 1.0, 1.2] {
            let cfg = SimConfig {
                courant: c,
                ..Default::default()
            };
            assert!(matches!(cfg.validate(), Err(Error::Unstable(_))));
        }
        let cfg = SimConfig {
            resolution: 12,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::default();
        cfg.pml.cells = 4;
        assert!(cfg.validate().is_err());
    }
}
