//! Physical constants and frequency conversions.

use serde::{Deserialize, Serialize};

/// Speed of light expressed in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Bohr magneton in μeV/T.
pub const BOHR_MAGNETON_UEV_PER_T: f64 = 57.883_818_060;

/// 1 μeV expressed as a frequency in GHz (E/h).
pub const UEV_TO_GHZ: f64 = 0.241_798_924_2;

/// Two frequencies closer than this (dimensionless) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-4;

/// Conversion between the dimensionless frequency `a0/lambda` and THz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScale {
    pub c_over_a0_thz: f64,
}

impl FrequencyScale {
    pub fn for_lattice_constant(a0_nm: f64) -> Self {
        Self {
            c_over_a0_thz: SPEED_OF_LIGHT_NM_THZ / a0_nm,
        }
    }

    pub fn to_thz(&self, nu: f64) -> f64 {
        nu * self.c_over_a0_thz
    }

    pub fn to_nu(&self, thz: f64) -> f64 {
        thz / self.c_over_a0_thz
    }

    /// Vacuum wavelength in nm for a dimensionless frequency.
    pub fn wavelength_nm(&self, nu: f64) -> f64 {
        SPEED_OF_LIGHT_NM_THZ / self.to_thz(nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_anchor_in_dimensionless_units() {
        let scale = FrequencyScale::for_lattice_constant(445.0);
        assert!((scale.c_over_a0_thz - 673.691).abs() < 1e-3);
        let nu = scale.to_nu(319.0);
        assert!((nu - 0.4735).abs() < 1e-4);
        assert!((scale.wavelength_nm(nu) - 939.8).abs() < 0.1);
    }
}
