//! Effective-index calibration against the pristine Dirac frequency.

use serde::{Deserialize, Serialize};

use super::kpath::BlochVector;
use super::solve::{solve_modes, PweSettings};
use crate::error::{Error, Result};
use crate::geometry::{fourier_epsilon, LatticeSpec, Region};

/// Four-fold Γ degeneracy of the pristine lattice (bands 1..=4, 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracPoint {
    pub nu: f64,
    pub thz: f64,
    /// Spread of the four frequencies.
    pub splitting_nu: f64,
    pub splitting_thz: f64,
    pub basis_size: usize,
}

pub fn dirac_point(spec: &LatticeSpec, settings: PweSettings) -> Result<DiracPoint> {
    let eps = fourier_epsilon(spec, Region::Pristine, settings.gmax, settings.rule)?;
    let m = solve_modes(&eps, BlochVector::GAMMA, 6, false)?;
    let four = &m.nu[1..=4];
    let nu = four.iter().sum::<f64>() / 4.0;
    let split = four[3] - four[0];
    let c = spec.frequency_scale().c_over_a0_thz;
    Ok(DiracPoint {
        nu,
        thz: nu * c,
        splitting_nu: split,
        splitting_thz: split * c,
        basis_size: m.basis.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n_eff: f64,
    pub target_thz: f64,
    pub dirac: DiracPoint,
    pub iterations: usize,
}

/// Effective index that puts the pristine Dirac point of the device
/// geometry at 319 THz with the default plane-wave settings.
pub const DEVICE_NEFF: f64 = 2.9440518;

/// Lower and upper ends of the effective-index bracket.
pub const NEFF_BRACKET: (f64, f64) = (1.2, 5.0);

/// Bisection on `n_eff` until the pristine Dirac frequency of `template`
/// (whose own `n_eff` is ignored) matches `target_thz` to 1e-7 relative.
pub fn calibrate_neff(
    template: &LatticeSpec,
    target_thz: f64,
    settings: PweSettings,
) -> Result<Calibration> {
    if !(target_thz > 250.0 && target_thz < 400.0) {
        return Err(Error::Calibration(format!(
            "target {target_thz} THz outside the supported (250, 400) THz window"
        )));
    }
    let at = |n: f64| -> Result<DiracPoint> {
        let mut s = *template;
        s.n_eff = n;
        dirac_point(&s, settings)
    };
    let (mut lo, mut hi) = (NEFF_BRACKET.0.max(template.n_hole + 0.05), NEFF_BRACKET.1);
    let (f_lo, f_hi) = (at(lo)?.thz, at(hi)?.thz);
    if !(f_lo >= target_thz && f_hi <= target_thz) {
        return Err(Error::Calibration(format!(
            "Dirac frequency spans [{f_hi:.2}, {f_lo:.2}] THz for n_eff in [{lo}, {hi}]; {target_thz} THz is not bracketed"
        )));
    }
    let mut iterations = 0;
    let mut best = at(0.5 * (lo + hi))?;
    let mut n = 0.5 * (lo + hi);
    while iterations < 80 {
        iterations += 1;
        n = 0.5 * (lo + hi);
        best = at(n)?;
        if (best.thz - target_thz).abs() <= 1e-7 * target_thz {
            break;
        }
        // Frequency decreases with index.
        if best.thz > target_thz {
            lo = n;
        } else {
            hi = n;
        }
    }
    Ok(Calibration {
        n_eff: n,
        target_thz,
        dirac: best,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> PweSettings {
        PweSettings {
            gmax: 6.0,
            ..PweSettings::default()
        }
    }

    #[test]
    fn dirac_frequency_falls_with_index() {
        let s = LatticeSpec::device(2.5);
        let a = dirac_point(&s, coarse()).unwrap();
        let mut t = s;
        t.n_eff = 3.0;
        let b = dirac_point(&t, coarse()).unwrap();
        assert!(b.nu < a.nu);
        assert!(a.splitting_nu < 1e-6, "{a:?}");
    }

    #[test]
    fn device_index_reproduces_anchor() {
        let d = dirac_point(&LatticeSpec::device(DEVICE_NEFF), PweSettings::default()).unwrap();
        assert!((d.thz - 319.0).abs() < 1e-3, "{d:?}");
    }

    #[test]
    fn out_of_window_target() {
        let s = LatticeSpec::device(2.9);
        assert!(matches!(
            calibrate_neff(&s, 450.0, coarse()),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn hits_target() {
        let s = LatticeSpec::device(2.9);
        let c = calibrate_neff(&s, 319.0, coarse()).unwrap();
        assert!((c.dirac.thz - 319.0).abs() < 1e-3);
        assert!(c.n_eff > 2.4 && c.n_eff < 3.5);
    }
}
