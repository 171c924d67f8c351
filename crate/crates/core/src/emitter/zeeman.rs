//! Exciton lines in a Faraday-geometry magnetic field and their routing to
//! the two ends of a chiral waveguide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{BOHR_MAGNETON_UEV_PER_T, UEV_TO_GHZ};

/// Largest field accepted by [`zeeman_lines`], in tesla.
pub const MAX_FIELD_T: f64 = 12.0;

/// Default spectral resolution used to decide whether the branches separate.
pub const SPECTROMETER_RESOLUTION_GHZ: f64 = 7.0;

/// Placeholder exciton g-factor; the dots' value is not known.
pub const DEFAULT_G_FACTOR: f64 = 1.6;

/// Zero-field transition energy of a 940 nm line, in meV.
pub const DEFAULT_E0_MEV: f64 = 1318.98;

/// Circular polarization of a transition or of a point dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Helicity {
    #[serde(rename = "sigma+")]
    Plus,
    #[serde(rename = "sigma-")]
    Minus,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanModel {
    /// Zero-field transition energy (meV).
    pub e0_mev: f64,
    /// Exciton g-factor.
    pub g: f64,
    /// Diamagnetic coefficient (μeV/T²).
    pub kappa_uev_per_t2: f64,
}

impl Default for ZeemanModel {
    fn default() -> Self {
        Self {
            e0_mev: DEFAULT_E0_MEV,
            g: DEFAULT_G_FACTOR,
            kappa_uev_per_t2: 0.0,
        }
    }
}

impl ZeemanModel {
    pub fn new(e0_mev: f64, g: f64, kappa_uev_per_t2: f64) -> Result<Self> {
        if !(e0_mev > 0.0) || !g.is_finite() || !kappa_uev_per_t2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Zeeman model needs E0 > 0 and finite g, kappa (got {e0_mev}, {g}, {kappa_uev_per_t2})"
            )));
        }
        Ok(Self {
            e0_mev,
            g,
            kappa_uev_per_t2,
        })
    }
}

/// One Zeeman branch; energies in meV, frequency `E/h` in THz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanLine {
    pub branch: Helicity,
    pub energy_mev: f64,
    pub freq_thz: f64,
}

impl ZeemanLine {
    fn new(branch: Helicity, energy_mev: f64) -> Self {
        Self {
            branch,
            energy_mev,
            // μeV→GHz and meV→THz share the factor.
            freq_thz: energy_mev * UEV_TO_GHZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanPair {
    pub field_t: f64,
    pub plus: ZeemanLine,
    pub minus: ZeemanLine,
}

impl ZeemanPair {
    /// `E+ − E−` in μeV.
    pub fn splitting_uev(&self) -> f64 {
        1e3 * (self.plus.energy_mev - self.minus.energy_mev)
    }

    pub fn splitting_ghz(&self) -> f64 {
        self.splitting_uev() * UEV_TO_GHZ
    }
}

/// `E± = E0 ± g μB B / 2 + kappa B²`.
pub fn zeeman_lines(model: &ZeemanModel, field_t: f64) -> Result<ZeemanPair> {
    if !(0.0..=MAX_FIELD_T).contains(&field_t) {
        return Err(Error::InvalidArgument(format!(
            "field {field_t} T outside [0, {MAX_FIELD_T}] T"
        )));
    }
    let half = 0.5 * model.g * BOHR_MAGNETON_UEV_PER_T * field_t * 1e-3;
    let shift = model.kappa_uev_per_t2 * field_t * field_t * 1e-3;
    Ok(ZeemanPair {
        field_t,
        plus: ZeemanLine::new(Helicity::Plus, model.e0_mev + half + shift),
        minus: ZeemanLine::new(Helicity::Minus, model.e0_mev - half + shift),
    })
}

/// Lines at each field of a sweep.
pub fn zeeman_table(model: &ZeemanModel, fields_t: &[f64]) -> Result<Vec<ZeemanPair>> {
    fields_t.iter().map(|&b| zeeman_lines(model, b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grating {
    Left,
    Right,
}

/// Which way a σ+ dipole launches light along the interface. The default
/// matches the simulation convention (σ+ toward +x, the right grating).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiralityConvention {
    #[default]
    PlusRight,
    PlusLeft,
}

impl ChiralityConvention {
    pub fn flipped(self) -> Self {
        match self {
            Self::PlusRight => Self::PlusLeft,
            Self::PlusLeft => Self::PlusRight,
        }
    }

    pub fn grating(self, branch: Helicity) -> Grating {
        match (self, branch) {
            (Self::PlusRight, Helicity::Plus) | (Self::PlusLeft, Helicity::Minus) => Grating::Right,
            _ => Grating::Left,
        }
    }
}

/// The single line expected at one grating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub grating: Grating,
    pub line: ZeemanLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingTable {
    pub field_t: f64,
    pub convention: ChiralityConvention,
    /// Left grating first.
    pub routes: [Route; 2],
}

impl RoutingTable {
    pub fn at(&self, grating: Grating) -> &ZeemanLine {
        &self
            .routes
            .iter()
            .find(|r| r.grating == grating)
            .unwrap()
            .line
    }
}

/// Expected spectrum at each grating: exactly one Zeeman branch each.
pub fn branch_routing_table(
    model: &ZeemanModel,
    field_t: f64,
    resolution_ghz: f64,
    convention: ChiralityConvention,
) -> Result<RoutingTable> {
    let pair = zeeman_lines(model, field_t)?;
    let splitting_ghz = pair.splitting_ghz().abs();
    if !(splitting_ghz > resolution_ghz) {
        return Err(Error::Unresolved {
            splitting_ghz,
            resolution_ghz,
        });
    }
    let route = |line: ZeemanLine| Route {
        grating: convention.grating(line.branch),
        line,
    };
    let (a, b) = (route(pair.plus), route(pair.minus));
    let routes = if a.grating == Grating::Left {
        [a, b]
    } else {
        [b, a]
    };
    Ok(RoutingTable {
        field_t,
        convention,
        routes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_at_zero_field() {
        let p = zeeman_lines(&ZeemanModel::default(), 0.0).unwrap();
        assert_eq!(p.plus.energy_mev, p.minus.energy_mev);
        assert_eq!(p.plus.energy_mev, DEFAULT_E0_MEV);
    }

    #[test]
    fn splitting_at_maximum_field() {
        // 1.6 · 57.8838 μeV/T · 9.2 T
        let m = ZeemanModel::new(1300.0, 1.6, 0.0).unwrap();
        let p = zeeman_lines(&m, 9.2).unwrap();
        assert!(
            (p.splitting_uev() - 852.05).abs() < 0.01,
            "{}",
            p.splitting_uev()
        );
    }

    #[test]
    fn field_out_of_range() {
        let m = ZeemanModel::default();
        assert!(zeeman_lines(&m, -0.1).is_err());
        assert!(zeeman_lines(&m, 12.5).is_err());
        assert!(ZeemanModel::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn routing_sends_one_branch_to_each_grating() {
        let m = ZeemanModel::default();
        let t =
            branch_routing_table(&m, 5.0, SPECTROMETER_RESOLUTION_GHZ, Default::default()).unwrap();
        assert_eq!(t.at(Grating::Right).branch, Helicity::Plus);
        assert_eq!(t.at(Grating::Left).branch, Helicity::Minus);
        let f = branch_routing_table(
            &m,
            5.0,
            SPECTROMETER_RESOLUTION_GHZ,
            ChiralityConvention::PlusLeft,
        )
        .unwrap();
        assert_eq!(f.at(Grating::Right), t.at(Grating::Left));
        assert_eq!(f.at(Grating::Left), t.at(Grating::Right));
    }

    #[test]
    fn routing_needs_resolvable_splitting() {
        let m = ZeemanModel::default();
        let e = branch_routing_table(&m, 0.0, SPECTROMETER_RESOLUTION_GHZ, Default::default());
        assert!(matches!(e, Err(Error::Unresolved { .. })));
        // 1.6 μB · 0.05 T ≈ 1.1 GHz
        assert!(branch_routing_table(&m, 0.05, 7.0, Default::default()).is_err());
    }

    proptest! {
        #[test]
        fn linear_without_diamagnetic_shift(g in 0.1f64..4.0, b in 0.0f64..12.0) {
            let m = ZeemanModel::new(1300.0, g, 0.0).unwrap();
            let p = zeeman_lines(&m, b).unwrap();
            let want = g * BOHR_MAGNETON_UEV_PER_T * b;
            prop_assert!((p.splitting_uev() - want).abs() <= 1e-9 * want.max(1.0));
        }

        #[test]
        fn midpoint_carries_diamagnetic_shift(
            g in 0.1f64..4.0, kappa in -20.0f64..20.0, b in 0.0f64..12.0,
        ) {
            let m = ZeemanModel::new(1300.0, g, kappa).unwrap();
            let p = zeeman_lines(&m, b).unwrap();
            let mid = 0.5 * (p.plus.energy_mev + p.minus.energy_mev) - 1300.0;
            prop_assert!((mid - kappa * b * b * 1e-3).abs() < 1e-9);
        }
    }
}
