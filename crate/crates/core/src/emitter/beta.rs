//! Lower bound on the fraction of emission captured by the waveguide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integrated counts at the left and right gratings and directly above the
/// emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInputs {
    pub i_l: f64,
    pub i_r: f64,
    pub i_m: f64,
}

impl BetaInputs {
    pub fn new(i_l: f64, i_r: f64, i_m: f64) -> Result<Self> {
        if [i_l, i_r, i_m]
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "counts must be finite and non-negative (got {i_l}, {i_r}, {i_m})"
            )));
        }
        Ok(Self { i_l, i_r, i_m })
    }
}

/// `(I_L + I_R) / (I_L + I_R + I_M)`.
pub fn beta_factor(inputs: &BetaInputs) -> Result<f64> {
    let guided = inputs.i_l + inputs.i_r;
    let total = guided + inputs.i_m;
    if !(total > 0.0) {
        return Err(Error::Undefined("beta factor with all counts zero".into()));
    }
    Ok(guided / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn beta(l: f64, r: f64, m: f64) -> Result<f64> {
        beta_factor(&BetaInputs::new(l, r, m)?)
    }

    #[test]
    fn limits() {
        assert_eq!(beta(3.0, 5.0, 0.0).unwrap(), 1.0);
        assert_eq!(beta(7.0, 7.0, 7.0).unwrap(), 2.0 / 3.0);
        assert!(matches!(beta(0.0, 0.0, 0.0), Err(Error::Undefined(_))));
        assert!(BetaInputs::new(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn reported_lower_bound() {
        // 680 guided counts out of 1000.
        assert!((beta(400.0, 280.0, 320.0).unwrap() - 0.68).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn invariant_under_common_scaling(
            l in 0.0f64..1e6, r in 0.0f64..1e6, m in 1.0f64..1e6, s in 1e-3f64..1e3,
        ) {
            let a = beta(l, r, m).unwrap();
            let b = beta(s * l, s * r, s * m).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
