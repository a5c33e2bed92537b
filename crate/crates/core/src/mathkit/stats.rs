use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particle statistics of the system mode and its bath.
///
/// The sign convention follows `n(Ω) = 1 / (e^{βΩ} + η)`, so fermions carry
/// `η = +1` and bosons `η = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    pub fn eta(self) -> f64 {
        match self {
            Statistics::Fermion => 1.0,
            Statistics::Boson => -1.0,
        }
    }

    pub fn from_eta(eta: i32) -> Result<Self> {
        match eta {
            1 => Ok(Statistics::Fermion),
            -1 => Ok(Statistics::Boson),
            other => Err(Error::Domain(format!(
                "statistics flag must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// Fermi or Bose occupation `1/(e^{βΩ}+η)`.
pub fn occupation(omega: f64, beta: f64, stats: Statistics) -> Result<f64> {
    let x = beta * omega;
    match stats {
        Statistics::Fermion => Ok(if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (x.exp() + 1.0)
        }),
        Statistics::Boson => {
            if x == 0.0 {
                return Err(Error::Domain("Bose occupation has a pole at Ω = 0".into()));
            }
            if x > 0.0 {
                Ok(1.0 / x.exp_m1())
            } else {
                // 1/(e^x - 1) = -1 - 1/(e^{-x} - 1)
                Ok(-1.0 - 1.0 / (-x).exp_m1())
            }
        }
    }
}

/// `1 - η n_η(Ω)`, the weight of the anti-normally ordered bath correlator.
///
/// Equals `e^{βΩ} n_η(Ω)`; computed from the latter form for `βΩ < 0` so that
/// the value stays accurate when it is exponentially small.
pub fn complementary_occupation(omega: f64, beta: f64, stats: Statistics) -> Result<f64> {
    let n = occupation(omega, beta, stats)?;
    let x = beta * omega;
    if x < 0.0 {
        // e^{x} n(x) = e^{x}/(e^{x}+η) = 1/(1 + η e^{-x})
        Ok(1.0 / (1.0 + stats.eta() * (-x).exp()))
    } else {
        Ok(1.0 - stats.eta() * n)
    }
}

/// `βΩ · n_η(Ω)`, finite at Ω = 0 for bosons (limit 1).
pub(crate) fn scaled_bose(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else if x > 0.0 {
        x / x.exp_m1()
    } else {
        x * (-1.0 - 1.0 / (-x).exp_m1())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermi_at_zero_is_half() {
        assert_eq!(occupation(0.0, 1.0, Statistics::Fermion).unwrap(), 0.5);
    }

    #[test]
    fn fermi_at_ln2() {
        let n = occupation(2f64.ln(), 1.0, Statistics::Fermion).unwrap();
        assert!((n - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bose_negative_frequency() {
        let n = occupation(-1.0, 1.0, Statistics::Boson).unwrap();
        let direct = 1.0 / ((-1f64).exp() - 1.0);
        assert!((n - direct).abs() < 1e-14);
        assert!((n + 1.581_976_706_869_326_5).abs() < 1e-12);
        let mirror = occupation(1.0, 1.0, Statistics::Boson).unwrap();
        assert!((n + 1.0 + mirror).abs() < 1e-14);
    }

    #[test]
    fn bose_pole_is_rejected() {
        assert!(matches!(
            occupation(0.0, 2.0, Statistics::Boson),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        for &s in &[Statistics::Fermion, Statistics::Boson] {
            for &x in &[-800.0, -40.0, 40.0, 800.0] {
                let n = occupation(x, 1.0, s).unwrap();
                let c = complementary_occupation(x, 1.0, s).unwrap();
                assert!(n.is_finite() && c.is_finite());
            }
        }
        assert_eq!(occupation(800.0, 1.0, Statistics::Fermion).unwrap(), 0.0);
        assert_eq!(
            complementary_occupation(-800.0, 1.0, Statistics::Boson).unwrap(),
            -0.0
        );
    }

    #[test]
    fn eta_round_trip() {
        assert_eq!(Statistics::from_eta(1).unwrap(), Statistics::Fermion);
        assert_eq!(Statistics::from_eta(-1).unwrap(), Statistics::Boson);
        assert!(Statistics::from_eta(0).is_err());
    }
}
