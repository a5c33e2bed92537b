use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{complex_rate, spectral_transform_complex, BFParams};
use crate::error::{Error, Result};
use crate::mathkit::{Estimate, Statistics};

/// Position of the number operator in the three-point correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreePointOrdering {
    /// `⟨a†(t+τ₁+τ₂) a(t+τ₂) N(t)⟩`
    NRight,
    /// `⟨N(t) a†(t+τ₁+τ₂) a(t+τ₂)⟩`
    NLeft,
}

/// Bosonic three-point correlator at equilibrium for real `τ₁, τ₂`.
pub fn three_point_mqrt_eq(
    p: &BFParams,
    tau1: f64,
    tau2: f64,
    ordering: ThreePointOrdering,
) -> Result<Complex64> {
    three_point_mqrt_continued(
        p,
        Complex64::new(tau1, 0.0),
        Complex64::new(tau2, 0.0),
        ordering,
    )
    .map(|e| e.value)
}

/// The same integrals with `τ₁, τ₂` continued into the complex plane, as
/// needed for imaginary-time shifts.
pub fn three_point_mqrt_continued(
    p: &BFParams,
    tau1: Complex64,
    tau2: Complex64,
    ordering: ThreePointOrdering,
) -> Result<Estimate> {
    if p.stats != Statistics::Boson {
        return Err(Error::Config(
            "three-point correlators are implemented for bosons only".into(),
        ));
    }
    let g = complex_rate(p)?;
    if !(g.gamma > 0.0) {
        return Err(Error::Domain(
            "three-point correlator needs J(ω₀) > 0".into(),
        ));
    }
    let n0 = p.n0()?;
    let w0 = p.omega0;
    let f = |x: f64| Complex64::new(p.f(x) / g.denominator(x), 0.0);
    let fc = |x: f64| Complex64::new(p.f_complement(x) / g.denominator(x), 0.0);
    let breaks = [g.omega0_prime, w0];
    let i = Complex64::i();

    // F/D at {τ₁, τ₁+τ₂, −τ₂}; (J+F)/D at {τ₁+τ₂, −τ₂}
    let times_f = [tau1, tau1 + tau2, -tau2];
    let times_fc = [tau1 + tau2, -tau2];
    let ef = spectral_transform_complex(&f, &times_f, &p.j, &breaks, &p.quad)?;
    let efc = spectral_transform_complex(&fc, &times_fc, &p.j, &breaks, &p.quad)?;

    let phase_sum = (i * w0 * (tau1 + tau2)).exp();
    let phase_back = (-i * w0 * tau2).exp();
    let first = ef[0].scale(Complex64::new(n0, 0.0));
    let total = match ordering {
        ThreePointOrdering::NRight => {
            first + efc[1].scale(phase_sum * n0) + ef[1].scale(phase_back * (1.0 + n0))
        }
        ThreePointOrdering::NLeft => {
            first + ef[2].scale(phase_sum * (1.0 + n0)) + efc[0].scale(phase_back * n0)
        }
    };
    Ok(total)
}
