use num_complex::Complex64;

use super::{
    build, check_grid, sb_complex_rate, spectral_integral, spectral_transform, ComplexRate,
    Correlator, CorrelatorKind, Method, SBParams,
};
use crate::error::{Error, Result};
use crate::mathkit::{weighted_complement, weighted_occupation, Estimate, Statistics};

const MODEL: &str = "spin_boson";

fn rate(p: &SBParams) -> Result<ComplexRate> {
    let g = sb_complex_rate(p)?;
    if !(g.value.re > 0.0) {
        return Err(Error::Domain(
            "spin-boson damping Re G̃ must be positive".into(),
        ));
    }
    Ok(g)
}

fn weight(p: &SBParams, kind: CorrelatorKind) -> Result<impl Fn(f64) -> f64 + Sync + '_> {
    let plus = match kind {
        CorrelatorKind::PlusMinus => true,
        CorrelatorKind::MinusPlus => false,
        other => {
            return Err(Error::Config(format!(
                "{other:?} is not a spin correlator kind"
            )))
        }
    };
    Ok(move |x: f64| {
        let v = if plus {
            weighted_occupation(&p.j, x, p.beta, Statistics::Boson)
        } else {
            weighted_complement(&p.j, x, p.beta, Statistics::Boson)
        };
        v.unwrap_or(f64::NAN)
    })
}

/// Spectral integrand of [`sb_mqrt_eq`].
pub fn sb_mqrt_integrand(
    p: &SBParams,
    kind: CorrelatorKind,
) -> Result<impl Fn(f64) -> f64 + Sync + '_> {
    let g = rate(p)?;
    let w = weight(p, kind)?;
    Ok(move |x: f64| w(x) / g.denominator(x))
}

/// `⟨σ₊(t+τ)σ₋(t)⟩` or `⟨σ₋(t)σ₊(t+τ)⟩` from the modified regression theorem.
pub fn sb_mqrt_eq(p: &SBParams, kind: CorrelatorKind, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let g = rate(p)?;
    let w = weight(p, kind)?;
    let est = spectral_transform(
        &|x| Complex64::new(w(x) / g.denominator(x), 0.0),
        taus,
        &p.j,
        &[g.omega0_prime],
        &p.quad,
    )?;
    build(taus, est, MODEL, Method::Mqrt, kind, p.digest())
}

/// Standard-regression spin correlators: `e^{−G̃τ}` times the equal-time integral.
pub fn sb_sqrt_eq(p: &SBParams, kind: CorrelatorKind, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let g = rate(p)?;
    let w = weight(p, kind)?;
    let base = spectral_integral(
        &|x| w(x) / g.denominator(x),
        &p.j,
        &[g.omega0_prime],
        &p.quad,
    )?;
    let est = taus
        .iter()
        .map(|&t| {
            let e = base.scale(g.propagator(t.abs()));
            if t < 0.0 {
                Estimate {
                    value: e.value.conj(),
                    error: e.error,
                }
            } else {
                e
            }
        })
        .collect();
    build(taus, est, MODEL, Method::Sqrt, kind, p.digest())
}
