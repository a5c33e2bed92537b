use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{integrate_family, Estimate, QuadratureSpec};
use crate::error::{Error, Result};

/// `∫ dΩ/2π e^{iΩx} g(Ω)` over `support ∩ [−omega_max, omega_max]` for every
/// complex `x` in `times`.
///
/// Where the truncation cuts into the support, the neglected tail mass is
/// estimated as `|Ω| |g(Ω)|/2π` just past the cut and compared with
/// `spec.tail_tol`.
pub fn fourier_family<G>(
    g: &G,
    times: &[Complex64],
    support: (f64, f64),
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let (a, b) = truncated_window(&|x| g(x).norm(), support, spec)?;
    let scale = Complex64::new(1.0 / (2.0 * PI), 0.0);
    Ok(integrate_family(g, times, a, b, breakpoints, spec)?
        .into_iter()
        .map(|e| e.scale(scale))
        .collect())
}

/// Clips `support` to `[−omega_max, omega_max]`, checking that the magnitude
/// `g_abs` has decayed where the clip cuts into the support.
pub fn truncated_window<N>(
    g_abs: &N,
    support: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<(f64, f64)>
where
    N: Fn(f64) -> f64,
{
    let a = support.0.max(-spec.omega_max);
    let b = support.1.min(spec.omega_max);
    for (edge, cut) in [(a, support.0 < a), (b, support.1 > b)] {
        if !cut {
            continue;
        }
        let probe = edge * (1.0 + 1e-9);
        let tail = probe.abs() * g_abs(probe) / (2.0 * PI);
        if !tail.is_finite() || tail > spec.tail_tol {
            return Err(Error::Decay(format!(
                "integrand tail mass ≈ {tail:.3e} beyond Ω = {edge} exceeds {:.1e}; increase omega_max",
                spec.tail_tol
            )));
        }
    }
    Ok((a, b))
}

/// `∫_{−Ω_max}^{Ω_max} dΩ/2π e^{iΩτ} g(Ω)` at a single real τ.
pub fn fourier_integral<G>(g: &G, tau: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let times = [Complex64::new(tau, 0.0)];
    Ok(fourier_family(g, &times, (f64::NEG_INFINITY, f64::INFINITY), &[], spec)?[0])
}

/// Real-time convenience wrapper around [`fourier_family`].
pub fn fourier_real_times<G>(
    g: &G,
    taus: &[f64],
    support: (f64, f64),
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let times: Vec<Complex64> = taus.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    fourier_family(g, &times, support, breakpoints, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(gamma: f64, w0: f64) -> impl Fn(f64) -> Complex64 + Sync {
        move |x: f64| Complex64::new(gamma / ((x - w0) * (x - w0) + gamma * gamma / 4.0), 0.0)
    }

    #[test]
    fn zero_integrand() {
        let spec = QuadratureSpec::default();
        let v = fourier_integral(&|_| Complex64::new(0.0, 0.0), 1.5, &spec).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lorentzian_normalization_and_decay() {
        let spec = QuadratureSpec::default().with_omega_max(4000.0);
        let g = lorentzian(0.2, 1.0);
        let v = fourier_integral(&g, 0.0, &spec).unwrap();
        // truncation removes ≈ 2Γ/(2π Ω_max)
        assert!((v.value.re - 1.0).abs() < 2e-5);
        let v = fourier_integral(&g, 3.0, &spec).unwrap();
        let exact = Complex64::new(0.0, 3.0).exp() * (-0.3f64).exp();
        assert!((v.value - exact).norm() < 2e-5);
    }

    #[test]
    fn slow_tail_is_rejected() {
        let spec = QuadratureSpec::default();
        let r = fourier_integral(
            &|x: f64| Complex64::new(1.0 / (1.0 + x.abs()), 0.0),
            1.0,
            &spec,
        );
        assert!(matches!(r, Err(Error::Decay(_))));
    }

    #[test]
    fn compact_support_skips_decay_check() {
        let spec = QuadratureSpec::default();
        let v = fourier_family(
            &|_| Complex64::new(1.0, 0.0),
            &[Complex64::new(0.0, 0.0)],
            (-1.0, 1.0),
            &[],
            &spec,
        )
        .unwrap();
        assert!((v[0].value.re - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn conjugation_for_real_integrand() {
        let spec = QuadratureSpec::default().with_omega_max(4000.0);
        let g = lorentzian(0.5, -0.7);
        let p = fourier_integral(&g, 2.3, &spec).unwrap();
        let m = fourier_integral(&g, -2.3, &spec).unwrap();
        assert!((p.value - m.value.conj()).norm() <= 2.0 * (p.error + m.error) + 1e-15);
    }
}
