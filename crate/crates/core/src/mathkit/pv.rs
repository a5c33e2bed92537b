use num_complex::Complex64;

use super::quadrature::{integrate, QuadratureSpec};
use crate::error::{Error, Result};

/// `P∫_a^b f(Ω)/(pole − Ω) dΩ` by symmetric subtraction.
///
/// On the window `[pole − h, pole + h]` (the largest one fitting in `[a, b]`)
/// the integrand is folded to `(f(pole − u) − f(pole + u))/u`, which is
/// regular; the `f(pole)` part integrates to zero over a symmetric window. The
/// remaining one-sided tail is an ordinary integral. Returns (value, error).
pub fn principal_value<F>(
    f: &F,
    pole: f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(pole > a && pole < b) {
        return Err(Error::Domain(format!(
            "principal-value pole {pole} must lie strictly inside ({a}, {b})"
        )));
    }
    let h = (pole - a).min(b - pole);
    let folded = |u: f64| Complex64::new((f(pole - u) - f(pole + u)) / u, 0.0);
    let folded_breaks: Vec<f64> = breakpoints
        .iter()
        .map(|&p| (p - pole).abs())
        .filter(|&u| u > 0.0 && u < h)
        .collect();
    let core = integrate(&folded, 0.0, h, &folded_breaks, spec)?;

    let tail_fn = |x: f64| Complex64::new(f(x) / (pole - x), 0.0);
    let mut value = core.value.re;
    let mut error = core.error;
    if pole - h > a {
        let t = integrate(&tail_fn, a, pole - h, breakpoints, spec)?;
        value += t.value.re;
        error += t.error;
    }
    if pole + h < b {
        let t = integrate(&tail_fn, pole + h, b, breakpoints, spec)?;
        value += t.value.re;
        error += t.error;
    }
    Ok((value, error))
}

/// Principal value over the truncated real line `(−omega_max, omega_max)`.
pub fn cauchy_principal_value<F>(f: &F, pole: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    principal_value(f, pole, -spec.omega_max, spec.omega_max, &[], spec).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_over_symmetric_window_vanishes() {
        let spec = QuadratureSpec::default();
        let v = principal_value(&|_| 3.0, 0.0, -5.0, 5.0, &[], &spec)
            .unwrap()
            .0;
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn constant_with_log_remainder() {
        // P∫_{-1}^{3} dΩ/(0.5 − Ω) = ln|(0.5+1)/(0.5−3)| = ln(1.5/2.5)
        let spec = QuadratureSpec::default();
        let v = principal_value(&|_| 1.0, 0.5, -1.0, 3.0, &[], &spec)
            .unwrap()
            .0;
        assert!((v - (1.5f64 / 2.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn linear_and_antisymmetric() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (-(x - 0.3) * (x - 0.3)).exp();
        let g = |x: f64| x / (1.0 + x * x * x * x);
        let pf = cauchy_principal_value(&f, 0.7, &spec).unwrap();
        let pg = cauchy_principal_value(&g, 0.7, &spec).unwrap();
        let pfg = cauchy_principal_value(&|x| 2.0 * f(x) - 3.0 * g(x), 0.7, &spec).unwrap();
        let neg = cauchy_principal_value(&|x| -f(x), 0.7, &spec).unwrap();
        assert!((pfg - (2.0 * pf - 3.0 * pg)).abs() < 1e-11);
        assert_eq!(neg, -pf);
    }

    #[test]
    fn pole_outside_is_rejected() {
        let spec = QuadratureSpec::default();
        assert!(principal_value(&|_| 1.0, 7.0, -1.0, 1.0, &[], &spec).is_err());
    }
}
