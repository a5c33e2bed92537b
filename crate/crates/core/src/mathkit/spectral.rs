use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pv::principal_value;
use super::quadrature::{integrate_real, QuadratureSpec};
use super::stats::{occupation, scaled_bose, Statistics};
use crate::error::{Error, Result};

/// Bath spectral density `J(Ω) = 2π Σ_k |α_k|² δ(Ω − Ω_k)` in continuum form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// No coupling.
    Zero,
    /// `Γ` on `[−W, W]`. Represents the wide-band limit: its Hilbert transform
    /// is taken to vanish, so it induces no frequency shift.
    Flat { gamma: f64, half_width: f64 },
    /// `2πδ Ω²/(1 + Ω⁴)` on the whole real line.
    RationalQuartic { delta: f64 },
    /// Linear interpolation of sorted `(Ω, J)` samples; zero outside.
    Tabulated { points: Vec<(f64, f64)> },
    /// `inner` restricted to `[lo, hi]`.
    Windowed {
        inner: Box<SpectralDensity>,
        lo: f64,
        hi: f64,
    },
}

impl SpectralDensity {
    pub fn flat(gamma: f64, half_width: f64) -> Self {
        SpectralDensity::Flat { gamma, half_width }
    }

    pub fn rational_quartic(delta: f64) -> Self {
        SpectralDensity::RationalQuartic { delta }
    }

    pub fn windowed(self, lo: f64, hi: f64) -> Self {
        SpectralDensity::Windowed {
            inner: Box::new(self),
            lo,
            hi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralDensity::Zero => Ok(()),
            SpectralDensity::Flat { gamma, half_width } => {
                if *gamma > 0.0 && *half_width > 0.0 && gamma.is_finite() && half_width.is_finite()
                {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "flat density needs positive gamma and half_width".into(),
                    ))
                }
            }
            SpectralDensity::RationalQuartic { delta } => {
                if *delta > 0.0 && delta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "rational-quartic density needs positive delta".into(),
                    ))
                }
            }
            SpectralDensity::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::Config(
                        "tabulated density needs at least two points".into(),
                    ));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Config(
                        "tabulated frequencies must be strictly increasing".into(),
                    ));
                }
                if points
                    .iter()
                    .any(|p| !(p.1 >= 0.0 && p.1.is_finite() && p.0.is_finite()))
                {
                    return Err(Error::Config(
                        "tabulated values must be finite and nonnegative".into(),
                    ));
                }
                Ok(())
            }
            SpectralDensity::Windowed { inner, lo, hi } => {
                if !(hi > lo) {
                    return Err(Error::Config("window needs lo < hi".into()));
                }
                inner.validate()
            }
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            SpectralDensity::Zero => 0.0,
            SpectralDensity::Flat { gamma, half_width } => {
                if omega.abs() <= *half_width {
                    *gamma
                } else {
                    0.0
                }
            }
            SpectralDensity::RationalQuartic { delta } => {
                let w2 = omega * omega;
                2.0 * PI * delta * w2 / (1.0 + w2 * w2)
            }
            SpectralDensity::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if omega < first.0 || omega > last.0 {
                    return 0.0;
                }
                let idx = points
                    .partition_point(|p| p.0 <= omega)
                    .clamp(1, points.len() - 1);
                let (x0, y0) = points[idx - 1];
                let (x1, y1) = points[idx];
                y0 + (y1 - y0) * (omega - x0) / (x1 - x0)
            }
            SpectralDensity::Windowed { inner, lo, hi } => {
                if omega >= *lo && omega <= *hi {
                    inner.eval(omega)
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed support interval (infinite ends for unbounded densities).
    pub fn support(&self) -> (f64, f64) {
        match self {
            SpectralDensity::Zero => (0.0, 0.0),
            SpectralDensity::Flat { half_width, .. } => (-half_width, *half_width),
            SpectralDensity::RationalQuartic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            SpectralDensity::Tabulated { points } => (points[0].0, points[points.len() - 1].0),
            SpectralDensity::Windowed { inner, lo, hi } => {
                let (a, b) = inner.support();
                (a.max(*lo), b.min(*hi))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SpectralDensity::Zero)
    }

    /// Points where `J` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            SpectralDensity::Zero | SpectralDensity::RationalQuartic { .. } => Vec::new(),
            SpectralDensity::Flat { half_width, .. } => vec![-half_width, *half_width],
            SpectralDensity::Tabulated { points } => points.iter().map(|p| p.0).collect(),
            SpectralDensity::Windowed { inner, lo, hi } => {
                let mut b = inner.breakpoints();
                b.push(*lo);
                b.push(*hi);
                b
            }
        }
    }

    /// Integration window: the support clipped to `[−omega_max, omega_max]`.
    pub fn window(&self, spec: &QuadratureSpec) -> (f64, f64) {
        let (a, b) = self.support();
        (a.max(-spec.omega_max), b.min(spec.omega_max))
    }

    /// `P∫ f(Ω') J(Ω')/(Ω − Ω') dΩ'` over the truncated support, without the 1/2π.
    pub fn weighted_hilbert<F>(&self, weight: &F, omega: f64, spec: &QuadratureSpec) -> Result<f64>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        if self.is_zero() {
            return Ok(0.0);
        }
        let (a, b) = self.window(spec);
        let integrand = |x: f64| self.eval(x) * weight(x);
        let breaks = self.breakpoints();
        if omega > a && omega < b {
            principal_value(&integrand, omega, a, b, &breaks, spec).map(|(v, _)| v)
        } else {
            // Pole outside the support: regular integral. A pole on a support
            // edge is only allowed when J vanishes there.
            if (omega == a || omega == b) && integrand(omega) != 0.0 {
                return Err(Error::Domain(format!(
                    "principal value with pole on the support edge {omega} where J ≠ 0"
                )));
            }
            integrate_real(&|x| integrand(x) / (omega - x), a, b, &breaks, spec).map(|(v, _)| v)
        }
    }

    /// `P∫ J(Ω')/(Ω − Ω') dΩ'` (no 1/2π). Zero for the wide-band flat density.
    pub fn hilbert(&self, omega: f64, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            SpectralDensity::Zero | SpectralDensity::Flat { .. } => Ok(0.0),
            SpectralDensity::RationalQuartic { delta } => {
                Ok(rational_quartic_hilbert(*delta, omega))
            }
            _ => self.weighted_hilbert(&|_| 1.0, omega, spec),
        }
    }

    /// Checks that `J` vanishes at least linearly at Ω = 0, as required to pair
    /// it with the Bose function.
    pub fn validate_bosonic(&self) -> Result<()> {
        let probe = |eps: f64| (self.eval(eps).max(self.eval(-eps))) / eps;
        let near = probe(1e-7);
        let far = probe(1e-3);
        if near <= 10.0 * far + 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(
                "bosonic bath needs J(Ω) to vanish at least linearly at Ω = 0".into(),
            ))
        }
    }
}

/// Closed-form `P∫ J(Ω')/(Ω − Ω') dΩ'` over the whole line for
/// `J = 2πδΩ²/(1+Ω⁴)`, from the residues at `e^{iπ/4}` and `e^{3iπ/4}`.
fn rational_quartic_hilbert(delta: f64, omega: f64) -> f64 {
    let s: Complex64 = [PI / 4.0, 3.0 * PI / 4.0]
        .iter()
        .map(|&arg| {
            let z = Complex64::from_polar(1.0, arg);
            1.0 / (4.0 * z * (z - omega))
        })
        .sum();
    -2.0 * PI * delta * (Complex64::new(0.0, 2.0 * PI) * s).re
}

/// `F_η(Ω) = J(Ω) n_η(Ω)` with the Bose pole at Ω = 0 removed analytically.
pub fn weighted_occupation(
    j: &SpectralDensity,
    omega: f64,
    beta: f64,
    stats: Statistics,
) -> Result<f64> {
    let jv = j.eval(omega);
    match stats {
        Statistics::Fermion => Ok(jv * occupation(omega, beta, stats)?),
        Statistics::Boson => {
            let x = beta * omega;
            if x.abs() < 1e-3 {
                j.validate_bosonic()?;
                if jv == 0.0 {
                    return Ok(0.0);
                }
                // J n = (J/(βΩ)) · (βΩ n)
                Ok(jv / x * scaled_bose(x))
            } else {
                Ok(jv * occupation(omega, beta, stats)?)
            }
        }
    }
}

/// `J(Ω)(1 − η n_η(Ω))`, the weight of the anti-normally ordered bath correlator.
pub fn weighted_complement(
    j: &SpectralDensity,
    omega: f64,
    beta: f64,
    stats: Statistics,
) -> Result<f64> {
    let jv = j.eval(omega);
    if jv == 0.0 {
        return Ok(0.0);
    }
    match stats {
        Statistics::Fermion => Ok(jv * super::stats::complementary_occupation(omega, beta, stats)?),
        Statistics::Boson => {
            let x = beta * omega;
            if x.abs() < 1e-3 {
                // J(1 + n) = J n + J
                Ok(weighted_occupation(j, omega, beta, stats)? + jv)
            } else {
                Ok(jv * super::stats::complementary_occupation(omega, beta, stats)?)
            }
        }
    }
}

/// Renormalized frequency `ω₀′ = ω₀ + P∫ dΩ/2π J(Ω)/(ω₀ − Ω)`.
pub fn lamb_shift(j: &SpectralDensity, omega0: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(omega0 + j.hilbert(omega0, spec)? / (2.0 * PI))
}

/// Spin-boson frequency: the bare Lamb shift plus `P∫ dΩ/π F(Ω)/(ω₀ − Ω)`.
pub fn spin_boson_frequency_shift(
    j: &SpectralDensity,
    beta: f64,
    omega0: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let thermal = thermal_hilbert(j, beta, omega0, spec)?;
    Ok(lamb_shift(j, omega0, spec)? + thermal / PI)
}

/// `P∫ F(Ω)/(ω − Ω) dΩ` for a bosonic bath (no prefactor).
pub fn thermal_hilbert(
    j: &SpectralDensity,
    beta: f64,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if j.is_zero() {
        return Ok(0.0);
    }
    j.validate_bosonic()?;
    let n = |x: f64| {
        let y = beta * x;
        if y.abs() < 1e-3 {
            if x == 0.0 {
                0.0
            } else {
                scaled_bose(y) / y
            }
        } else {
            occupation(x, beta, Statistics::Boson).unwrap_or(0.0)
        }
    };
    // J·n is finite at 0 because J vanishes there; the weight alone is not,
    // so the product is formed inside the integrand.
    let (a, b) = j.window(spec);
    let integrand = |x: f64| {
        let jv = j.eval(x);
        if jv == 0.0 {
            0.0
        } else {
            jv * n(x)
        }
    };
    let breaks = {
        let mut b = j.breakpoints();
        b.push(0.0);
        b
    };
    if omega > a && omega < b {
        principal_value(&integrand, omega, a, b, &breaks, spec).map(|(v, _)| v)
    } else {
        integrate_real(&|x| integrand(x) / (omega - x), a, b, &breaks, spec).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        let rq = SpectralDensity::rational_quartic(0.1);
        assert_eq!(rq.eval(0.0), 0.0);
        assert!((rq.eval(1.0) - 2.0 * PI * 0.1 * 0.5).abs() < 1e-15);
        assert_eq!(rq.eval(-2.0), rq.eval(2.0));
        let flat = SpectralDensity::flat(0.2, 50.0);
        assert_eq!(flat.eval(-50.0), 0.2);
        assert_eq!(flat.eval(50.1), 0.0);
        let tab = SpectralDensity::Tabulated {
            points: vec![(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)],
        };
        assert!((tab.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((tab.eval(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(tab.eval(3.5), 0.0);
        let w = rq.clone().windowed(0.0, 15.0);
        assert_eq!(w.eval(-1.0), 0.0);
        assert_eq!(w.eval(1.0), rq.eval(1.0));
        assert_eq!(w.support(), (0.0, 15.0));
    }

    #[test]
    fn weighted_occupation_examples() {
        let rq = SpectralDensity::rational_quartic(0.1);
        assert_eq!(
            weighted_occupation(&rq, 0.0, 1.0, Statistics::Boson).unwrap(),
            0.0
        );
        let flat = SpectralDensity::flat(0.2, 50.0);
        let v = weighted_occupation(&flat, 1.0, 2.0, Statistics::Fermion).unwrap();
        assert!((v - 0.2 / (2f64.exp() + 1.0)).abs() < 1e-16);
        let v = weighted_occupation(&rq, 1.0, 1.0, Statistics::Boson).unwrap();
        let expected = 2.0 * PI * 0.1 * 0.5 / (1f64.exp() - 1.0);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn bosonic_series_is_continuous() {
        let rq = SpectralDensity::rational_quartic(0.1);
        let inside = weighted_occupation(&rq, 0.999e-3, 1.0, Statistics::Boson).unwrap();
        let outside = weighted_occupation(&rq, 1.001e-3, 1.0, Statistics::Boson).unwrap();
        assert!((inside - outside).abs() / outside < 5e-3);
        let small = weighted_occupation(&rq, 1e-6, 1.0, Statistics::Boson).unwrap();
        assert!((small - 2.0 * PI * 0.1 * 1e-6).abs() < 1e-6 * small);
    }

    #[test]
    fn flat_bosonic_bath_is_rejected() {
        let flat = SpectralDensity::flat(0.1, 10.0);
        assert!(weighted_occupation(&flat, 1e-5, 1.0, Statistics::Boson).is_err());
        let gapped = SpectralDensity::flat(0.1, 10.0).windowed(0.25, 10.0);
        assert!(weighted_occupation(&gapped, 1e-5, 1.0, Statistics::Boson).is_ok());
    }

    #[test]
    fn wide_band_flat_has_no_shift() {
        let spec = QuadratureSpec::default();
        assert_eq!(
            lamb_shift(&SpectralDensity::flat(0.2, 50.0), 1.0, &spec).unwrap(),
            1.0
        );
        assert_eq!(lamb_shift(&SpectralDensity::Zero, 1.3, &spec).unwrap(), 1.3);
        assert_eq!(
            spin_boson_frequency_shift(&SpectralDensity::Zero, 1.0, 1.3, &spec).unwrap(),
            1.3
        );
    }

    #[test]
    fn rational_quartic_hilbert_matches_quadrature() {
        let spec = QuadratureSpec::default().with_omega_max(1e4);
        let cut = SpectralDensity::rational_quartic(0.1).windowed(-1e4, 1e4);
        let rq = SpectralDensity::rational_quartic(0.1);
        for &w in &[0.0, 0.3, 1.0, -2.5, 7.0] {
            let closed = rq.hilbert(w, &spec).unwrap();
            let numeric = cut.hilbert(w, &spec).unwrap();
            assert!(
                (closed - numeric).abs() < 1e-7,
                "{w}: {closed} vs {numeric}"
            );
        }
        assert_eq!(rq.hilbert(0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(SpectralDensity::flat(-1.0, 1.0).validate().is_err());
        assert!(SpectralDensity::Tabulated {
            points: vec![(1.0, 0.0), (0.0, 1.0)]
        }
        .validate()
        .is_err());
        assert!(SpectralDensity::rational_quartic(0.1)
            .windowed(2.0, 1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn serde_shape() {
        let j = SpectralDensity::rational_quartic(0.1).windowed(0.0, 15.0);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"type\":\"windowed\""));
        let back: SpectralDensity = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
    }
}
