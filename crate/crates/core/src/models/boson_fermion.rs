use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    build, check_grid, complex_rate, linspace, spectral_integral, spectral_transform, BFParams,
    ComplexRate, Correlator, CorrelatorKind, Method, TWO_PI,
};
use crate::error::{Error, Result};
use crate::mathkit::{Estimate, SpectralDensity};

const MODEL: &str = "boson_fermion";

fn damped_rate(p: &BFParams) -> Result<ComplexRate> {
    let g = complex_rate(p)?;
    if !(g.gamma > 0.0) {
        return Err(Error::Domain(format!(
            "no damping: J(ω₀) = {} at ω₀ = {}, the mode never equilibrates",
            g.gamma, p.omega0
        )));
    }
    Ok(g)
}

fn resonance_breaks(g: &ComplexRate, p: &BFParams) -> Vec<f64> {
    vec![g.omega0_prime, p.omega0]
}

/// Second-order equilibrium occupation `∫ dΩ/2π F_η(Ω)/((γ/2)² + (Ω − ω₀′)²)`.
pub fn eq_occupation(p: &BFParams) -> Result<f64> {
    let g = damped_rate(p)?;
    let w = |x: f64| p.f(x) / g.denominator(x);
    Ok(
        spectral_integral(&w, &p.j, &resonance_breaks(&g, p), &p.quad)?
            .value
            .re,
    )
}

fn weight_integral(p: &BFParams, g: &ComplexRate, kind: CorrelatorKind) -> Result<Estimate> {
    let breaks = resonance_breaks(g, p);
    match kind {
        CorrelatorKind::ADagA => {
            spectral_integral(&|x| p.f(x) / g.denominator(x), &p.j, &breaks, &p.quad)
        }
        CorrelatorKind::AADag => spectral_integral(
            &|x| p.f_complement(x) / g.denominator(x),
            &p.j,
            &breaks,
            &p.quad,
        ),
        other => Err(Error::Config(format!(
            "{other:?} is not a single-mode two-point kind"
        ))),
    }
}

/// Occupation after time `t` starting from a diagonal state with occupation `n0`.
pub fn finite_time_occupation(p: &BFParams, n0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    if !(n0 >= 0.0) {
        return Err(Error::Domain(format!(
            "initial occupation must be nonnegative, got {n0}"
        )));
    }
    let g = complex_rate(p)?;
    let decay = (-g.gamma * t).exp();
    if t == 0.0 {
        return Ok(n0);
    }
    if g.gamma == 0.0 && p.j.is_zero() {
        return Ok(n0);
    }
    // |1 − e^{−(G+iΩ)t}|² = 1 + e^{−γt} − 2e^{−γt/2} Re e^{i(Ω−ω₀′)t}
    let w = |x: f64| Complex64::new(p.f(x) / g.denominator(x), 0.0);
    let est = spectral_transform(&w, &[0.0, t], &p.j, &resonance_breaks(&g, p), &p.quad)?;
    let base = est[0].value.re;
    let osc = (Complex64::from_polar(1.0, -g.omega0_prime * t) * est[1].value).re;
    Ok(decay * n0 + (1.0 + decay) * base - 2.0 * (-g.gamma * t / 2.0).exp() * osc)
}

fn two_point_kind_check(kind: CorrelatorKind) -> Result<()> {
    match kind {
        CorrelatorKind::ADagA | CorrelatorKind::AADag => Ok(()),
        other => Err(Error::Config(format!(
            "{other:?} is not a single-mode two-point kind"
        ))),
    }
}

/// Standard-regression correlator: the equilibrium weight times `e^{−Gτ}`,
/// continued to τ < 0 by `C(−τ) = C(τ)*`.
pub fn sqrt_two_point_eq(p: &BFParams, kind: CorrelatorKind, taus: &[f64]) -> Result<Correlator> {
    two_point_kind_check(kind)?;
    check_grid(taus)?;
    let g = damped_rate(p)?;
    let w = weight_integral(p, &g, kind)?;
    let est = taus
        .iter()
        .map(|&t| {
            let e = w.scale(g.propagator(t.abs()));
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

/// Modified-regression equilibrium correlator (a Lorentzian-filtered bath spectrum).
pub fn mqrt_two_point_eq(p: &BFParams, kind: CorrelatorKind, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let (w, breaks) = integrand_and_breaks(p, kind)?;
    let est = spectral_transform(&|x| Complex64::new(w(x), 0.0), taus, &p.j, &breaks, &p.quad)?;
    build(taus, est, MODEL, Method::Mqrt, kind, p.digest())
}

fn integrand_and_breaks(
    p: &BFParams,
    kind: CorrelatorKind,
) -> Result<(impl Fn(f64) -> f64 + Sync + '_, Vec<f64>)> {
    two_point_kind_check(kind)?;
    let g = damped_rate(p)?;
    let breaks = resonance_breaks(&g, p);
    let lesser = kind == CorrelatorKind::ADagA;
    let w = move |x: f64| {
        let f = if lesser { p.f(x) } else { p.f_complement(x) };
        f / g.denominator(x)
    };
    Ok((w, breaks))
}

/// Spectral integrand `w(Ω)` of the equilibrium MQRT correlator, `C(τ) = ∫ dΩ/2π e^{iΩτ} w(Ω)`.
pub fn mqrt_integrand(
    p: &BFParams,
    kind: CorrelatorKind,
) -> Result<impl Fn(f64) -> f64 + Sync + '_> {
    integrand_and_breaks(p, kind).map(|(w, _)| w)
}

/// `⟨a†(t+τ)a(t)⟩` at finite `t` from the modified regression equation.
pub fn mqrt_two_point_finite(p: &BFParams, n0: f64, t: f64, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let g = complex_rate(p)?;
    let s_t = finite_time_occupation(p, n0, t)?;
    let breaks = resonance_breaks(&g, p);
    let w = |x: f64| Complex64::new(p.f(x) / g.denominator(x), 0.0);
    let mut all = taus.to_vec();
    all.push(0.0);
    let est = spectral_transform(&w, &all, &p.j, &breaks, &p.quad)?;
    let static_part = est[taus.len()];
    let out = taus
        .iter()
        .zip(est.iter())
        .map(|(&tau, e)| {
            let prop = g.propagator(tau);
            Estimate {
                value: prop * (s_t - static_part.value) + e.value,
                error: e.error + prop.norm() * static_part.error,
            }
        })
        .collect();
    build(
        taus,
        out,
        MODEL,
        Method::Mqrt,
        CorrelatorKind::ADagA,
        p.digest(),
    )
}

/// The bracket of the number-number integrand (without `J/denominator`).
pub fn nn_bracket(p: &BFParams, omega: f64, tau: f64) -> Result<Complex64> {
    let eta = p.stats.eta();
    let n0 = p.n0()?;
    let n = crate::mathkit::occupation(omega, p.beta, p.stats)?;
    let phase = Complex64::from_polar(1.0, (p.omega0 - omega) * tau);
    Ok(n0 * n + n0 * (1.0 - eta * n) * phase + n * (1.0 - eta * n0) * phase.conj())
}

/// Number-number correlator `⟨N(t+τ)N(t)⟩` at equilibrium.
pub fn mqrt_nn_eq(p: &BFParams, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let est = nn_estimates(p, taus)?;
    build(
        taus,
        est,
        MODEL,
        Method::Mqrt,
        CorrelatorKind::NN,
        p.digest(),
    )
}

fn nn_estimates(p: &BFParams, taus: &[f64]) -> Result<Vec<Estimate>> {
    let g = damped_rate(p)?;
    let n0 = p.n0()?;
    let eta = p.stats.eta();
    let breaks = resonance_breaks(&g, p);
    let f = |x: f64| Complex64::new(p.f(x) / g.denominator(x), 0.0);
    let fc = |x: f64| Complex64::new(p.f_complement(x) / g.denominator(x), 0.0);
    let neg: Vec<f64> = taus.iter().map(|t| -t).collect();
    let mut with_zero = taus.to_vec();
    with_zero.push(0.0);
    let plus = spectral_transform(&f, &with_zero, &p.j, &breaks, &p.quad)?;
    let minus = spectral_transform(&fc, &neg, &p.j, &breaks, &p.quad)?;
    let constant = plus[taus.len()].scale(Complex64::new(n0, 0.0));
    Ok(taus
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let e = Complex64::from_polar(1.0, p.omega0 * tau);
            constant + minus[k].scale(e * n0) + plus[k].scale(e.conj() * (1.0 - eta * n0))
        })
        .collect())
}

/// Standard-regression number correlator `[⟨NN⟩ − R]e^{−γ|τ|} + R`.
pub fn sqrt_nn_eq(p: &BFParams, taus: &[f64]) -> Result<Correlator> {
    check_grid(taus)?;
    let g = damped_rate(p)?;
    let nn0 = nn_estimates(p, &[0.0])?[0];
    let n0 = p.n0()?;
    let r = weight_integral(p, &g, CorrelatorKind::ADagA)?.scale(Complex64::new(n0, 0.0));
    let est = taus
        .iter()
        .map(|&t| {
            let d = (-g.gamma * t.abs()).exp();
            Estimate {
                value: (nn0.value - r.value) * d + r.value,
                error: nn0.error * d + r.error,
            }
        })
        .collect();
    build(
        taus,
        est,
        MODEL,
        Method::Sqrt,
        CorrelatorKind::NN,
        p.digest(),
    )
}

/// Bath self-energy `Σ(Ω) = P∫ dΩ'/2π J(Ω')/(Ω − Ω')` tabulated on a node grid
/// and interpolated by local cubics, dropping to linear next to breakpoints of `J`.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    nodes: Vec<f64>,
    sigma: Vec<f64>,
    kinks: Vec<bool>,
}

impl ExactKernel {
    pub fn new(p: &BFParams) -> Result<Self> {
        p.validate()?;
        if matches!(p.j, SpectralDensity::Zero | SpectralDensity::Flat { .. }) {
            return Ok(ExactKernel {
                nodes: Vec::new(),
                sigma: Vec::new(),
                kinks: Vec::new(),
            });
        }
        let (a, b) = p.j.window(&p.quad);
        let c = 10.0 * p.omega0.abs().max(1.0);
        let mut nodes = linspace(a, b, 2001);
        let (ca, cb) = (a.max(-c), b.min(c));
        if cb > ca {
            nodes.extend(linspace(ca, cb, 4001));
        }
        nodes.extend(p.j.breakpoints().into_iter().filter(|x| *x >= a && *x <= b));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let span = b - a;
        let nudge = 1e-9 * span;
        let (lo_edge, hi_edge) = p.j.support();
        let sigma: Vec<f64> = nodes
            .par_iter()
            .map(|&x| {
                // Σ diverges logarithmically where J jumps at a support edge.
                let at_edge = x <= lo_edge || x >= hi_edge;
                let probe = if at_edge && p.j.eval(x) != 0.0 {
                    if x <= lo_edge {
                        x + nudge
                    } else {
                        x - nudge
                    }
                } else {
                    x
                };
                p.j.hilbert(probe, &p.quad).map(|h| h / TWO_PI)
            })
            .collect::<Result<_>>()?;
        let breaks = p.j.breakpoints();
        let kinks = nodes
            .iter()
            .map(|x| breaks.iter().any(|b| (x - b).abs() < 1e-12))
            .collect();
        Ok(ExactKernel {
            nodes,
            sigma,
            kinks,
        })
    }

    pub fn sigma(&self, omega: f64) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let n = self.nodes.len();
        if omega <= self.nodes[0] {
            return self.sigma[0];
        }
        if omega >= self.nodes[n - 1] {
            return self.sigma[n - 1];
        }
        let i = self.nodes.partition_point(|&x| x <= omega).clamp(1, n - 1);
        if i >= 2 && i + 1 < n && !self.kinks[i - 2..=i + 1].iter().any(|&k| k) {
            let xs = &self.nodes[i - 2..=i + 1];
            let ys = &self.sigma[i - 2..=i + 1];
            return (0..4)
                .map(|a| {
                    let w: f64 = (0..4)
                        .filter(|&b| b != a)
                        .map(|b| (omega - xs[b]) / (xs[a] - xs[b]))
                        .product();
                    w * ys[a]
                })
                .sum();
        }
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        let s = (omega - x0) / (x1 - x0);
        self.sigma[i - 1] * (1.0 - s) + self.sigma[i] * s
    }

    /// Exact equilibrium correlator for `kind` using this self-energy table.
    pub fn correlator(
        &self,
        p: &BFParams,
        kind: CorrelatorKind,
        taus: &[f64],
    ) -> Result<Correlator> {
        two_point_kind_check(kind)?;
        check_grid(taus)?;
        p.validate()?;
        if p.j.is_zero() {
            let n0 = p.n0()?;
            let w = if kind == CorrelatorKind::ADagA {
                n0
            } else {
                1.0 - p.stats.eta() * n0
            };
            let est = taus
                .iter()
                .map(|&t| Estimate {
                    value: Complex64::from_polar(w, p.omega0 * t),
                    error: 0.0,
                })
                .collect();
            return build(taus, est, MODEL, Method::Exact, kind, p.digest());
        }
        let denom = |x: f64| {
            let jv = p.j.eval(x);
            let d = x - p.omega0 - self.sigma(x);
            d * d + jv * jv / 4.0
        };
        let breaks = [p.omega0];
        let est = if kind == CorrelatorKind::ADagA {
            spectral_transform(
                &|x| Complex64::new(p.f(x) / denom(x), 0.0),
                taus,
                &p.j,
                &breaks,
                &p.quad,
            )?
        } else {
            spectral_transform(
                &|x| Complex64::new(p.f_complement(x) / denom(x), 0.0),
                taus,
                &p.j,
                &breaks,
                &p.quad,
            )?
        };
        build(taus, est, MODEL, Method::Exact, kind, p.digest())
    }
}

/// Exact equilibrium correlator of the quadratic model.
pub fn exact_two_point_eq(p: &BFParams, kind: CorrelatorKind, taus: &[f64]) -> Result<Correlator> {
    ExactKernel::new(p)?.correlator(p, kind, taus)
}
