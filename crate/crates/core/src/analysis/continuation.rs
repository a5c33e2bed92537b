use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{weighted_occupation, Estimate, QuadratureSpec, SpectralDensity, Statistics};
use crate::models::{
    complex_rate, mqrt_nn_eq, sb_complex_rate, sb_sqrt_eq, spectral_transform, sqrt_two_point_eq,
    BFParams, ComplexRate, CorrelatorKind, ExactKernel, Method, SBParams, ThreePointOrdering,
};

/// Parameters of either closed-form model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    BosonFermion(BFParams),
    SpinBoson(SBParams),
}

impl ModelParams {
    pub fn beta(&self) -> f64 {
        match self {
            ModelParams::BosonFermion(p) => p.beta,
            ModelParams::SpinBoson(p) => p.beta,
        }
    }

    pub fn quad(&self) -> &QuadratureSpec {
        match self {
            ModelParams::BosonFermion(p) => &p.quad,
            ModelParams::SpinBoson(p) => &p.quad,
        }
    }
}

/// `J(Ω) n_η(Ω) e^{κβΩ}`, evaluated without overflow. `κ = 1` gives the
/// complement weight `J(1 − ηn)`.
pub fn thermal_weight(
    j: &SpectralDensity,
    omega: f64,
    beta: f64,
    stats: Statistics,
    kappa: f64,
) -> f64 {
    let jv = j.eval(omega);
    if jv == 0.0 {
        return 0.0;
    }
    let x = beta * omega;
    match stats {
        Statistics::Boson if x.abs() < 1e-3 => {
            weighted_occupation(j, omega, beta, stats).unwrap_or(f64::NAN) * (kappa * x).exp()
        }
        Statistics::Boson if x > 0.0 => jv * ((kappa - 1.0) * x).exp() / -(-x).exp_m1(),
        Statistics::Boson => jv * (kappa * x).exp() / x.exp_m1(),
        Statistics::Fermion if x > 0.0 => jv * ((kappa - 1.0) * x).exp() / (1.0 + (-x).exp()),
        Statistics::Fermion => jv * (kappa * x).exp() / (x.exp() + 1.0),
    }
}

/// One spectral term `coef · ∫ dΩ/2π J n e^{order·βΩ} e^{iΩ time} / D(Ω)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub coef: Complex64,
    pub order: f64,
    pub time: Complex64,
}

impl Term {
    fn new(coef: Complex64, order: f64, time: Complex64) -> Self {
        Term { coef, order, time }
    }
}

/// A spectral representation: density, statistics and a Lorentzian-like denominator.
pub(crate) struct Kernel<'a> {
    j: &'a SpectralDensity,
    beta: f64,
    stats: Statistics,
    quad: &'a QuadratureSpec,
    denom: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    breaks: Vec<f64>,
}

fn damped(g: ComplexRate) -> Result<ComplexRate> {
    if !(g.value.re > 0.0) {
        return Err(Error::Domain(
            "continuation needs a positive damping rate".into(),
        ));
    }
    Ok(g)
}

impl<'a> Kernel<'a> {
    pub fn mqrt(p: &'a BFParams) -> Result<Self> {
        let g = damped(complex_rate(p)?)?;
        Ok(Kernel {
            j: &p.j,
            beta: p.beta,
            stats: p.stats,
            quad: &p.quad,
            denom: Box::new(move |x| g.denominator(x)),
            breaks: vec![g.omega0_prime, p.omega0],
        })
    }

    pub fn exact(p: &'a BFParams, table: &'a ExactKernel) -> Result<Self> {
        if p.j.is_zero() {
            return Err(Error::UnsupportedContinuation(
                "the uncoupled exact correlator has no spectral integrand".into(),
            ));
        }
        let w0 = p.omega0;
        let j = &p.j;
        Ok(Kernel {
            j,
            beta: p.beta,
            stats: p.stats,
            quad: &p.quad,
            denom: Box::new(move |x| {
                let d = x - w0 - table.sigma(x);
                let jv = j.eval(x);
                d * d + jv * jv / 4.0
            }),
            breaks: vec![w0],
        })
    }

    pub fn spin(p: &'a SBParams) -> Result<Self> {
        let g = damped(sb_complex_rate(p)?)?;
        Ok(Kernel {
            j: &p.j,
            beta: p.beta,
            stats: Statistics::Boson,
            quad: &p.quad,
            denom: Box::new(move |x| g.denominator(x)),
            breaks: vec![g.omega0_prime],
        })
    }

    fn transform(&self, kappa: f64, times: &[f64]) -> Result<Vec<Estimate>> {
        let (a, b) = self.j.support();
        if (b == f64::INFINITY && kappa > 1.0) || (a == f64::NEG_INFINITY && kappa < 0.0) {
            return Err(Error::Domain(format!(
                "imaginary shift {kappa}β leaves the strip where the spectral integral converges"
            )));
        }
        let w = |x: f64| {
            Complex64::new(
                thermal_weight(self.j, x, self.beta, self.stats, kappa) / (self.denom)(x),
                0.0,
            )
        };
        spectral_transform(&w, times, self.j, &self.breaks, self.quad)
    }

    /// Sums each list of terms, batching integrals that share a thermal exponent.
    pub fn evaluate(&self, points: &[Vec<Term>]) -> Result<Vec<Estimate>> {
        let mut groups: BTreeMap<u64, (f64, Vec<(usize, Complex64, f64)>)> = BTreeMap::new();
        for (k, terms) in points.iter().enumerate() {
            for t in terms {
                let kappa = t.order - t.time.im / self.beta;
                groups
                    .entry(kappa.to_bits())
                    .or_insert((kappa, Vec::new()))
                    .1
                    .push((k, t.coef, t.time.re));
            }
        }
        let mut out = vec![Estimate::zero(); points.len()];
        for (kappa, items) in groups.values() {
            let times: Vec<f64> = items.iter().map(|i| i.2).collect();
            let est = self.transform(*kappa, &times)?;
            for ((k, coef, _), e) in items.iter().zip(est) {
                let s = e.scale(*coef);
                out[*k].value += s.value;
                out[*k].error += s.error;
            }
        }
        Ok(out)
    }
}

fn two_point_terms(kind: CorrelatorKind, t: Complex64) -> Result<Vec<Term>> {
    let one = Complex64::new(1.0, 0.0);
    match kind {
        CorrelatorKind::ADagA | CorrelatorKind::PlusMinus => Ok(vec![Term::new(one, 0.0, t)]),
        CorrelatorKind::AADag | CorrelatorKind::MinusPlus => Ok(vec![Term::new(one, 1.0, t)]),
        other => Err(Error::UnsupportedContinuation(format!(
            "{other:?} is not a two-point kind"
        ))),
    }
}

fn nn_terms(p: &BFParams, t: Complex64) -> Result<Vec<Term>> {
    let n0 = crate::mathkit::occupation(p.omega0, p.beta, p.stats)?;
    let eta = p.stats.eta();
    let e = (Complex64::i() * p.omega0 * t).exp();
    let zero = Complex64::new(0.0, 0.0);
    Ok(vec![
        Term::new(Complex64::new(n0, 0.0), 0.0, zero),
        Term::new(e * n0, 1.0, -t),
        Term::new(e.inv() * (1.0 - eta * n0), 0.0, t),
    ])
}

/// Terms of the bosonic three-point correlators at complex delays.
pub(crate) fn three_point_terms(
    p: &BFParams,
    tau1: Complex64,
    tau2: Complex64,
    ordering: ThreePointOrdering,
) -> Result<Vec<Term>> {
    if p.stats != Statistics::Boson {
        return Err(Error::Config(
            "three-point correlators are implemented for bosons only".into(),
        ));
    }
    let n0 = crate::mathkit::occupation(p.omega0, p.beta, p.stats)?;
    let i = Complex64::i();
    let sum = (i * p.omega0 * (tau1 + tau2)).exp();
    let back = (-i * p.omega0 * tau2).exp();
    let n0c = Complex64::new(n0, 0.0);
    Ok(match ordering {
        ThreePointOrdering::NRight => vec![
            Term::new(n0c, 0.0, tau1),
            Term::new(sum * n0, 1.0, -tau2),
            Term::new(back * (1.0 + n0), 0.0, tau1 + tau2),
        ],
        ThreePointOrdering::NLeft => vec![
            Term::new(n0c, 0.0, tau1),
            Term::new(sum * (1.0 + n0), 0.0, -tau2),
            Term::new(back * n0, 1.0, tau1 + tau2),
        ],
    })
}

/// SQRT closed forms continued branch by branch: `W e^{−Gt}` for `Re t ≥ 0`
/// and `W e^{G* t}` otherwise.
fn sqrt_branch(w: Estimate, g: Complex64, t: Complex64) -> Estimate {
    let f = if t.re >= 0.0 {
        (-g * t).exp()
    } else {
        (g.conj() * t).exp()
    };
    w.scale(f)
}

fn sqrt_continued(
    kind: CorrelatorKind,
    params: &ModelParams,
    times: &[Complex64],
) -> Result<Vec<Estimate>> {
    let zero = [0.0];
    match (params, kind) {
        (ModelParams::BosonFermion(p), CorrelatorKind::ADagA | CorrelatorKind::AADag) => {
            let c = sqrt_two_point_eq(p, kind, &zero)?;
            let w = Estimate {
                value: c.values[0],
                error: c.errors[0],
            };
            let g = complex_rate(p)?.value;
            Ok(times.iter().map(|&t| sqrt_branch(w, g, t)).collect())
        }
        (ModelParams::BosonFermion(p), CorrelatorKind::NN) => {
            let nn0 = mqrt_nn_eq(p, &zero)?;
            let base = sqrt_two_point_eq(p, CorrelatorKind::ADagA, &zero)?;
            let n0 = crate::mathkit::occupation(p.omega0, p.beta, p.stats)?;
            let r = Estimate {
                value: base.values[0] * n0,
                error: base.errors[0] * n0,
            };
            let amp = Estimate {
                value: nn0.values[0] - r.value,
                error: nn0.errors[0] + r.error,
            };
            let gamma = Complex64::new(complex_rate(p)?.gamma, 0.0);
            Ok(times
                .iter()
                .map(|&t| {
                    let e = sqrt_branch(amp, gamma, t);
                    Estimate {
                        value: e.value + r.value,
                        error: e.error + r.error,
                    }
                })
                .collect())
        }
        (ModelParams::SpinBoson(p), CorrelatorKind::PlusMinus | CorrelatorKind::MinusPlus) => {
            let c = sb_sqrt_eq(p, kind, &zero)?;
            let w = Estimate {
                value: c.values[0],
                error: c.errors[0],
            };
            let g = sb_complex_rate(p)?.value;
            Ok(times.iter().map(|&t| sqrt_branch(w, g, t)).collect())
        }
        (_, other) => Err(Error::UnsupportedContinuation(format!(
            "{other:?} has no SQRT form for this model"
        ))),
    }
}

/// `C(t)` at complex times `t` for an equilibrium correlator with an
/// integrand (or closed-form) representation.
pub fn continued_correlator(
    method: Method,
    kind: CorrelatorKind,
    params: &ModelParams,
    times: &[Complex64],
) -> Result<Vec<Estimate>> {
    match (method, params) {
        (Method::Sqrt, _) => sqrt_continued(kind, params, times),
        (Method::Mqrt, ModelParams::BosonFermion(p)) => {
            let kernel = Kernel::mqrt(p)?;
            let terms = times
                .iter()
                .map(|&t| {
                    if kind == CorrelatorKind::NN {
                        nn_terms(p, t)
                    } else {
                        two_point_terms(kind, t)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if kind.is_spin() {
                return Err(Error::UnsupportedContinuation(
                    "spin kinds belong to the spin-boson model".into(),
                ));
            }
            kernel.evaluate(&terms)
        }
        (Method::Mqrt, ModelParams::SpinBoson(p)) => {
            if !kind.is_spin() {
                return Err(Error::UnsupportedContinuation(format!(
                    "{kind:?} is not a spin-boson correlator"
                )));
            }
            let terms = times
                .iter()
                .map(|&t| two_point_terms(kind, t))
                .collect::<Result<Vec<_>>>()?;
            Kernel::spin(p)?.evaluate(&terms)
        }
        (Method::Exact, ModelParams::BosonFermion(p)) => {
            if !matches!(kind, CorrelatorKind::ADagA | CorrelatorKind::AADag) {
                return Err(Error::UnsupportedContinuation(format!(
                    "no exact integrand for {kind:?}"
                )));
            }
            let table = ExactKernel::new(p)?;
            let terms = times
                .iter()
                .map(|&t| two_point_terms(kind, t))
                .collect::<Result<Vec<_>>>()?;
            let kernel = Kernel::exact(p, &table)?;
            kernel.evaluate(&terms)
        }
        (m, _) => Err(Error::UnsupportedContinuation(format!(
            "{m:?} correlators have no integrand representation"
        ))),
    }
}

/// `C(τ + iβs)` by continuation of the defining integrand.
pub fn analytic_continuation_eval(
    method: Method,
    kind: CorrelatorKind,
    params: &ModelParams,
    tau: f64,
    shift: f64,
) -> Result<Complex64> {
    let t = Complex64::new(tau, params.beta() * shift);
    Ok(continued_correlator(method, kind, params, &[t])?[0].value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::weighted_complement;
    use crate::models::{exact_two_point_eq, mqrt_two_point_eq, sb_mqrt_eq, sqrt_nn_eq};

    fn fermion() -> BFParams {
        BFParams::new(
            1.0,
            2.0,
            Statistics::Fermion,
            SpectralDensity::flat(0.2, 50.0),
        )
    }

    fn boson() -> BFParams {
        BFParams::new(
            1.0,
            1.0,
            Statistics::Boson,
            SpectralDensity::rational_quartic(0.1),
        )
    }

    #[test]
    fn thermal_weight_reproduces_occupation_weights() {
        let j = SpectralDensity::rational_quartic(0.1);
        for stats in [Statistics::Boson, Statistics::Fermion] {
            for &w in &[-30.0, -2.0, -1e-4, 1e-4, 0.5, 3.0, 40.0] {
                let f = weighted_occupation(&j, w, 1.3, stats).unwrap();
                let fc = weighted_complement(&j, w, 1.3, stats).unwrap();
                assert!(
                    (thermal_weight(&j, w, 1.3, stats, 0.0) - f).abs()
                        <= 1e-14 * f.abs().max(1e-300)
                );
                assert!(
                    (thermal_weight(&j, w, 1.3, stats, 1.0) - fc).abs()
                        <= 1e-14 * fc.abs().max(1e-300)
                );
            }
        }
    }

    #[test]
    fn zero_shift_is_the_ordinary_correlator() {
        let taus = [0.0, 0.7, 3.0];
        for (params, kind, reference) in [
            (
                ModelParams::BosonFermion(fermion()),
                CorrelatorKind::ADagA,
                mqrt_two_point_eq(&fermion(), CorrelatorKind::ADagA, &taus).unwrap(),
            ),
            (
                ModelParams::BosonFermion(boson()),
                CorrelatorKind::AADag,
                exact_two_point_eq(&boson(), CorrelatorKind::AADag, &taus).unwrap(),
            ),
            (
                ModelParams::BosonFermion(boson()),
                CorrelatorKind::NN,
                mqrt_nn_eq(&boson(), &taus).unwrap(),
            ),
        ] {
            let method = reference.meta.method;
            for (k, &tau) in taus.iter().enumerate() {
                let v = analytic_continuation_eval(method, kind, &params, tau, 0.0).unwrap();
                assert!(
                    (v - reference.values[k]).norm() < 1e-9,
                    "{kind:?} {method:?} {tau}"
                );
            }
        }
        let sb = SBParams::new(1.0, 1.0, SpectralDensity::rational_quartic(0.05));
        let r = sb_mqrt_eq(&sb, CorrelatorKind::MinusPlus, &taus).unwrap();
        let nn = sqrt_nn_eq(&boson(), &taus).unwrap();
        for (k, &tau) in taus.iter().enumerate() {
            let v = analytic_continuation_eval(
                Method::Mqrt,
                CorrelatorKind::MinusPlus,
                &ModelParams::SpinBoson(sb.clone()),
                tau,
                0.0,
            )
            .unwrap();
            assert!((v - r.values[k]).norm() < 1e-9);
            let v = analytic_continuation_eval(
                Method::Sqrt,
                CorrelatorKind::NN,
                &ModelParams::BosonFermion(boson()),
                tau,
                0.0,
            )
            .unwrap();
            assert!((v - nn.values[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_number_correlator_gives_the_reverse_ordering() {
        let p = fermion();
        let taus = [0.0, 1.0, 4.0];
        let rev = mqrt_two_point_eq(&p, CorrelatorKind::AADag, &taus).unwrap();
        let params = ModelParams::BosonFermion(p);
        for (k, &tau) in taus.iter().enumerate() {
            let v =
                analytic_continuation_eval(Method::Mqrt, CorrelatorKind::ADagA, &params, tau, -1.0)
                    .unwrap();
            assert!((v - rev.values[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn leaving_the_strip_is_rejected() {
        let params = ModelParams::BosonFermion(boson());
        let e = analytic_continuation_eval(Method::Mqrt, CorrelatorKind::ADagA, &params, 0.0, 0.5)
            .unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn engine_and_oracle_have_no_integrand() {
        let params = ModelParams::BosonFermion(fermion());
        for m in [Method::Engine, Method::Oracle] {
            let e = analytic_continuation_eval(m, CorrelatorKind::ADagA, &params, 0.0, 0.0)
                .unwrap_err();
            assert!(matches!(e, Error::UnsupportedContinuation(_)));
        }
    }
}
