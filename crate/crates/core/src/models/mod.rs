//! Closed-form correlators of the damped boson/fermion mode and of the
//! dissipative spin-boson model.
//!
//! Every equilibrium correlator is a frequency integral of the form
//! `∫ dΩ/2π e^{iΩτ} w(Ω)` (or a single damped exponential for the standard
//! regression theorem). Parameters are plain serializable structs.

mod boson_fermion;
mod spin_boson;
mod three_point;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mathkit::{
    fourier_family, lamb_shift, occupation, spin_boson_frequency_shift, Estimate, QuadratureSpec,
    SpectralDensity, Statistics,
};

pub use boson_fermion::{
    eq_occupation, exact_two_point_eq, finite_time_occupation, mqrt_integrand, mqrt_nn_eq,
    mqrt_two_point_eq, mqrt_two_point_finite, nn_bracket, sqrt_nn_eq, sqrt_two_point_eq,
    ExactKernel,
};
pub use spin_boson::{sb_mqrt_eq, sb_mqrt_integrand, sb_sqrt_eq};
pub use three_point::{three_point_mqrt_continued, three_point_mqrt_eq, ThreePointOrdering};

/// Damped single mode `H = ω₀ a†a` coupled linearly to a bath with density `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BFParams {
    pub omega0: f64,
    pub beta: f64,
    pub stats: Statistics,
    pub j: SpectralDensity,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

/// Two-level system `H = ω₀σ_z/2` coupled through `σ_x` to a bosonic bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SBParams {
    pub omega0: f64,
    pub beta: f64,
    pub j: SpectralDensity,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

fn check_common(
    omega0: f64,
    beta: f64,
    j: &SpectralDensity,
    quad: &QuadratureSpec,
    stats: Statistics,
) -> Result<()> {
    if !omega0.is_finite() {
        return Err(Error::Config("omega0 must be finite".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Config("beta must be positive and finite".into()));
    }
    quad.validate()?;
    j.validate()?;
    if stats == Statistics::Boson {
        let (a, b) = j.support();
        if a < 0.0 && b > 0.0 {
            j.validate_bosonic()?;
        }
    }
    Ok(())
}

impl BFParams {
    pub fn new(omega0: f64, beta: f64, stats: Statistics, j: SpectralDensity) -> Self {
        let quad = QuadratureSpec::for_model(omega0, beta);
        BFParams {
            omega0,
            beta,
            stats,
            j,
            quad,
        }
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.omega0, self.beta, &self.j, &self.quad, self.stats)
    }

    /// `F_η(Ω)` with the failure mode mapped to NaN (caught after integration).
    pub(crate) fn f(&self, omega: f64) -> f64 {
        crate::mathkit::weighted_occupation(&self.j, omega, self.beta, self.stats)
            .unwrap_or(f64::NAN)
    }

    /// `J(Ω)(1 − ηn_η(Ω))`.
    pub(crate) fn f_complement(&self, omega: f64) -> f64 {
        crate::mathkit::weighted_complement(&self.j, omega, self.beta, self.stats)
            .unwrap_or(f64::NAN)
    }

    pub(crate) fn n0(&self) -> Result<f64> {
        occupation(self.omega0, self.beta, self.stats)
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

impl SBParams {
    pub fn new(omega0: f64, beta: f64, j: SpectralDensity) -> Self {
        let quad = QuadratureSpec::for_model(omega0, beta);
        SBParams {
            omega0,
            beta,
            j,
            quad,
        }
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_common(
            self.omega0,
            self.beta,
            &self.j,
            &self.quad,
            Statistics::Boson,
        )
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("parameters serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `G = −iω₀′ + Re G`, with `Re G = γ/2` for the linear mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRate {
    pub value: Complex64,
    pub omega0_prime: f64,
    pub gamma: f64,
}

impl ComplexRate {
    /// `(G + iΩ)(G* − iΩ) = (Re G)² + (Ω − ω₀′)²`.
    pub fn denominator(&self, omega: f64) -> f64 {
        let d = omega - self.omega0_prime;
        self.value.re * self.value.re + d * d
    }

    /// `e^{−Gτ}`.
    pub fn propagator(&self, tau: f64) -> Complex64 {
        (-self.value * tau).exp()
    }
}

pub fn complex_rate(p: &BFParams) -> Result<ComplexRate> {
    p.validate()?;
    let gamma = p.j.eval(p.omega0);
    let w = lamb_shift(&p.j, p.omega0, &p.quad)?;
    Ok(ComplexRate {
        value: Complex64::new(gamma / 2.0, -w),
        omega0_prime: w,
        gamma,
    })
}

pub fn sb_complex_rate(p: &SBParams) -> Result<ComplexRate> {
    p.validate()?;
    let gamma = p.j.eval(p.omega0);
    let w = spin_boson_frequency_shift(&p.j, p.beta, p.omega0, &p.quad)?;
    let n = if gamma == 0.0 {
        0.0
    } else {
        occupation(p.omega0, p.beta, Statistics::Boson)?
    };
    Ok(ComplexRate {
        value: Complex64::new(gamma * (0.5 + n), -w),
        omega0_prime: w,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sqrt,
    Mqrt,
    Exact,
    Oracle,
    Engine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    /// `⟨a†(t+τ) a(t)⟩`
    ADagA,
    /// `⟨a(t) a†(t+τ)⟩`
    AADag,
    /// `⟨N(t+τ) N(t)⟩`
    #[serde(rename = "nn")]
    NN,
    /// `⟨σ₊(t+τ) σ₋(t)⟩`
    PlusMinus,
    /// `⟨σ₋(t) σ₊(t+τ)⟩`
    MinusPlus,
    /// A user-specified operator pair.
    General,
}

impl CorrelatorKind {
    pub fn is_spin(self) -> bool {
        matches!(self, CorrelatorKind::PlusMinus | CorrelatorKind::MinusPlus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorMeta {
    pub model: String,
    pub method: Method,
    pub kind: CorrelatorKind,
    pub digest: String,
}

/// Samples `C(τ_k)` of a two-time correlator with per-sample error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub tau: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub meta: CorrelatorMeta,
}

impl Correlator {
    pub fn new(
        tau: Vec<f64>,
        values: Vec<Complex64>,
        errors: Vec<f64>,
        meta: CorrelatorMeta,
    ) -> Result<Self> {
        if tau.len() != values.len() || tau.len() != errors.len() {
            return Err(Error::GridMismatch(
                "tau, values and errors differ in length".into(),
            ));
        }
        check_grid(&tau)?;
        if let Some(k) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Domain(format!(
                "non-finite correlator value at tau = {}",
                tau[k]
            )));
        }
        Ok(Correlator {
            tau,
            values,
            errors,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// Rejects unsorted, repeated or non-finite τ grids.
pub fn check_grid(tau: &[f64]) -> Result<()> {
    if tau.iter().any(|t| !t.is_finite()) {
        return Err(Error::GridMismatch(
            "tau grid contains non-finite values".into(),
        ));
    }
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch(
            "tau grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `∫ dΩ/2π e^{iΩτ} w(Ω)` over J's support for every τ, failing on NaN weights.
pub(crate) fn spectral_transform<W>(
    w: &W,
    taus: &[f64],
    j: &SpectralDensity,
    extra_breaks: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    W: Fn(f64) -> Complex64 + Sync,
{
    let times: Vec<Complex64> = taus.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    spectral_transform_complex(w, &times, j, extra_breaks, quad)
}

/// As [`spectral_transform`] at complex times `τ`, i.e. with `e^{iΩτ}` continued.
pub(crate) fn spectral_transform_complex<W>(
    w: &W,
    times: &[Complex64],
    j: &SpectralDensity,
    extra_breaks: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    W: Fn(f64) -> Complex64 + Sync,
{
    let mut breaks = j.breakpoints();
    breaks.extend_from_slice(extra_breaks);
    let out = fourier_family(w, times, j.support(), &breaks, quad)?;
    if out
        .iter()
        .any(|e| !(e.value.re.is_finite() && e.value.im.is_finite() && e.error.is_finite()))
    {
        return Err(Error::Domain(
            "frequency integrand is not finite; bosonic densities must vanish at Ω = 0".into(),
        ));
    }
    Ok(out)
}

/// Real-valued `∫ dΩ/2π w(Ω)` over J's support.
pub(crate) fn spectral_integral<W>(
    w: &W,
    j: &SpectralDensity,
    extra_breaks: &[f64],
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    W: Fn(f64) -> f64 + Sync,
{
    let g = |x: f64| Complex64::new(w(x), 0.0);
    Ok(spectral_transform(&g, &[0.0], j, extra_breaks, quad)?[0])
}

pub(crate) fn build(
    taus: &[f64],
    est: Vec<Estimate>,
    model: &str,
    method: Method,
    kind: CorrelatorKind,
    digest: String,
) -> Result<Correlator> {
    let (values, errors) = est.into_iter().map(|e| (e.value, e.error)).unzip();
    Correlator::new(
        taus.to_vec(),
        values,
        errors,
        CorrelatorMeta {
            model: model.into(),
            method,
            kind,
            digest,
        },
    )
}

pub(crate) const TWO_PI: f64 = 2.0 * PI;
