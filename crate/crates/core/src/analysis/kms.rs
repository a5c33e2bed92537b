use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::continuation::{continued_correlator, three_point_terms, Kernel, ModelParams};
use crate::error::{Error, Result};
use crate::mathkit::Estimate;
use crate::models::{
    digest_of, exact_two_point_eq, mqrt_nn_eq, mqrt_two_point_eq, sb_mqrt_eq, sb_sqrt_eq,
    sqrt_nn_eq, sqrt_two_point_eq, BFParams, Correlator, CorrelatorKind, Method,
    ThreePointOrdering,
};

/// Operator pairs linked by the KMS condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmsPair {
    /// `⟨a a†(τ)⟩` against `⟨a†(τ − iβ) a⟩`.
    Mode,
    /// `⟨σ₋ σ₊(τ)⟩` against `⟨σ₊(τ − iβ) σ₋⟩`.
    Spin,
    /// `⟨N(τ)N⟩` against `⟨N(−τ − iβ)N⟩`.
    Number,
}

impl KmsPair {
    pub fn kinds(self) -> (CorrelatorKind, CorrelatorKind) {
        match self {
            KmsPair::Mode => (CorrelatorKind::AADag, CorrelatorKind::ADagA),
            KmsPair::Spin => (CorrelatorKind::MinusPlus, CorrelatorKind::PlusMinus),
            KmsPair::Number => (CorrelatorKind::NN, CorrelatorKind::NN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMSReport {
    /// `max |C₁ − C₂(continued)| / max |C₁|` over the grid.
    pub residual: f64,
    /// Summed quadrature error estimates on the same scale.
    pub error_estimate: f64,
    /// Ten times the relative quadrature tolerance.
    pub pass_threshold: f64,
    pub method: Method,
    pub pair: (CorrelatorKind, CorrelatorKind),
    pub label: String,
    pub tau_digest: String,
    pub beta: f64,
}

impl KMSReport {
    pub fn passes(&self) -> bool {
        self.residual <= self.pass_threshold
    }
}

fn ordinary(
    method: Method,
    kind: CorrelatorKind,
    params: &ModelParams,
    taus: &[f64],
) -> Result<Correlator> {
    match (params, method, kind) {
        (ModelParams::BosonFermion(p), Method::Mqrt, CorrelatorKind::NN) => mqrt_nn_eq(p, taus),
        (ModelParams::BosonFermion(p), Method::Sqrt, CorrelatorKind::NN) => sqrt_nn_eq(p, taus),
        (ModelParams::BosonFermion(p), Method::Mqrt, _) => mqrt_two_point_eq(p, kind, taus),
        (ModelParams::BosonFermion(p), Method::Sqrt, _) => sqrt_two_point_eq(p, kind, taus),
        (ModelParams::BosonFermion(p), Method::Exact, _) => exact_two_point_eq(p, kind, taus),
        (ModelParams::SpinBoson(p), Method::Mqrt, _) => sb_mqrt_eq(p, kind, taus),
        (ModelParams::SpinBoson(p), Method::Sqrt, _) => sb_sqrt_eq(p, kind, taus),
        _ => Err(Error::UnsupportedContinuation(format!(
            "{method:?} {kind:?} has no KMS partner for this model"
        ))),
    }
}

fn report(
    lhs: &[Estimate],
    rhs: &[Estimate],
    method: Method,
    pair: (CorrelatorKind, CorrelatorKind),
    label: &str,
    grid: &impl Serialize,
    params: &ModelParams,
) -> KMSReport {
    let scale = lhs
        .iter()
        .map(|e| e.value.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (mut diff, mut err) = (0.0f64, 0.0f64);
    for (a, b) in lhs.iter().zip(rhs) {
        diff = diff.max((a.value - b.value).norm());
        err = err.max(a.error + b.error);
    }
    KMSReport {
        residual: diff / scale,
        error_estimate: err / scale,
        pass_threshold: 10.0 * params.quad().rel_tol,
        method,
        pair,
        label: label.into(),
        tau_digest: digest_of(grid),
        beta: params.beta(),
    }
}

/// KMS residual of one ordering pair on `taus`, using integrand-level continuation.
pub fn kms_residual(
    params: &ModelParams,
    method: Method,
    pair: KmsPair,
    taus: &[f64],
) -> Result<KMSReport> {
    if taus.is_empty() {
        return Err(Error::GridMismatch("empty tau grid".into()));
    }
    let spin = matches!(params, ModelParams::SpinBoson(_));
    if spin != (pair == KmsPair::Spin) {
        return Err(Error::Config(format!(
            "pair {pair:?} does not belong to this model"
        )));
    }
    let (k1, k2) = pair.kinds();
    let c1 = ordinary(method, k1, params, taus)?;
    let beta = params.beta();
    let times: Vec<Complex64> = taus
        .iter()
        .map(|&t| {
            if pair == KmsPair::Number {
                Complex64::new(-t, -beta)
            } else {
                Complex64::new(t, -beta)
            }
        })
        .collect();
    let c2 = continued_correlator(method, k2, params, &times)?;
    let lhs: Vec<Estimate> = c1
        .values
        .iter()
        .zip(&c1.errors)
        .map(|(&value, &error)| Estimate { value, error })
        .collect();
    Ok(report(
        &lhs,
        &c2,
        method,
        (k1, k2),
        &format!("{pair:?}"),
        &taus,
        params,
    ))
}

/// Imaginary shifts (in units of β) of `(τ₁, τ₂)` on both sides of each relation.
const RELATIONS: [([f64; 2], [f64; 2]); 4] = [
    ([0.0, 0.0], [0.0, 1.0]),
    ([1.0, -1.0], [1.0, 0.0]),
    ([-1.0, 0.0], [-1.0, 1.0]),
    ([0.0, -1.0], [0.0, 0.0]),
];

/// The four three-point KMS relations between the `N`-right and `N`-left
/// orderings, each evaluated on the product grid `τ₁ × τ₂`.
pub fn three_point_kms_check(p: &BFParams, tau1: &[f64], tau2: &[f64]) -> Result<Vec<KMSReport>> {
    if tau1.is_empty() || tau2.is_empty() {
        return Err(Error::GridMismatch("empty tau grid".into()));
    }
    let kernel = Kernel::mqrt(p)?;
    let params = ModelParams::BosonFermion(p.clone());
    let beta = p.beta;
    let side = |shift: [f64; 2], ordering| -> Result<Vec<Estimate>> {
        let mut points = Vec::with_capacity(tau1.len() * tau2.len());
        for &t1 in tau1 {
            for &t2 in tau2 {
                points.push(three_point_terms(
                    p,
                    Complex64::new(t1, shift[0] * beta),
                    Complex64::new(t2, shift[1] * beta),
                    ordering,
                )?);
            }
        }
        kernel.evaluate(&points)
    };
    RELATIONS
        .iter()
        .enumerate()
        .map(|(k, (l, r))| {
            let lhs = side(*l, ThreePointOrdering::NRight)?;
            let rhs = side(*r, ThreePointOrdering::NLeft)?;
            Ok(report(
                &lhs,
                &rhs,
                Method::Mqrt,
                (CorrelatorKind::General, CorrelatorKind::General),
                &format!("three_point_{}", k + 1),
                &(tau1, tau2),
                &params,
            ))
        })
        .collect()
}
