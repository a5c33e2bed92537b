use std::f64::consts::PI;

use num_complex::Complex64;

use super::bohr::{bohr_decompose, CMatrix};
use super::sector::Sector;
use super::{SystemSpec, GROUPING_TOL};
use crate::error::{Error, Result};
use crate::mathkit::{thermal_hilbert, weighted_complement, weighted_occupation, Statistics};

/// A Lindblad channel `γ (L†XL − ½{L†L, X})`.
#[derive(Debug, Clone)]
pub struct RateChannel {
    pub omega: f64,
    pub rate: f64,
    pub jump: CMatrix,
}

/// `𝓛†X = i[H_S + H_LS, X] + Σ_k γ_k (L_k† X L_k − ½{L_k†L_k, X})`.
#[derive(Debug, Clone)]
pub struct AdjointGenerator {
    pub dim: usize,
    pub h_s: CMatrix,
    pub lamb_shift_h: CMatrix,
    pub rate_table: Vec<RateChannel>,
    h_eff: CMatrix,
    decay: CMatrix,
}

impl AdjointGenerator {
    /// Applies `𝓛†` to an operator.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let i = Complex64::i();
        let mut out = (&self.h_eff * x - x * &self.h_eff) * i;
        out -= (&self.decay * x + x * &self.decay) * Complex64::new(0.5, 0.0);
        for ch in &self.rate_table {
            out += ch.jump.adjoint() * x * &ch.jump * Complex64::new(ch.rate, 0.0);
        }
        out
    }

    /// Applies the Schrödinger-picture generator `𝓛`, defined by
    /// `Tr[𝓛(ρ) X] = Tr[ρ 𝓛†(X)]`.
    pub fn apply_dual(&self, rho: &CMatrix) -> CMatrix {
        let i = Complex64::i();
        let mut out = (&self.h_eff * rho - rho * &self.h_eff) * (-i);
        out -= (&self.decay * rho + rho * &self.decay) * Complex64::new(0.5, 0.0);
        for ch in &self.rate_table {
            out += &ch.jump * rho * ch.jump.adjoint() * Complex64::new(ch.rate, 0.0);
        }
        out
    }

    /// `d² × d²` matrix of `𝓛†` on column-major vectorized operators.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.dim;
        let mut m = CMatrix::zeros(d * d, d * d);
        for col in 0..d * d {
            let mut e = CMatrix::zeros(d, d);
            e[(col % d, col / d)] = Complex64::new(1.0, 0.0);
            let y = self.apply(&e);
            for (row, v) in y.iter().enumerate() {
                m[(row, col)] = *v;
            }
        }
        m
    }

    pub fn lamb_shift_h(&self) -> &CMatrix {
        &self.lamb_shift_h
    }
}

/// Builds the secular Born–Markov generator. For every Bohr component `S_ω`
/// with `ω ≠ 0`: a channel `S_ω` at rate `J(ω)(1+n(ω))` and a channel `S_ω†`
/// at rate `J(ω)n(ω)`.
pub fn build_adjoint_generator(spec: &SystemSpec) -> Result<AdjointGenerator> {
    spec.validate()?;
    let d = spec.dim;
    let parts = bohr_decompose(&spec.h_s, &spec.s, GROUPING_TOL)?;
    let mut rate_table = Vec::new();
    let mut lamb = CMatrix::zeros(d, d);
    for comp in &parts.components {
        let jw = spec.j.eval(comp.omega);
        if comp.omega == 0.0 {
            if jw != 0.0 {
                return Err(Error::UnsupportedSpec(
                    "coupling operator has a zero-frequency component where J(0) ≠ 0".into(),
                ));
            }
            continue;
        }
        let down = weighted_complement(&spec.j, comp.omega, spec.beta, Statistics::Boson)?;
        let up = weighted_occupation(&spec.j, comp.omega, spec.beta, Statistics::Boson)?;
        if down < 0.0 || up < 0.0 {
            return Err(Error::UnsupportedSpec(format!(
                "negative transition rate at Bohr frequency {}; J must vanish where n(ω) < 0",
                comp.omega
            )));
        }
        let op = &comp.op;
        let sds = op.adjoint() * op;
        let ssd = op * op.adjoint();
        if !spec.j.is_zero() {
            let th = thermal_hilbert(&spec.j, spec.beta, comp.omega, &spec.quad)?;
            let hil = spec.j.hilbert(comp.omega, &spec.quad)?;
            let delta_down = (hil + th) / (2.0 * PI);
            let delta_up = -th / (2.0 * PI);
            lamb += &sds * Complex64::new(delta_down, 0.0) + &ssd * Complex64::new(delta_up, 0.0);
        }
        if down > 0.0 {
            rate_table.push(RateChannel {
                omega: comp.omega,
                rate: down,
                jump: op.clone(),
            });
        }
        if up > 0.0 {
            rate_table.push(RateChannel {
                omega: -comp.omega,
                rate: up,
                jump: op.adjoint(),
            });
        }
    }
    let lamb = (&lamb + lamb.adjoint()) * Complex64::new(0.5, 0.0);
    let decay = rate_table.iter().fold(CMatrix::zeros(d, d), |acc, ch| {
        acc + ch.jump.adjoint() * &ch.jump * Complex64::new(ch.rate, 0.0)
    });
    Ok(AdjointGenerator {
        dim: d,
        h_s: spec.h_s.clone(),
        h_eff: &spec.h_s + &lamb,
        lamb_shift_h: lamb,
        rate_table,
        decay,
    })
}

/// `e^{𝓛†t} X₀`, evaluated in the invariant Krylov subspace of each Bohr
/// component of `X₀`.
pub fn evolve_one_point(gen: &AdjointGenerator, x0: &CMatrix, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    if x0.shape() != (gen.dim, gen.dim) {
        return Err(Error::Config("operator has the wrong shape".into()));
    }
    let parts = bohr_decompose(&gen.h_s, x0, GROUPING_TOL)?;
    let mut out = CMatrix::zeros(gen.dim, gen.dim);
    for comp in &parts.components {
        if let Some(sec) = Sector::build(gen, &comp.op, comp.omega)? {
            let coeffs = sec.propagator(t) * &sec.seed;
            out += sec.operator(&coeffs);
        }
    }
    Ok(out)
}
