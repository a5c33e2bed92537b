//! General finite-dimensional engine: Bohr decomposition, secular adjoint
//! generator, and two-time correlators with and without the second-order
//! corrections to the regression theorem.
//!
//! Operators are dense `d × d` complex matrices. The bath is bosonic and
//! couples through a single operator `S` as `S B† + S† B`.

pub mod bohr;
pub mod correlator;
pub mod generator;
pub mod ops;
mod problem;
mod sector;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{QuadratureSpec, SpectralDensity};

pub use bohr::{bohr_decompose, BohrComponent, BohrDecomposition, CMatrix};
pub use correlator::{
    correction_terms, equal_time_two_point, mqrt_correlator, sqrt_correlator, CorrectionTerms,
    EngineOptions, EqualTime,
};
pub use generator::{build_adjoint_generator, evolve_one_point, AdjointGenerator, RateChannel};

/// Default relative tolerance used to merge Bohr frequencies.
pub const GROUPING_TOL: f64 = 1e-9;

const MAX_DIM_SQUARED: usize = 4096;

/// A small system coupled to a bosonic bath through one operator.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub dim: usize,
    pub h_s: CMatrix,
    pub s: CMatrix,
    pub j: SpectralDensity,
    pub beta: f64,
    pub quad: QuadratureSpec,
    pub fock_truncation_note: Option<String>,
}

impl SystemSpec {
    pub fn new(
        h_s: CMatrix,
        s: CMatrix,
        j: SpectralDensity,
        beta: f64,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        let spec = SystemSpec {
            dim: h_s.nrows(),
            h_s,
            s,
            j,
            beta,
            quad,
            fock_truncation_note: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Two-level system `H = ω₀σ_z/2` with `S = σ₋`.
    pub fn spin_boson(
        omega0: f64,
        beta: f64,
        j: SpectralDensity,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        SystemSpec::new(
            ops::spin_hamiltonian(omega0),
            ops::sigma_minus(),
            j,
            beta,
            quad,
        )
    }

    /// Harmonic mode `H = ω₀ a†a` truncated to `n_max` Fock states, `S = a`.
    pub fn truncated_boson(
        omega0: f64,
        beta: f64,
        j: SpectralDensity,
        quad: QuadratureSpec,
        n_max: usize,
    ) -> Result<Self> {
        let h = ops::number(n_max) * Complex64::new(omega0, 0.0);
        let mut spec = SystemSpec::new(h, ops::annihilation(n_max), j, beta, quad)?;
        spec.fock_truncation_note = Some(format!("harmonic mode truncated to {n_max} Fock states"));
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.h_s.nrows();
        if d < 2 || self.dim != d {
            return Err(Error::Config(format!(
                "system dimension must be at least 2 and consistent, got {d}"
            )));
        }
        if d * d > MAX_DIM_SQUARED {
            return Err(Error::Size(format!(
                "d² = {} exceeds {MAX_DIM_SQUARED}",
                d * d
            )));
        }
        bohr::check_hermitian(&self.h_s)?;
        if self.s.shape() != (d, d) {
            return Err(Error::Config(
                "coupling operator has the wrong shape".into(),
            ));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta must be positive and finite, got {}",
                self.beta
            )));
        }
        self.j.validate()?;
        self.j.validate_bosonic()?;
        self.quad.validate()
    }

    /// Canonical state `e^{−βH_S}/Z`.
    pub fn gibbs_state(&self) -> CMatrix {
        ops::gibbs_state(&self.h_s, self.beta)
    }

    /// Spread of the eigenvalues of `H_S`, at least 1.
    pub(crate) fn frequency_scale(&self) -> f64 {
        let (e, _) = bohr::hermitian_eigen(&self.h_s);
        (e[e.len() - 1] - e[0]).abs().max(1.0)
    }
}

/// Time `t` at which the two-time correlator starts.
#[derive(Debug, Clone)]
pub enum TimePoint {
    /// Finite `t` with the initial system state `ρ_S(0)`.
    Finite { t: f64, rho0: CMatrix },
    /// The stationary limit `t → ∞`.
    Infinity,
}

impl TimePoint {
    pub fn finite(t: f64, rho0: CMatrix) -> Self {
        TimePoint::Finite { t, rho0 }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if let TimePoint::Finite { t, rho0 } = self {
            if !(*t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!(
                    "t must be finite and nonnegative, got {t}"
                )));
            }
            if rho0.shape() != (dim, dim) {
                return Err(Error::Config("initial state has the wrong shape".into()));
            }
            let tr = rho0.trace();
            if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::Domain(format!(
                    "initial state must have unit trace, got {tr}"
                )));
            }
        }
        Ok(())
    }
}

/// Serializable label for a time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeLabel {
    Finite(f64),
    Named(InfinityLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfinityLabel {
    Inf,
}

impl TimeLabel {
    pub fn is_infinite(self) -> bool {
        matches!(self, TimeLabel::Named(InfinityLabel::Inf))
    }
}
