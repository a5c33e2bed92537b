//! The JSON run configuration and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::TimeLabel;
use crate::error::{Error, Result};
use crate::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
use crate::models::{BFParams, CorrelatorKind, Method, SBParams, ThreePointOrdering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Boson,
    Fermion,
    Spinboson,
    Custom,
}

impl ModelName {
    pub fn stats(self) -> Option<Statistics> {
        match self {
            ModelName::Boson => Some(Statistics::Boson),
            ModelName::Fermion => Some(Statistics::Fermion),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for TauRange {
    fn default() -> Self {
        TauRange {
            start: 0.0,
            stop: 10.0,
            points: 201,
        }
    }
}

impl TauRange {
    pub fn grid(&self) -> Vec<f64> {
        crate::models::linspace(self.start, self.stop, self.points)
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!(
                "{what}: at least two points are required"
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop > self.start) {
            return Err(Error::Config(format!("{what}: need finite start < stop")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Bath window; defaults to the support of `j` clipped by the quadrature cutoff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    /// Fock states per bosonic mode in the dense check.
    #[serde(default = "default_truncation")]
    pub dense_truncation: usize,
}

fn default_modes() -> usize {
    1000
}

fn default_truncation() -> usize {
    6
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            modes: default_modes(),
            window: None,
            dense_truncation: default_truncation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regression {
    #[default]
    Mqrt,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSettings {
    /// JSON file with `h_s`, `s` and optionally `a`, `o`, `rho0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<PathBuf>,
    /// Fock truncation for `model = boson`.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub regression: Regression,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction_scale: Option<f64>,
}

fn default_n_max() -> usize {
    20
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            matrices: None,
            n_max: default_n_max(),
            regression: Regression::Mqrt,
            ode_rel_tol: None,
            correction_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreePointSettings {
    pub tau1: TauRange,
    pub tau2: TauRange,
    #[serde(default = "default_ordering")]
    pub ordering: ThreePointOrdering,
}

fn default_ordering() -> ThreePointOrdering {
    ThreePointOrdering::NRight
}

impl Default for ThreePointSettings {
    fn default() -> Self {
        let r = TauRange {
            start: 0.0,
            stop: 5.0,
            points: 21,
        };
        ThreePointSettings {
            tau1: r,
            tau2: r,
            ordering: default_ordering(),
        }
    }
}

/// Written into the sidecar; ignored when the sidecar is read back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub command: String,
    pub params_digest: String,
    pub csv_sha256: String,
    pub rows: usize,
    pub version: String,
}

fn default_method() -> Method {
    Method::Mqrt
}

fn default_omega0() -> f64 {
    1.0
}

fn default_time() -> TimeLabel {
    TimeLabel::Named(crate::engine::InfinityLabel::Inf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelName,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<CorrelatorKind>,
    #[serde(default = "default_omega0")]
    pub omega0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub j: SpectralDensity,
    #[serde(default)]
    pub tau: TauRange,
    #[serde(default = "default_time")]
    pub t: TimeLabel,
    /// Initial occupation of the system mode for finite `t`.
    #[serde(default)]
    pub n0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threepoint: Option<ThreePointSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn beta(&self) -> Result<f64> {
        let b = match (self.temperature, self.beta) {
            (Some(t), None) => 1.0 / t,
            (None, Some(b)) => b,
            _ => {
                return Err(Error::Config(
                    "give exactly one of temperature and beta".into(),
                ))
            }
        };
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config(format!(
                "inverse temperature must be positive and finite, got {b}"
            )));
        }
        Ok(b)
    }

    /// The correlator kind, defaulted per model.
    pub fn kind(&self) -> CorrelatorKind {
        self.kind.unwrap_or(match self.model {
            ModelName::Boson | ModelName::Fermion => CorrelatorKind::ADagA,
            ModelName::Spinboson => CorrelatorKind::PlusMinus,
            ModelName::Custom => CorrelatorKind::General,
        })
    }

    pub fn quad(&self) -> Result<QuadratureSpec> {
        Ok(self
            .quad
            .unwrap_or_else(|| QuadratureSpec::for_model(self.omega0, self.beta().unwrap_or(1.0))))
    }

    pub fn bf_params(&self) -> Result<BFParams> {
        let stats = self.model.stats().ok_or_else(|| {
            Error::Config(format!("{:?} is not a boson/fermion model", self.model))
        })?;
        Ok(BFParams::new(self.omega0, self.beta()?, stats, self.j.clone()).with_quad(self.quad()?))
    }

    pub fn sb_params(&self) -> Result<SBParams> {
        Ok(SBParams::new(self.omega0, self.beta()?, self.j.clone()).with_quad(self.quad()?))
    }

    /// Structural checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        self.beta()?;
        if !self.omega0.is_finite() {
            return Err(Error::Config("omega0 must be finite".into()));
        }
        self.tau.validate("tau")?;
        self.j
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(q) = &self.quad {
            q.validate()?;
        }
        if let TimeLabel::Finite(t) = self.t {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "t must be nonnegative or \"inf\", got {t}"
                )));
            }
        }
        use Method::*;
        use ModelName::*;
        let ok = match self.method {
            Sqrt | Mqrt => self.model != Custom,
            Exact | Oracle => matches!(self.model, Boson | Fermion),
            Engine => self.model != Fermion,
        };
        if !ok {
            return Err(Error::Config(format!(
                "method {:?} is not available for model {:?}",
                self.method, self.model
            )));
        }
        let kind = self.kind();
        let kind_ok = match self.model {
            Boson | Fermion => matches!(
                kind,
                CorrelatorKind::ADagA | CorrelatorKind::AADag | CorrelatorKind::NN
            ),
            Spinboson => kind.is_spin(),
            Custom => kind == CorrelatorKind::General,
        };
        if !kind_ok {
            return Err(Error::Config(format!(
                "kind {kind:?} does not belong to model {:?}",
                self.model
            )));
        }
        if self.model == Fermion && kind == CorrelatorKind::NN && self.method == Engine {
            return Err(Error::Config(
                "the engine couples to a bosonic bath only".into(),
            ));
        }
        if let Some(tp) = &self.threepoint {
            tp.tau1.validate("threepoint.tau1")?;
            tp.tau2.validate("threepoint.tau2")?;
        }
        if let Some(o) = &self.oracle {
            if o.modes == 0 {
                return Err(Error::Config("oracle.modes must be positive".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"model":"boson","temperature":1.0,"j":{"type":"rational_quartic","delta":0.1}}"#;

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.method, Method::Mqrt);
        assert_eq!(c.kind(), CorrelatorKind::ADagA);
        assert!(c.t.is_infinite());
        assert_eq!(c.tau.grid().len(), 201);
    }

    #[test]
    fn exactly_one_temperature() {
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.beta = Some(1.0);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.temperature = None;
        c.beta = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_and_bad_combinations_are_rejected() {
        assert!(RunConfig::from_json(
            r#"{"model":"boson","beta":1,"j":{"type":"zero"},"colour":1}"#
        )
        .is_err());
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.model = ModelName::Spinboson;
        c.method = Method::Oracle;
        assert!(c.validate().is_err());
        c.method = Method::Mqrt;
        c.kind = Some(CorrelatorKind::ADagA);
        assert!(c.validate().is_err());
        c.kind = None;
        c.tau.points = 1;
        assert!(c.validate().is_err());
    }
}
