use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ModelName, Regression, RunConfig};
use super::output::csv;
use crate::analysis::{
    default_deltas, default_temperatures, kms_residual, sweep_d, three_point_kms_check, KmsPair,
    ModelParams, SweepOptions,
};
use crate::engine::{self, ops, CMatrix, EngineOptions, SystemSpec, TimeLabel, TimePoint};
use crate::error::{Error, Result};
use crate::models::{
    self, exact_two_point_eq, mqrt_nn_eq, mqrt_two_point_eq, mqrt_two_point_finite, sb_mqrt_eq,
    sb_sqrt_eq, sqrt_nn_eq, sqrt_two_point_eq, three_point_mqrt_eq, Correlator, CorrelatorKind,
    Method,
};
use crate::oracle::{dense_ed_reference, nn_exact, two_point_exact, EdQuery, OracleSystem};

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub command: &'static str,
    pub csv: Option<String>,
    pub json: Option<String>,
    pub params_digest: String,
    /// False when the run finished but some cells failed.
    pub complete: bool,
}

impl Output {
    fn table(command: &'static str, csv: String, params_digest: String) -> Self {
        Output {
            command,
            csv: Some(csv),
            json: None,
            params_digest,
            complete: true,
        }
    }
}

const CORRELATOR_HEADER: [&str; 4] = ["tau", "re", "im", "err_estimate"];

fn correlator_rows(c: &Correlator) -> Vec<Vec<f64>> {
    c.tau
        .iter()
        .zip(&c.values)
        .zip(&c.errors)
        .map(|((&t, v), &e)| vec![t, v.re, v.im, e])
        .collect()
}

fn finite_t(cfg: &RunConfig) -> Option<f64> {
    match cfg.t {
        TimeLabel::Finite(t) => Some(t),
        _ => None,
    }
}

fn require_equilibrium(cfg: &RunConfig) -> Result<()> {
    if finite_t(cfg).is_some() {
        return Err(Error::Config(format!(
            "{:?} {:?} is available at t = inf only",
            cfg.method,
            cfg.kind()
        )));
    }
    Ok(())
}

/// The closed-form or engine correlator selected by `cfg`.
pub fn correlate(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    match cfg.method {
        Method::Oracle => return oracle(cfg, None, false),
        Method::Engine => return engine_cmd(cfg, None),
        _ => {}
    }
    let taus = cfg.tau.grid();
    let kind = cfg.kind();
    let c = match cfg.model {
        ModelName::Spinboson => {
            require_equilibrium(cfg)?;
            let p = cfg.sb_params()?;
            match cfg.method {
                Method::Sqrt => sb_sqrt_eq(&p, kind, &taus)?,
                _ => sb_mqrt_eq(&p, kind, &taus)?,
            }
        }
        _ => {
            let p = cfg.bf_params()?;
            match (cfg.method, kind, finite_t(cfg)) {
                (Method::Mqrt, CorrelatorKind::ADagA, Some(t)) => {
                    mqrt_two_point_finite(&p, cfg.n0, t, &taus)?
                }
                (_, _, Some(_)) => {
                    require_equilibrium(cfg)?;
                    unreachable!()
                }
                (Method::Sqrt, CorrelatorKind::NN, None) => sqrt_nn_eq(&p, &taus)?,
                (Method::Mqrt, CorrelatorKind::NN, None) => mqrt_nn_eq(&p, &taus)?,
                (Method::Sqrt, _, None) => sqrt_two_point_eq(&p, kind, &taus)?,
                (Method::Mqrt, _, None) => mqrt_two_point_eq(&p, kind, &taus)?,
                (Method::Exact, CorrelatorKind::NN, None) => {
                    return Err(Error::Config(
                        "no exact closed form for the number correlator; use the oracle".into(),
                    ))
                }
                (_, _, None) => exact_two_point_eq(&p, kind, &taus)?,
            }
        }
    };
    Ok(Output::table(
        "correlate",
        csv(&CORRELATOR_HEADER, &correlator_rows(&c)),
        c.meta.digest.clone(),
    ))
}

fn model_params(cfg: &RunConfig) -> Result<ModelParams> {
    Ok(match cfg.model {
        ModelName::Spinboson => ModelParams::SpinBoson(cfg.sb_params()?),
        ModelName::Boson | ModelName::Fermion => ModelParams::BosonFermion(cfg.bf_params()?),
        ModelName::Custom => {
            return Err(Error::Config(
                "KMS residuals need a closed-form model".into(),
            ))
        }
    })
}

#[derive(Serialize)]
struct KmsJson<'a> {
    #[serde(flatten)]
    report: &'a crate::analysis::KMSReport,
    passes: bool,
}

/// KMS residual report; a violation is a result, not an error.
pub fn kms(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    require_equilibrium(cfg)?;
    if !matches!(cfg.method, Method::Sqrt | Method::Mqrt | Method::Exact) {
        return Err(Error::Config(format!(
            "no KMS continuation for {:?}",
            cfg.method
        )));
    }
    let params = model_params(cfg)?;
    let pair = match (cfg.model, cfg.kind()) {
        (ModelName::Spinboson, _) => KmsPair::Spin,
        (_, CorrelatorKind::NN) => KmsPair::Number,
        _ => KmsPair::Mode,
    };
    let report = kms_residual(&params, cfg.method, pair, &cfg.tau.grid())?;
    let json = serde_json::to_string_pretty(&KmsJson {
        report: &report,
        passes: report.passes(),
    })
    .expect("report serializes");
    let digest = models::digest_of(&params);
    Ok(Output {
        command: "kms",
        csv: None,
        json: Some(json + "\n"),
        params_digest: digest,
        complete: true,
    })
}

/// `(T, δ)` sweep of the deviation metric.
pub fn sweep(cfg: &RunConfig) -> Result<Output> {
    let stats = cfg.model.stats().ok_or_else(|| {
        Error::Config("sweeps are defined for the boson and fermion models".into())
    })?;
    let settings = cfg.sweep.clone().unwrap_or_default();
    let temperatures = settings
        .temperatures
        .clone()
        .unwrap_or_else(default_temperatures);
    let deltas = settings.deltas.clone().unwrap_or_else(default_deltas);
    if temperatures
        .iter()
        .chain(&deltas)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(Error::Config(
            "sweep grids must hold positive finite values".into(),
        ));
    }
    let mut opts = SweepOptions {
        omega0: cfg.omega0,
        quad: cfg.quad,
        tau_f: settings.tau_f,
        ..Default::default()
    };
    if let Some(n) = settings.tau_points {
        if n < 2 {
            return Err(Error::Config("sweep.tau_points must be at least 2".into()));
        }
        opts.tau_points = n;
    }
    let table = sweep_d(stats, &temperatures, &deltas, &opts)?;
    for r in table.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "qregress: cell T = {}, delta = {} failed: {}",
            r.temperature,
            r.delta,
            r.error.as_deref().unwrap_or("")
        );
    }
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| vec![r.temperature, r.delta, r.d_mqrt, r.d_sqrt, r.tau_f])
        .collect();
    let digest = models::digest_of(&(stats, &temperatures, &deltas, &opts));
    let mut out = Output::table(
        "sweep",
        csv(&["T", "delta", "D_mqrt", "D_sqrt", "tau_f"], &rows),
        digest,
    );
    out.complete = table.failures() == 0;
    Ok(out)
}

fn oracle_system(cfg: &RunConfig, modes: Option<usize>) -> Result<OracleSystem> {
    let p = cfg.bf_params()?;
    let settings = cfg.oracle.clone().unwrap_or_default();
    let n = modes.unwrap_or(settings.modes);
    let window = settings.window.unwrap_or_else(|| p.j.window(&p.quad));
    OracleSystem::from_density(p.omega0, &p.j, n, window, p.stats, p.beta, cfg.n0)
}

/// Discretized-bath reference; `dense` compares against many-body diagonalization.
pub fn oracle(cfg: &RunConfig, modes: Option<usize>, dense: bool) -> Result<Output> {
    cfg.validate()?;
    if cfg.model.stats().is_none() {
        return Err(Error::Config(
            "the oracle covers the boson and fermion models".into(),
        ));
    }
    let t = finite_t(cfg).ok_or_else(|| Error::Config("the oracle needs a finite t".into()))?;
    let mut sys = oracle_system(cfg, modes)?;
    if dense {
        sys = sys.without_recurrence_guard();
    }
    let taus = cfg.tau.grid();
    if !dense {
        sys.check_recurrence(t + taus.iter().fold(0.0f64, |m, x| m.max(x.abs())))?;
    }
    let kind = cfg.kind();
    let eval = |tau: f64| -> Result<Complex64> {
        match kind {
            CorrelatorKind::NN => nn_exact(&sys, t, tau),
            _ => two_point_exact(&sys, t, tau, kind),
        }
    };
    let values: Vec<Complex64> = taus
        .par_iter()
        .map(|&tau| eval(tau))
        .collect::<Result<_>>()?;
    let digest = models::digest_of(&(cfg.bf_params()?, &sys.bath.omegas, cfg.n0, t));
    if dense {
        let truncation = cfg.oracle.clone().unwrap_or_default().dense_truncation;
        let rows = taus
            .par_iter()
            .zip(values.par_iter())
            .map(|(&tau, v)| {
                let q = match kind {
                    CorrelatorKind::NN => EdQuery::NN { t, tau },
                    _ => EdQuery::TwoPoint { t, tau, kind },
                };
                let d = dense_ed_reference(&sys, truncation, q)?;
                Ok(vec![tau, v.re, v.im, d.re, d.im, (v - d).norm()])
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Output::table(
            "oracle",
            csv(
                &["tau", "re", "im", "dense_re", "dense_im", "abs_diff"],
                &rows,
            ),
            digest,
        ));
    }
    let guard = 0.5 * sys.bath.recurrence_time();
    let rows: Vec<Vec<f64>> = taus
        .iter()
        .zip(&values)
        .map(|(&tau, v)| vec![tau, v.re, v.im, 0.0, sys.bath.n as f64, guard])
        .collect();
    Ok(Output::table(
        "oracle",
        csv(
            &["tau", "re", "im", "err_estimate", "N", "recurrence_guard"],
            &rows,
        ),
        digest,
    ))
}

/// Operators given as row-major lists of `[re, im]` pairs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatricesFile {
    pub h_s: Vec<[f64; 2]>,
    pub s: Vec<[f64; 2]>,
    #[serde(default)]
    pub a: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub o: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub rho0: Option<Vec<[f64; 2]>>,
}

fn to_matrix(entries: &[[f64; 2]], d: usize, what: &str) -> Result<CMatrix> {
    if entries.len() != d * d {
        return Err(Error::Config(format!(
            "{what} has {} entries, expected {}",
            entries.len(),
            d * d
        )));
    }
    let data: Vec<Complex64> = entries
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    Ok(DMatrix::from_row_slice(d, d, &data))
}

impl MatricesFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("matrices: {e}")))
    }

    pub fn dim(&self) -> Result<usize> {
        let d = (self.h_s.len() as f64).sqrt().round() as usize;
        if d * d != self.h_s.len() || d < 2 {
            return Err(Error::Config("h_s must hold d² entries with d ≥ 2".into()));
        }
        Ok(d)
    }
}

/// Diagonal state with mean occupation `n0`, geometric over the truncated ladder.
fn geometric_state(n_max: usize, n0: f64) -> Result<CMatrix> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::Config(format!("n0 must be nonnegative, got {n0}")));
    }
    let r = n0 / (1.0 + n0);
    let w: Vec<f64> = (0..n_max).map(|k| r.powi(k as i32)).collect();
    let z: f64 = w.iter().sum();
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n_max,
        w.iter().map(|p| Complex64::new(p / z, 0.0)),
    )))
}

struct EngineJob {
    spec: SystemSpec,
    a: CMatrix,
    o: CMatrix,
    conjugate: bool,
    rho0: CMatrix,
}

fn engine_job(cfg: &RunConfig, matrices: Option<&Path>) -> Result<EngineJob> {
    let settings = cfg.engine.clone().unwrap_or_default();
    let beta = cfg.beta()?;
    let quad = cfg.quad()?;
    let kind = cfg.kind();
    Ok(match cfg.model {
        ModelName::Spinboson => {
            if !(0.0..=1.0).contains(&cfg.n0) {
                return Err(Error::Config(
                    "spin n0 is the excited-state population in [0, 1]".into(),
                ));
            }
            let spec = SystemSpec::spin_boson(cfg.omega0, beta, cfg.j.clone(), quad)?;
            let (a, o, conjugate) = match kind {
                CorrelatorKind::PlusMinus => (ops::sigma_plus(), ops::sigma_minus(), false),
                _ => (ops::sigma_minus(), ops::sigma_plus(), true),
            };
            let rho0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(cfg.n0, 0.0),
                Complex64::new(1.0 - cfg.n0, 0.0),
            ]));
            EngineJob {
                spec,
                a,
                o,
                conjugate,
                rho0,
            }
        }
        ModelName::Boson => {
            let n = settings.n_max;
            let spec = SystemSpec::truncated_boson(cfg.omega0, beta, cfg.j.clone(), quad, n)?;
            let (a, o, conjugate) = match kind {
                CorrelatorKind::ADagA => (ops::creation(n), ops::annihilation(n), false),
                CorrelatorKind::AADag => (ops::annihilation(n), ops::creation(n), true),
                _ => (ops::number(n), ops::number(n), false),
            };
            EngineJob {
                spec,
                a,
                o,
                conjugate,
                rho0: geometric_state(n, cfg.n0)?,
            }
        }
        ModelName::Custom => {
            let path = matrices
                .map(Path::to_path_buf)
                .or(settings.matrices)
                .ok_or_else(|| Error::Config("custom model needs a matrices file".into()))?;
            let m = MatricesFile::load(&path)?;
            let d = m.dim()?;
            let h = to_matrix(&m.h_s, d, "h_s")?;
            let s = to_matrix(&m.s, d, "s")?;
            let a = match &m.a {
                Some(v) => to_matrix(v, d, "a")?,
                None => s.adjoint(),
            };
            let o = match &m.o {
                Some(v) => to_matrix(v, d, "o")?,
                None => s.clone(),
            };
            let spec = SystemSpec::new(h, s, cfg.j.clone(), beta, quad).map_err(|e| match e {
                Error::Domain(m) => Error::Config(m),
                other => other,
            })?;
            let rho0 = match &m.rho0 {
                Some(v) => to_matrix(v, d, "rho0")?,
                None => spec.gibbs_state(),
            };
            EngineJob {
                spec,
                a,
                o,
                conjugate: false,
                rho0,
            }
        }
        ModelName::Fermion => {
            return Err(Error::Config(
                "the engine couples to a bosonic bath only".into(),
            ))
        }
    })
}

/// Subdivides each τ interval until the RK4 step check passes, then samples back onto `taus`.
fn mqrt_refined(
    job: &EngineJob,
    time: &TimePoint,
    taus: &[f64],
    opts: &EngineOptions,
) -> Result<Correlator> {
    let mut last = None;
    for m in [1usize, 2, 4, 8, 16, 32] {
        let fine: Vec<f64> = taus
            .windows(2)
            .flat_map(|w| (0..m).map(move |k| w[0] + (w[1] - w[0]) * k as f64 / m as f64))
            .chain(std::iter::once(taus[taus.len() - 1]))
            .collect();
        match engine::mqrt_correlator(&job.spec, &job.a, &job.o, time, &fine, opts) {
            Ok(mut c) => {
                c.values = c.values.into_iter().step_by(m).collect();
                c.errors = c.errors.into_iter().step_by(m).collect();
                c.tau = taus.to_vec();
                return Ok(c);
            }
            Err(e @ Error::StepSize(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// General finite-dimensional engine.
pub fn engine_cmd(cfg: &RunConfig, matrices: Option<&Path>) -> Result<Output> {
    let mut cfg = cfg.clone();
    cfg.method = Method::Engine;
    cfg.validate()?;
    let job = engine_job(&cfg, matrices)?;
    let settings = cfg.engine.clone().unwrap_or_default();
    let mut opts = EngineOptions::default();
    if let Some(v) = settings.ode_rel_tol {
        opts.ode_rel_tol = v;
    }
    if let Some(v) = settings.correction_scale {
        opts.correction_scale = v;
    }
    let time = match finite_t(&cfg) {
        Some(t) => TimePoint::finite(t, job.rho0.clone()),
        None => TimePoint::Infinity,
    };
    let taus = cfg.tau.grid();
    let mut c = match settings.regression {
        Regression::Mqrt => mqrt_refined(&job, &time, &taus, &opts)?,
        Regression::Sqrt => {
            let e = engine::equal_time_two_point(&job.spec, &job.a, &job.o, &time)?;
            engine::sqrt_correlator(&job.spec, &job.a, &job.o, &e.op, &taus)?
        }
    };
    if job.conjugate {
        c.values.iter_mut().for_each(|v| *v = v.conj());
    }
    c.meta.kind = cfg.kind();
    Ok(Output::table(
        "engine",
        csv(&CORRELATOR_HEADER, &correlator_rows(&c)),
        c.meta.digest.clone(),
    ))
}

/// Bosonic three-point correlator on a `τ₁ × τ₂` grid, optionally with the four KMS relations.
pub fn threepoint(
    cfg: &RunConfig,
    ordering: Option<models::ThreePointOrdering>,
    with_kms: bool,
) -> Result<Output> {
    cfg.validate()?;
    require_equilibrium(cfg)?;
    if cfg.model != ModelName::Boson {
        return Err(Error::Config(
            "three-point correlators are implemented for the boson model".into(),
        ));
    }
    let p = cfg.bf_params()?;
    let settings = cfg.threepoint.clone().unwrap_or_default();
    let ordering = ordering.unwrap_or(settings.ordering);
    let (g1, g2) = (settings.tau1.grid(), settings.tau2.grid());
    let cells: Vec<(f64, f64)> = g1
        .iter()
        .flat_map(|&a| g2.iter().map(move |&b| (a, b)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(a, b)| three_point_mqrt_eq(&p, a, b, ordering).map(|v| vec![a, b, v.re, v.im]))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::table(
        "threepoint",
        csv(&["tau1", "tau2", "re", "im"], &rows),
        p.digest(),
    );
    if with_kms {
        let reports = three_point_kms_check(&p, &g1, &g2)?;
        out.json = Some(serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n");
    }
    Ok(out)
}
