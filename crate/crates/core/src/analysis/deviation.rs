use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
use crate::models::{
    exact_two_point_eq, linspace, mqrt_two_point_eq, sqrt_two_point_eq, BFParams, Correlator,
    CorrelatorKind,
};

/// `(1/τ_f) ∫_0^{τ_f} (|Re ΔC| + |Im ΔC|) dτ` by the trapezoidal rule on the
/// shared grid, with the last partial interval interpolated linearly.
pub fn deviation_metric(c: &Correlator, c_ref: &Correlator, tau_f: f64) -> Result<f64> {
    if c.tau.len() != c_ref.tau.len()
        || c.tau
            .iter()
            .zip(&c_ref.tau)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch(
            "correlators are sampled on different grids".into(),
        ));
    }
    deviation_of_samples(&c.tau, &c.values, &c_ref.values, tau_f)
}

/// [`deviation_metric`] on raw samples.
pub fn deviation_of_samples(
    tau: &[f64],
    a: &[Complex64],
    b: &[Complex64],
    tau_f: f64,
) -> Result<f64> {
    if !(tau_f > 0.0 && tau_f.is_finite()) {
        return Err(Error::Domain(format!(
            "tau_f must be positive, got {tau_f}"
        )));
    }
    if a.len() != tau.len() || b.len() != tau.len() || tau.len() < 2 {
        return Err(Error::GridMismatch(
            "need at least two samples of equal length".into(),
        ));
    }
    let tol = 1e-12 * tau_f;
    if tau[0].abs() > tol || tau[tau.len() - 1] < tau_f - tol {
        return Err(Error::GridMismatch(format!(
            "grid does not cover [0, {tau_f}]"
        )));
    }
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mag = |d: Complex64| d.re.abs() + d.im.abs();
    let mut total = 0.0;
    for k in 1..tau.len() {
        let (t0, t1) = (tau[k - 1], tau[k]);
        if t0 >= tau_f - tol {
            break;
        }
        if t1 <= tau_f + tol {
            total += 0.5 * (t1 - t0) * (mag(diff[k - 1]) + mag(diff[k]));
        } else {
            let s = (tau_f - t0) / (t1 - t0);
            let end = diff[k - 1] * (1.0 - s) + diff[k] * s;
            total += 0.5 * (tau_f - t0) * (mag(diff[k - 1]) + mag(end));
            break;
        }
    }
    Ok(total / tau_f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub temperature: f64,
    pub delta: f64,
    pub d_mqrt: f64,
    pub d_sqrt: f64,
    pub tau_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub stats: Statistics,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub omega0: f64,
    /// τ samples on `[0, τ_f]`.
    pub tau_points: usize,
    /// Replaces `τ_f = 1/δ` when set.
    pub tau_f: Option<f64>,
    /// Replaces the per-cell default quadrature when set.
    pub quad: Option<QuadratureSpec>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            omega0: 1.0,
            tau_points: 401,
            tau_f: None,
            quad: None,
        }
    }
}

pub fn default_temperatures() -> Vec<f64> {
    linspace(0.5, 4.0, 8)
}

pub fn default_deltas() -> Vec<f64> {
    linspace(0.02, 0.2, 8)
}

fn sweep_cell(
    stats: Statistics,
    temperature: f64,
    delta: f64,
    opts: &SweepOptions,
) -> Result<(f64, f64, f64)> {
    if !(temperature > 0.0 && delta > 0.0) {
        return Err(Error::Domain(format!(
            "T = {temperature} and δ = {delta} must be positive"
        )));
    }
    let mut p = BFParams::new(
        opts.omega0,
        1.0 / temperature,
        stats,
        SpectralDensity::rational_quartic(delta),
    );
    if let Some(q) = opts.quad {
        p = p.with_quad(q);
    }
    let tau_f = opts.tau_f.unwrap_or(1.0 / delta);
    let taus = linspace(0.0, tau_f, opts.tau_points.max(2));
    let kind = CorrelatorKind::ADagA;
    let exact = exact_two_point_eq(&p, kind, &taus)?;
    let mqrt = mqrt_two_point_eq(&p, kind, &taus)?;
    let sqrt = sqrt_two_point_eq(&p, kind, &taus)?;
    Ok((
        deviation_metric(&mqrt, &exact, tau_f)?,
        deviation_metric(&sqrt, &exact, tau_f)?,
        tau_f,
    ))
}

/// Deviation of the MQRT and SQRT `⟨a†(τ)a⟩` from the exact result over a
/// `(T, δ)` grid with `J = RationalQuartic(δ)`. Rows are in row-major order
/// (temperature outer); a failed cell carries `NaN` values and its error.
pub fn sweep_d(
    stats: Statistics,
    temperatures: &[f64],
    deltas: &[f64],
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if temperatures.is_empty() || deltas.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    let cells: Vec<(f64, f64)> = temperatures
        .iter()
        .flat_map(|&t| deltas.iter().map(move |&d| (t, d)))
        .collect();
    let rows = cells
        .par_iter()
        .map(
            |&(temperature, delta)| match sweep_cell(stats, temperature, delta, opts) {
                Ok((d_mqrt, d_sqrt, tau_f)) => SweepRow {
                    temperature,
                    delta,
                    d_mqrt,
                    d_sqrt,
                    tau_f,
                    error: None,
                },
                Err(e) => SweepRow {
                    temperature,
                    delta,
                    d_mqrt: f64::NAN,
                    d_sqrt: f64::NAN,
                    tau_f: opts.tau_f.unwrap_or(1.0 / delta),
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    Ok(SweepTable { stats, rows })
}
