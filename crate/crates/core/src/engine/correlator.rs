use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bohr::CMatrix;
use super::generator::build_adjoint_generator;
use super::problem::{Expansion, Problem};
use super::sector::CVector;
use super::{SystemSpec, TimePoint};
use crate::error::{Error, Result};
use crate::models::{check_grid, digest_of, Correlator, CorrelatorKind, CorrelatorMeta, Method};

const MODEL: &str = "engine";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineOptions {
    /// Allowed change of the correlator under step halving, relative to its maximum.
    pub ode_rel_tol: f64,
    /// Multiplies both correction terms; zero gives the standard regression theorem.
    pub correction_scale: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            ode_rel_tol: 1e-7,
            correction_scale: 1.0,
        }
    }
}

/// Equal-time two-point operator `E` with `⟨X(t) O(t)⟩ = Tr[E X]` for every
/// `X` in the dynamical span of `A`.
#[derive(Debug, Clone)]
pub struct EqualTime {
    pub op: CMatrix,
    pub error: f64,
}

/// Forcing operators with `Tr[C X]` the correction for `X` in the span of `A`.
#[derive(Debug, Clone)]
pub struct CorrectionTerms {
    pub c1: CMatrix,
    pub c2: CMatrix,
}

pub fn equal_time_two_point(
    spec: &SystemSpec,
    a: &CMatrix,
    o: &CMatrix,
    t: &TimePoint,
) -> Result<EqualTime> {
    let p = Problem::new(spec, a, o, t)?;
    let (y, error) = p.equal_time()?;
    Ok(EqualTime {
        op: p.a.operator_from(&y),
        error,
    })
}

pub fn correction_terms(
    spec: &SystemSpec,
    a: &CMatrix,
    o: &CMatrix,
    t: &TimePoint,
    tau: f64,
) -> Result<CorrectionTerms> {
    let d = spec.dim;
    if spec.j.is_zero() {
        return Ok(CorrectionTerms {
            c1: CMatrix::zeros(d, d),
            c2: CMatrix::zeros(d, d),
        });
    }
    let p = Problem::new(spec, a, o, t)?;
    let (c1, c2) = p.forcing(&[tau])?;
    Ok(CorrectionTerms {
        c1: p.a.operator_from(&c1[0]),
        c2: p.a.operator_from(&c2[0]),
    })
}

fn check_taus(taus: &[f64]) -> Result<()> {
    check_grid(taus)?;
    if taus.is_empty() || taus[0] != 0.0 {
        return Err(Error::GridMismatch("engine τ grids must start at 0".into()));
    }
    Ok(())
}

fn digest(spec: &SystemSpec, a: &CMatrix, o: &CMatrix, t: &TimePoint, method: Method) -> String {
    let flat = |m: &CMatrix| m.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>();
    let t_label = match t {
        TimePoint::Infinity => (f64::INFINITY, Vec::new()),
        TimePoint::Finite { t, rho0 } => (*t, flat(rho0)),
    };
    digest_of(&(
        flat(&spec.h_s),
        flat(&spec.s),
        &spec.j,
        spec.beta,
        &spec.quad,
        flat(a),
        flat(o),
        t_label.0.to_string(),
        t_label.1,
        method,
    ))
}

fn finish(
    spec: &SystemSpec,
    a: &CMatrix,
    o: &CMatrix,
    t: &TimePoint,
    method: Method,
    taus: &[f64],
    values: Vec<Complex64>,
    errors: Vec<f64>,
) -> Result<Correlator> {
    let meta = CorrelatorMeta {
        model: MODEL.into(),
        method,
        kind: CorrelatorKind::General,
        digest: digest(spec, a, o, t, method),
    };
    Correlator::new(taus.to_vec(), values, errors, meta)
}

/// Standard regression theorem: `Tr[E e^{𝓛†τ} A]` for a supplied equal-time
/// operator `E`.
pub fn sqrt_correlator(
    spec: &SystemSpec,
    a: &CMatrix,
    o: &CMatrix,
    init_two_point: &CMatrix,
    taus: &[f64],
) -> Result<Correlator> {
    check_taus(taus)?;
    spec.validate()?;
    if init_two_point.shape() != (spec.dim, spec.dim) || a.shape() != (spec.dim, spec.dim) {
        return Err(Error::Config("operator has the wrong shape".into()));
    }
    let gen = build_adjoint_generator(spec)?;
    let exp = Expansion::of(&gen, &spec.h_s, a)?;
    let values = exp.propagate(&exp.coefficients_from(init_two_point), taus);
    let errors = vec![0.0; taus.len()];
    finish(
        spec,
        a,
        o,
        &TimePoint::Infinity,
        Method::Sqrt,
        taus,
        values,
        errors,
    )
}

/// Stage times for RK4 runs with steps `h` and `h/2`. Each grid interval is
/// split into `n_k ≥ 4` equal steps no longer than a quarter of the smallest
/// spacing, and the list holds every multiple of a quarter step. Returns the
/// times, the list index of each grid point, and `n_k`.
fn stage_times(taus: &[f64]) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let min_dt = taus
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mut times = Vec::new();
    let mut index = vec![0];
    let mut steps = Vec::new();
    for w in taus.windows(2) {
        let n = (4.0 * (w[1] - w[0]) / min_dt - 1e-9).ceil().max(1.0) as usize;
        let q = (w[1] - w[0]) / (4 * n) as f64;
        for j in 0..4 * n {
            times.push(w[0] + j as f64 * q);
        }
        steps.push(n);
        index.push(times.len());
    }
    times.push(taus[taus.len() - 1]);
    (times, index, steps)
}

/// RK4 for `y′ = D y + c(τ)` with `c` tabulated on quarter steps; each step
/// spans `quarters` table entries (4 for `h`, 2 for `h/2`).
fn rk4(
    d: &CMatrix,
    y0: &CVector,
    c: &[CVector],
    times: &[f64],
    index: &[usize],
    steps: &[usize],
    quarters: usize,
) -> Vec<CVector> {
    let mut y = y0.clone();
    let mut out = vec![y.clone()];
    let re = |x: f64| Complex64::new(x, 0.0);
    for (k, &n) in steps.iter().enumerate() {
        let start = index[k];
        let h = (times[index[k + 1]] - times[start]) * quarters as f64 / (4 * n) as f64;
        for s in 0..(4 * n) / quarters {
            let i0 = start + s * quarters;
            let (c0, cm, c1) = (&c[i0], &c[i0 + quarters / 2], &c[i0 + quarters]);
            let k1 = d * &y + c0;
            let k2 = d * (&y + &k1 * re(h / 2.0)) + cm;
            let k3 = d * (&y + &k2 * re(h / 2.0)) + cm;
            let k4 = d * (&y + &k3 * re(h)) + c1;
            y += (k1 + (k2 + k3) * re(2.0) + k4) * re(h / 6.0);
        }
        out.push(y.clone());
    }
    out
}

/// Corrected regression theorem, integrated with RK4 on `taus` (which must
/// start at 0). The step is a quarter of the smallest spacing; the run is
/// repeated at half the step and the two must agree to `opts.ode_rel_tol`.
pub fn mqrt_correlator(
    spec: &SystemSpec,
    a: &CMatrix,
    o: &CMatrix,
    t: &TimePoint,
    taus: &[f64],
    opts: &EngineOptions,
) -> Result<Correlator> {
    check_taus(taus)?;
    let p = Problem::new(spec, a, o, t)?;
    let (y0, et_err) = p.equal_time()?;
    if p.channels.is_empty() || opts.correction_scale == 0.0 {
        let init = p.a.operator_from(&y0);
        let values = p.a.propagate(&p.a.coefficients_from(&init), taus);
        let errors = vec![et_err; taus.len()];
        return finish(spec, a, o, t, Method::Mqrt, taus, values, errors);
    }
    let (times, index, steps) = stage_times(taus);
    let (c1, c2) = p.forcing(&times)?;
    let scale = Complex64::new(opts.correction_scale, 0.0);
    let c: Vec<CVector> = c1
        .into_iter()
        .zip(c2)
        .map(|(x, y)| (x + y) * scale)
        .collect();
    let d = p.a.drift();
    let seed = p.a.seed();
    let coarse = rk4(&d, &y0, &c, &times, &index, &steps, 4);
    let fine = rk4(&d, &y0, &c, &times, &index, &steps, 2);
    let values: Vec<Complex64> = fine.iter().map(|y| seed.dot(y)).collect();
    let diffs: Vec<f64> = coarse
        .iter()
        .zip(&values)
        .map(|(y, v)| (seed.dot(y) - v).norm())
        .collect();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    if worst > opts.ode_rel_tol * peak {
        return Err(Error::StepSize(format!(
            "halving the RK4 step changed the correlator by {worst:.3e} (peak {peak:.3e}); refine the τ grid"
        )));
    }
    let errors = diffs.iter().map(|e| e + et_err).collect();
    finish(spec, a, o, t, Method::Mqrt, taus, values, errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ops;
    use crate::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
    use crate::models::{
        linspace, mqrt_two_point_eq, mqrt_two_point_finite, sb_mqrt_eq, BFParams, SBParams,
    };

    fn rq() -> SpectralDensity {
        SpectralDensity::rational_quartic(0.05)
    }

    fn spin() -> SystemSpec {
        SystemSpec::spin_boson(1.0, 1.0, rq(), QuadratureSpec::default()).unwrap()
    }

    fn rel_close(a: &[Complex64], b: &[Complex64], tol: f64) {
        let peak = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() <= tol * peak, "{x} vs {y}");
        }
    }

    #[test]
    fn spin_plus_minus_matches_closed_form() {
        let taus = linspace(0.0, 10.0, 101);
        let e = mqrt_correlator(
            &spin(),
            &ops::sigma_plus(),
            &ops::sigma_minus(),
            &TimePoint::Infinity,
            &taus,
            &EngineOptions::default(),
        )
        .unwrap();
        let m = sb_mqrt_eq(
            &SBParams::new(1.0, 1.0, rq()),
            crate::models::CorrelatorKind::PlusMinus,
            &taus,
        )
        .unwrap();
        rel_close(&e.values, &m.values, 1e-7);
    }

    #[test]
    fn spin_minus_plus_by_conjugation() {
        let taus = linspace(0.0, 6.0, 61);
        let e = mqrt_correlator(
            &spin(),
            &ops::sigma_minus(),
            &ops::sigma_plus(),
            &TimePoint::Infinity,
            &taus,
            &EngineOptions::default(),
        )
        .unwrap();
        let conj: Vec<Complex64> = e.values.iter().map(|v| v.conj()).collect();
        let m = sb_mqrt_eq(
            &SBParams::new(1.0, 1.0, rq()),
            crate::models::CorrelatorKind::MinusPlus,
            &taus,
        )
        .unwrap();
        rel_close(&conj, &m.values, 1e-7);
    }

    #[test]
    fn truncated_boson_matches_closed_form() {
        let j = SpectralDensity::rational_quartic(0.05).windowed(0.0, 60.0);
        let spec = SystemSpec::truncated_boson(1.0, 2.0, j.clone(), QuadratureSpec::default(), 12)
            .unwrap();
        let taus = linspace(0.0, 5.0, 51);
        let e = mqrt_correlator(
            &spec,
            &ops::creation(12),
            &ops::annihilation(12),
            &TimePoint::Infinity,
            &taus,
            &EngineOptions::default(),
        )
        .unwrap();
        let m = mqrt_two_point_eq(
            &BFParams::new(1.0, 2.0, Statistics::Boson, j),
            crate::models::CorrelatorKind::ADagA,
            &taus,
        )
        .unwrap();
        rel_close(&e.values, &m.values, 1e-4);
    }

    #[test]
    fn finite_time_boson_matches_closed_form() {
        let j = SpectralDensity::rational_quartic(0.05).windowed(0.0, 60.0);
        let spec = SystemSpec::truncated_boson(1.0, 2.0, j.clone(), QuadratureSpec::default(), 10)
            .unwrap();
        let rho0 = ops::projector(10, 1);
        let taus = linspace(0.0, 4.0, 41);
        let e = mqrt_correlator(
            &spec,
            &ops::creation(10),
            &ops::annihilation(10),
            &TimePoint::finite(3.0, rho0),
            &taus,
            &EngineOptions::default(),
        )
        .unwrap();
        let m = mqrt_two_point_finite(
            &BFParams::new(1.0, 2.0, Statistics::Boson, j),
            1.0,
            3.0,
            &taus,
        )
        .unwrap();
        rel_close(&e.values, &m.values, 1e-4);
    }

    #[test]
    fn zero_scale_is_exactly_sqrt() {
        let spec = spin();
        let (a, o) = (ops::sigma_plus(), ops::sigma_minus());
        let taus = linspace(0.0, 3.0, 7);
        let opts = EngineOptions {
            correction_scale: 0.0,
            ..EngineOptions::default()
        };
        let m = mqrt_correlator(&spec, &a, &o, &TimePoint::Infinity, &taus, &opts).unwrap();
        let init = equal_time_two_point(&spec, &a, &o, &TimePoint::Infinity).unwrap();
        let s = sqrt_correlator(&spec, &a, &o, &init.op, &taus).unwrap();
        assert_eq!(m.values, s.values);
    }

    #[test]
    fn zero_coupling_equal_time_is_product() {
        let spec =
            SystemSpec::spin_boson(1.0, 1.0, SpectralDensity::Zero, QuadratureSpec::default())
                .unwrap();
        let rho0 = ops::projector(2, 0);
        let t = TimePoint::finite(0.7, rho0.clone());
        let (a, o) = (ops::sigma_plus(), ops::sigma_minus());
        let et = equal_time_two_point(&spec, &a, &o, &t).unwrap();
        // σ₊(t)σ₋(t) = |e⟩⟨e| under free evolution.
        assert!((ops::trace_product(&et.op, &a) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let c = correction_terms(&spec, &a, &o, &t, 0.4).unwrap();
        assert_eq!(c.c1.norm() + c.c2.norm(), 0.0);
        assert!(equal_time_two_point(&spec, &a, &o, &TimePoint::Infinity).is_err());
    }

    #[test]
    fn boson_correction_terms() {
        let j = SpectralDensity::rational_quartic(0.05).windowed(0.0, 60.0);
        let spec =
            SystemSpec::truncated_boson(1.0, 2.0, j.clone(), QuadratureSpec::default(), 8).unwrap();
        let a = ops::creation(8);
        let c =
            correction_terms(&spec, &a, &ops::annihilation(8), &TimePoint::Infinity, 0.0).unwrap();
        assert!(ops::trace_product(&c.c2, &a).norm() < 1e-6 * ops::trace_product(&c.c1, &a).norm());
        let p = BFParams::new(1.0, 2.0, Statistics::Boson, j);
        let g = crate::models::complex_rate(&p).unwrap();
        let direct = crate::mathkit::integrate(
            &|x: f64| Complex64::new(p.f(x), 0.0) / (g.value.conj() - Complex64::new(0.0, x)),
            0.0,
            60.0,
            &[1.0, g.omega0_prime],
            &QuadratureSpec::default(),
        )
        .unwrap();
        let expect = direct.value / (2.0 * std::f64::consts::PI);
        assert!((ops::trace_product(&c.c1, &a) - expect).norm() < 1e-3 * expect.norm());
    }

    #[test]
    fn grid_must_start_at_zero() {
        let spec = spin();
        let e = mqrt_correlator(
            &spec,
            &ops::sigma_plus(),
            &ops::sigma_minus(),
            &TimePoint::Infinity,
            &[0.5, 1.0],
            &EngineOptions::default(),
        );
        assert!(matches!(e, Err(Error::GridMismatch(_))));
    }
}
