//! Adaptive Gauss–Kronrod quadrature over finite frequency windows.
//!
//! The workhorse is [`integrate_family`], which integrates a whole family of
//! integrands `e^{iΩx} g(Ω)` for many (possibly complex) times `x` while
//! sampling `g` only once per node. Panels are refined until every member of
//! the family meets its tolerance, so the same partition serves a full τ grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation and tolerance settings shared by every frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Integrals over the real line are truncated to `[-omega_max, omega_max]`.
    pub omega_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Panels are never wider than `min_panel_width_factor * π / |τ|`.
    pub min_panel_width_factor: f64,
    /// Largest tolerated mass estimate beyond the truncation edge.
    pub tail_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            omega_max: 50.0,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_panels: 200_000,
            min_panel_width_factor: 2.0,
            tail_tol: 1e-4,
        }
    }
}

impl QuadratureSpec {
    /// Default settings with `omega_max = 50 max(|ω₀|, 1, 1/β)`.
    pub fn for_model(omega0: f64, beta: f64) -> Self {
        let scale = omega0.abs().max(1.0).max(1.0 / beta);
        QuadratureSpec {
            omega_max: 50.0 * scale,
            ..Default::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_omega_max(mut self, omega_max: f64) -> Self {
        self.omega_max = omega_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::Config(format!(
                "omega_max must be positive, got {}",
                self.omega_max
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("rel_tol and abs_tol must be positive".into()));
        }
        if self.max_panels < 4 {
            return Err(Error::Config("max_panels must be at least 4".into()));
        }
        if !(self.min_panel_width_factor > 0.0) {
            return Err(Error::Config(
                "min_panel_width_factor must be positive".into(),
            ));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config("tail_tol must be positive".into()));
        }
        Ok(())
    }

    /// Tolerance for an integral of magnitude `value`.
    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// An integral value with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        }
    }

    pub fn scale(self, factor: Complex64) -> Self {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.norm(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Node abscissae and (Kronrod, Gauss) weights on `[a, b]`.
fn panel_rule(a: f64, b: f64) -> ([f64; 15], [f64; 15], [f64; 15]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        x[2 * i] = c - h * XGK[i];
        x[2 * i + 1] = c + h * XGK[i];
        wk[2 * i] = h * WGK[i];
        wk[2 * i + 1] = h * WGK[i];
        if i % 2 == 1 {
            wg[2 * i] = h * WG[i / 2];
            wg[2 * i + 1] = h * WG[i / 2];
        }
    }
    x[14] = c;
    wk[14] = h * WGK[7];
    wg[14] = h * WG[3];
    (x, wk, wg)
}

struct Panel {
    a: f64,
    b: f64,
    /// Per-time Kronrod sum and |Kronrod − Gauss|.
    sums: Vec<(Complex64, f64)>,
}

fn arithmetic_step(times: &[Complex64]) -> Option<Complex64> {
    if times.len() < 3 {
        return None;
    }
    let step = times[1] - times[0];
    let scale = times
        .iter()
        .map(|t| t.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let uniform = times
        .windows(2)
        .all(|w| (w[1] - w[0] - step).norm() <= 1e-12 * scale);
    uniform.then_some(step)
}

fn evaluate_panel<G>(g: &G, a: f64, b: f64, times: &[Complex64], step: Option<Complex64>) -> Panel
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let (x, wk, wg) = panel_rule(a, b);
    let mut kron = vec![Complex64::new(0.0, 0.0); times.len()];
    let mut gauss = vec![Complex64::new(0.0, 0.0); times.len()];
    let i = Complex64::new(0.0, 1.0);
    for n in 0..15 {
        let gv = g(x[n]);
        if gv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let kv = gv * wk[n];
        let gw = gv * wg[n];
        match step {
            Some(dt) => {
                let mut phase = (i * x[n] * times[0]).exp();
                let rot = (i * x[n] * dt).exp();
                for t in 0..times.len() {
                    kron[t] += kv * phase;
                    if wg[n] != 0.0 {
                        gauss[t] += gw * phase;
                    }
                    phase *= rot;
                }
            }
            None => {
                for (t, &time) in times.iter().enumerate() {
                    let phase = if time == Complex64::new(0.0, 0.0) {
                        Complex64::new(1.0, 0.0)
                    } else {
                        (i * x[n] * time).exp()
                    };
                    kron[t] += kv * phase;
                    if wg[n] != 0.0 {
                        gauss[t] += gw * phase;
                    }
                }
            }
        }
    }
    let sums = kron
        .into_iter()
        .zip(gauss)
        .map(|(k, g)| (k, (k - g).norm()))
        .collect();
    Panel { a, b, sums }
}

/// Integrates `∫_a^b e^{iΩx} g(Ω) dΩ` for every `x` in `times`.
///
/// `breakpoints` mark known non-smooth points of `g`; they become panel edges.
/// Initial panels are capped at `min_panel_width_factor·π/max|Re x|` so each
/// panel resolves the oscillation.
pub fn integrate_family<G>(
    g: &G,
    times: &[Complex64],
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if !(b > a) {
        return Ok(vec![Estimate::zero(); times.len()]);
    }
    let max_re = times.iter().map(|t| t.re.abs()).fold(0.0, f64::max);
    let mut width_cap = (b - a) / 16.0;
    if max_re > 0.0 {
        width_cap = width_cap.min(spec.min_panel_width_factor * std::f64::consts::PI / max_re);
    }
    let mut edges: Vec<f64> = vec![a, b];
    edges.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));

    let mut intervals = Vec::new();
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / width_cap).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            let lo = w[0] + k as f64 * h;
            let hi = if k + 1 == n { w[1] } else { lo + h };
            intervals.push((lo, hi));
        }
    }
    if intervals.len() > spec.max_panels {
        return Err(Error::Convergence(format!(
            "initial partition needs {} panels, more than max_panels = {}",
            intervals.len(),
            spec.max_panels
        )));
    }

    let step = arithmetic_step(times);
    let mut panels: Vec<Panel> = intervals
        .par_iter()
        .map(|&(lo, hi)| evaluate_panel(g, lo, hi, times, step))
        .collect();

    loop {
        let mut totals = vec![Estimate::zero(); times.len()];
        for p in &panels {
            for (t, &(k, e)) in p.sums.iter().enumerate() {
                totals[t].value += k;
                totals[t].error += e;
            }
        }
        let tols: Vec<f64> = totals
            .iter()
            .map(|e| spec.tolerance(e.value.norm()))
            .collect();
        let failing: Vec<usize> = (0..times.len())
            .filter(|&t| totals[t].error > tols[t])
            .collect();
        if failing.is_empty() {
            return Ok(totals);
        }
        let n = panels.len() as f64;
        let mut split = Vec::new();
        for (idx, p) in panels.iter().enumerate() {
            let width_ok = (p.b - p.a) > 1e-13 * (1.0 + p.a.abs().max(p.b.abs()));
            if width_ok && failing.iter().any(|&t| p.sums[t].1 > tols[t] / n) {
                split.push(idx);
            }
        }
        if split.is_empty() || panels.len() + split.len() > spec.max_panels {
            let worst = failing
                .iter()
                .map(|&t| totals[t].error / tols[t])
                .fold(0.0, f64::max);
            return Err(Error::Convergence(format!(
                "{} of {} integrals above tolerance after {} panels (worst error/tol = {:.3e})",
                failing.len(),
                times.len(),
                panels.len(),
                worst
            )));
        }
        let halves: Vec<(f64, f64)> = split
            .iter()
            .flat_map(|&idx| {
                let p = &panels[idx];
                let m = 0.5 * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        let fresh: Vec<Panel> = halves
            .par_iter()
            .map(|&(lo, hi)| evaluate_panel(g, lo, hi, times, step))
            .collect();
        let mut keep: Vec<Panel> = Vec::with_capacity(panels.len() + split.len());
        let mut fresh_iter = fresh.into_iter();
        let mut s = 0;
        for (idx, p) in panels.into_iter().enumerate() {
            if s < split.len() && split[s] == idx {
                keep.push(fresh_iter.next().expect("left half"));
                keep.push(fresh_iter.next().expect("right half"));
                s += 1;
            } else {
                keep.push(p);
            }
        }
        panels = keep;
    }
}

struct VecPanel {
    a: f64,
    b: f64,
    sums: Vec<(Complex64, f64)>,
    worst: f64,
}

fn evaluate_vec_panel<G>(g: &G, len: usize, a: f64, b: f64) -> VecPanel
where
    G: Fn(f64) -> Vec<Complex64> + Sync,
{
    let (x, wk, wg) = panel_rule(a, b);
    let mut kron = vec![Complex64::new(0.0, 0.0); len];
    let mut gauss = vec![Complex64::new(0.0, 0.0); len];
    for n in 0..15 {
        let gv = g(x[n]);
        for c in 0..len {
            kron[c] += gv[c] * wk[n];
            if wg[n] != 0.0 {
                gauss[c] += gv[c] * wg[n];
            }
        }
    }
    let sums: Vec<(Complex64, f64)> = kron
        .into_iter()
        .zip(gauss)
        .map(|(k, g)| (k, (k - g).norm()))
        .collect();
    let worst = sums.iter().map(|s| s.1).fold(0.0, f64::max);
    VecPanel { a, b, sums, worst }
}

/// Adaptive integral of a vector-valued function `g: ℝ → ℂ^len` over `[a, b]`.
///
/// All components share one partition; the tolerance is taken relative to the
/// largest component.
pub fn integrate_vector<G>(
    g: &G,
    len: usize,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate>>
where
    G: Fn(f64) -> Vec<Complex64> + Sync,
{
    if len == 0 {
        return Ok(Vec::new());
    }
    if !(b > a) {
        return Ok(vec![Estimate::zero(); len]);
    }
    let mut edges: Vec<f64> = vec![a, b];
    edges.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));
    let cap = (b - a) / 16.0;
    let mut intervals = Vec::new();
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / cap).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            let lo = w[0] + k as f64 * h;
            intervals.push((lo, if k + 1 == n { w[1] } else { lo + h }));
        }
    }
    let mut panels: Vec<VecPanel> = intervals
        .par_iter()
        .map(|&(lo, hi)| evaluate_vec_panel(g, len, lo, hi))
        .collect();
    loop {
        let mut totals = vec![Estimate::zero(); len];
        for p in &panels {
            for (c, &(k, e)) in p.sums.iter().enumerate() {
                totals[c].value += k;
                totals[c].error += e;
            }
        }
        let scale = totals.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
        let tol = spec.tolerance(scale);
        let worst_total = totals.iter().map(|e| e.error).fold(0.0, f64::max);
        if worst_total <= tol {
            return Ok(totals);
        }
        let n = panels.len() as f64;
        let split: Vec<usize> = (0..panels.len())
            .filter(|&i| {
                let p = &panels[i];
                p.worst > tol / n && (p.b - p.a) > 1e-13 * (1.0 + p.a.abs().max(p.b.abs()))
            })
            .collect();
        if split.is_empty() || panels.len() + split.len() > spec.max_panels {
            return Err(Error::Convergence(format!(
                "vector integral error {worst_total:.3e} above tolerance {tol:.3e} after {} panels",
                panels.len()
            )));
        }
        let halves: Vec<(f64, f64)> = split
            .iter()
            .flat_map(|&i| {
                let m = 0.5 * (panels[i].a + panels[i].b);
                [(panels[i].a, m), (m, panels[i].b)]
            })
            .collect();
        let fresh: Vec<VecPanel> = halves
            .par_iter()
            .map(|&(lo, hi)| evaluate_vec_panel(g, len, lo, hi))
            .collect();
        let mut fresh = fresh.into_iter();
        let mut keep = Vec::with_capacity(panels.len() + split.len());
        let mut s = 0;
        for (i, p) in panels.into_iter().enumerate() {
            if s < split.len() && split[s] == i {
                keep.push(fresh.next().expect("left half"));
                keep.push(fresh.next().expect("right half"));
                s += 1;
            } else {
                keep.push(p);
            }
        }
        panels = keep;
    }
}

/// Adaptive integral of a single complex function over `[a, b]`.
pub fn integrate<G>(
    g: &G,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let zero = [Complex64::new(0.0, 0.0)];
    Ok(integrate_family(g, &zero, a, b, breakpoints, spec)?[0])
}

/// Adaptive integral of a real function over `[a, b]`, returned as (value, error).
pub fn integrate_real<G>(
    g: &G,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64)>
where
    G: Fn(f64) -> f64 + Sync,
{
    let e = integrate(&|x| Complex64::new(g(x), 0.0), a, b, breakpoints, spec)?;
    Ok((e.value.re, e.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let (_, wk, wg) = panel_rule(-1.0, 3.0);
        assert!((wk.iter().sum::<f64>() - 4.0).abs() < 1e-14);
        assert!((wg.iter().sum::<f64>() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_and_gaussian() {
        let spec = QuadratureSpec::default();
        let (v, _) = integrate_real(&|x: f64| x * x, 0.0, 3.0, &[], &spec).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let (v, e) = integrate_real(&|x: f64| (-x * x).exp(), -10.0, 10.0, &[], &spec).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!(e < 1e-9);
    }

    #[test]
    fn family_matches_closed_form_sine_transform() {
        // ∫_{-1}^{1} e^{iΩx} dΩ = 2 sin(x)/x
        let spec = QuadratureSpec::default();
        let times: Vec<Complex64> = (0..40)
            .map(|k| Complex64::new(0.5 * k as f64, 0.0))
            .collect();
        let res =
            integrate_family(&|_| Complex64::new(1.0, 0.0), &times, -1.0, 1.0, &[], &spec).unwrap();
        for (t, r) in times.iter().zip(res) {
            let exact = if t.re == 0.0 {
                2.0
            } else {
                2.0 * t.re.sin() / t.re
            };
            assert!((r.value.re - exact).abs() < 1e-12, "x = {}", t.re);
            assert!(r.value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn jump_is_resolved_with_breakpoint() {
        let spec = QuadratureSpec::default();
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let (v, _) = integrate_real(&step, 0.0, 1.0, &[0.3], &spec).unwrap();
        assert!((v - (0.3 + 1.4)).abs() < 1e-13);
    }

    #[test]
    fn panel_budget_exhaustion_is_reported() {
        let spec = QuadratureSpec {
            max_panels: 16,
            ..Default::default()
        };
        let r = integrate_real(&|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &[], &spec);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn vector_components_share_partition() {
        let spec = QuadratureSpec::default();
        let g = |x: f64| vec![Complex64::new(x, 0.0), Complex64::new(0.0, (-x * x).exp())];
        let r = integrate_vector(&g, 2, 0.0, 2.0, &[], &spec).unwrap();
        assert!((r[0].value.re - 2.0).abs() < 1e-13);
        let expect = 0.5 * std::f64::consts::PI.sqrt() * 0.995_322_265_018_952_7;
        assert!((r[1].value.im - expect).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            max_panels: 3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
