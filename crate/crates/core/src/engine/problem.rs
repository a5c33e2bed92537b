//! Shared setup for the two-time correlator `⟨A(t+τ) O(t)⟩`.
//!
//! `A` is expanded over the Krylov bases of its Bohr components. For each
//! basis vector `B_i` the correlator obeys `dy_i/dτ = Σ_k m_ki y_k + c_i(τ)`
//! with `y_i = ⟨B_i(t+τ) O(t)⟩`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::bohr::{bohr_decompose, BohrComponent, CMatrix};
use super::generator::{build_adjoint_generator, AdjointGenerator};
use super::ops::{commutator, trace_product};
use super::sector::{CVector, Sector};
use super::{SystemSpec, TimePoint, GROUPING_TOL};
use crate::error::{Error, Result};
use crate::mathkit::{
    fourier_family, integrate_real, integrate_vector, truncated_window, weighted_complement,
    weighted_occupation, Estimate, QuadratureSpec, Statistics,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    /// Bath weight `F(Ω)`, commutators `[B, S_m][S_n†, O_l]`.
    C1,
    /// Bath weight `J(Ω)(1 + n(Ω))`, commutators `[B, S_m†][S_n, O_l]`.
    C2,
}

pub(crate) struct Channel {
    pub kind: Kind,
    pub a: usize,
    pub o: usize,
    /// `ν_A = alpha_a + s_a Ω`, `ν_O = alpha_o − s_a Ω`.
    alpha_a: f64,
    alpha_o: f64,
    s_a: f64,
    /// Frequency of the `e^{−i shift τ}` prefactor of the forcing.
    pub shift: f64,
    /// `e^{−i (total) t}`; one at `t = ∞`.
    phase: Complex64,
    t_mat: CMatrix,
}

impl Channel {
    fn nu_a(&self, x: f64) -> f64 {
        self.alpha_a + self.s_a * x
    }

    fn nu_o(&self, x: f64) -> f64 {
        self.alpha_o - self.s_a * x
    }

    /// Sign of Ω in the forcing exponential `e^{±iΩτ}`.
    pub fn fourier_sign(&self) -> f64 {
        -self.s_a
    }
}

pub(crate) struct Problem<'a> {
    pub spec: &'a SystemSpec,
    pub a: Expansion,
    pub o_secs: Vec<Sector>,
    pub total: usize,
    pub channels: Vec<Channel>,
    pub rho: CMatrix,
    pub t: Option<f64>,
    a_props: Vec<Option<CMatrix>>,
    o_props: Vec<Option<CMatrix>>,
    breaks: Vec<f64>,
}

fn sectors(gen: &AdjointGenerator, comps: &[BohrComponent]) -> Result<Vec<Sector>> {
    let mut out = Vec::new();
    for c in comps {
        if let Some(s) = Sector::build(gen, &c.op, c.omega)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// `T[k, k'] = Tr[ρ [B_k, X][Y, D_k']]`.
fn coupling_matrix(rho: &CMatrix, a: &Sector, x: &CMatrix, y: &CMatrix, o: &Sector) -> CMatrix {
    let left: Vec<CMatrix> = a.basis.iter().map(|b| rho * commutator(b, x)).collect();
    let right: Vec<CMatrix> = o.basis.iter().map(|d| commutator(y, d)).collect();
    CMatrix::from_fn(left.len(), right.len(), |k, kp| {
        trace_product(&left[k], &right[kp])
    })
}

impl<'a> Problem<'a> {
    pub fn new(spec: &'a SystemSpec, a: &CMatrix, o: &CMatrix, time: &TimePoint) -> Result<Self> {
        spec.validate()?;
        time.validate(spec.dim)?;
        if a.shape() != (spec.dim, spec.dim) || o.shape() != (spec.dim, spec.dim) {
            return Err(Error::Config(
                "correlator operators have the wrong shape".into(),
            ));
        }
        let gen = build_adjoint_generator(spec)?;
        let a_secs = sectors(
            &gen,
            &bohr_decompose(&spec.h_s, a, GROUPING_TOL)?.components,
        )?;
        let o_secs = sectors(
            &gen,
            &bohr_decompose(&spec.h_s, o, GROUPING_TOL)?.components,
        )?;
        let s_comps = bohr_decompose(&spec.h_s, &spec.s, GROUPING_TOL)?.components;
        let active = !spec.j.is_zero();
        let (rho, t) = match time {
            TimePoint::Infinity => {
                for s in &a_secs {
                    s.require_dissipative("the left operator")?;
                }
                (spec.gibbs_state(), None)
            }
            TimePoint::Finite { t, rho0 } => (rho0.clone(), Some(*t)),
        };
        if active {
            for s in &o_secs {
                s.require_dissipative("the right operator")?;
            }
        }
        let a_props = a_secs.iter().map(|s| t.map(|t| s.propagator(t))).collect();
        let o_props = o_secs.iter().map(|s| t.map(|t| s.propagator(t))).collect();

        let ftol = 1e-8 * spec.frequency_scale();
        let mut channels = Vec::new();
        let mut breaks = spec.j.breakpoints();
        if active {
            for (ia, sa) in a_secs.iter().enumerate() {
                for sm in &s_comps {
                    for (io, so) in o_secs.iter().enumerate() {
                        for sn in &s_comps {
                            for kind in [Kind::C1, Kind::C2] {
                                let (x, y, alpha_a, alpha_o, s_a, total_freq) = match kind {
                                    Kind::C1 => (
                                        sm.op.clone(),
                                        sn.op.adjoint(),
                                        sa.omega + sm.omega,
                                        so.omega - sn.omega,
                                        -1.0,
                                        sa.omega + sm.omega + so.omega - sn.omega,
                                    ),
                                    Kind::C2 => (
                                        sm.op.adjoint(),
                                        sn.op.clone(),
                                        sa.omega - sm.omega,
                                        so.omega + sn.omega,
                                        1.0,
                                        sa.omega - sm.omega + so.omega + sn.omega,
                                    ),
                                };
                                let phase = match t {
                                    None if total_freq.abs() > ftol => continue,
                                    None => Complex64::new(1.0, 0.0),
                                    Some(t) => Complex64::from_polar(1.0, -total_freq * t),
                                };
                                let t_mat = coupling_matrix(&rho, sa, &x, &y, so);
                                if t_mat.norm() == 0.0 {
                                    continue;
                                }
                                // Resonances where ν + Im λ = 0 for an eigenvalue λ.
                                for l in so.eigenvalues() {
                                    breaks.push((-l.im - alpha_o) / (-s_a));
                                }
                                for l in sa.eigenvalues() {
                                    breaks.push((-l.im - alpha_a) / s_a);
                                }
                                channels.push(Channel {
                                    kind,
                                    a: ia,
                                    o: io,
                                    alpha_a,
                                    alpha_o,
                                    s_a,
                                    shift: alpha_a,
                                    phase,
                                    t_mat,
                                });
                            }
                        }
                    }
                }
            }
        }
        breaks.retain(|b| b.is_finite());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + x.abs()));
        let a = Expansion::new(a_secs);
        let total = a.total;
        Ok(Problem {
            spec,
            a,
            o_secs,
            total,
            channels,
            rho,
            t,
            a_props,
            o_props,
            breaks,
        })
    }

    fn weight(&self, kind: Kind, x: f64) -> f64 {
        let r = match kind {
            Kind::C1 => weighted_occupation(&self.spec.j, x, self.spec.beta, Statistics::Boson),
            Kind::C2 => weighted_complement(&self.spec.j, x, self.spec.beta, Statistics::Boson),
        };
        r.unwrap_or(f64::NAN)
    }

    /// `u(Ω) = T · (τ′₂-integrated O_l)` for one channel.
    fn u(&self, ch: &Channel, x: f64) -> CVector {
        let so = &self.o_secs[ch.o];
        let r = so.window_apply(ch.nu_o(x), 0.0, None, &so.seed);
        &ch.t_mat * r
    }

    fn equal_time_integrand(&self, x: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.total];
        for ch in &self.channels {
            let w = self.weight(ch.kind, x);
            if w == 0.0 {
                continue;
            }
            let so = &self.o_secs[ch.o];
            let sa = &self.a.secs[ch.a];
            let t = self.t.unwrap_or(0.0);
            let r = so.window_apply(ch.nu_o(x), t, self.o_props[ch.o].as_ref(), &so.seed);
            let v = &ch.t_mat * r;
            let e = sa.window_apply_transpose(ch.nu_a(x), t, self.a_props[ch.a].as_ref(), &v);
            let scale = ch.phase * w;
            let off = self.a.offsets[ch.a];
            for (k, val) in e.iter().enumerate() {
                out[off + k] += val * scale;
            }
        }
        out
    }

    /// `y_i(τ = 0)`: the product term at finite `t` plus the irreducible part.
    pub fn equal_time(&self) -> Result<(CVector, f64)> {
        let mut y = CVector::zeros(self.total);
        if self.t.is_some() {
            let o_t = self.o_secs.iter().zip(&self.o_props).fold(
                CMatrix::zeros(self.spec.dim, self.spec.dim),
                |acc, (s, p)| {
                    let e = p.as_ref().expect("finite t");
                    acc + s.operator(&(e * &s.seed))
                },
            );
            let ro = &o_t * &self.rho;
            for ((s, p), off) in self.a.secs.iter().zip(&self.a_props).zip(&self.a.offsets) {
                let e = p.as_ref().expect("finite t");
                let g =
                    CVector::from_iterator(s.dim(), s.basis.iter().map(|b| trace_product(b, &ro)));
                y.rows_mut(*off, s.dim()).copy_from(&(e.transpose() * g));
            }
        }
        if self.channels.is_empty() {
            return Ok((y, 0.0));
        }
        let g = |x: f64| self.equal_time_integrand(x);
        let (a, b) = truncated_window(
            &|x: f64| g(x).iter().map(|v| v.norm()).fold(0.0, f64::max),
            self.spec.j.support(),
            &self.spec.quad,
        )?;
        let est = integrate_vector(&g, self.total, a, b, &self.breaks, &self.spec.quad)?;
        let mut err = 0.0;
        for (k, e) in est.iter().enumerate() {
            if !(e.value.re.is_finite() && e.value.im.is_finite()) {
                return Err(Error::Domain("equal-time integrand is not finite".into()));
            }
            y[k] += e.value / TWO_PI;
            err += e.error / TWO_PI;
        }
        Ok((y, err))
    }

    /// Forcing `c_i(τ)` at every time in `taus`, split by channel kind.
    /// Returns `(c1, c2)` with one vector of length `total` per time.
    pub fn forcing(&self, taus: &[f64]) -> Result<(Vec<CVector>, Vec<CVector>)> {
        let zero = || vec![CVector::zeros(self.total); taus.len()];
        let (mut c1, mut c2) = (zero(), zero());
        let jobs: Vec<(usize, usize)> = self
            .channels
            .iter()
            .enumerate()
            .flat_map(|(c, ch)| {
                (0..ch.t_mat.nrows())
                    .filter(move |&i| ch.t_mat.row(i).norm() > 0.0)
                    .map(move |i| (c, i))
            })
            .collect();
        let results: Vec<Result<Vec<Estimate>>> = jobs
            .par_iter()
            .map(|&(c, i)| self.forcing_component(&self.channels[c], i, taus))
            .collect();
        for (&(c, i), res) in jobs.iter().zip(results) {
            let ch = &self.channels[c];
            let est = res?;
            let target = if ch.kind == Kind::C1 {
                &mut c1
            } else {
                &mut c2
            };
            let row = self.a.offsets[ch.a] + i;
            for (k, (&tau, e)) in taus.iter().zip(est).enumerate() {
                target[k][row] += e.value * ch.phase * Complex64::from_polar(1.0, -ch.shift * tau);
            }
        }
        Ok((c1, c2))
    }

    fn forcing_component(&self, ch: &Channel, i: usize, taus: &[f64]) -> Result<Vec<Estimate>> {
        let g = |x: f64| {
            let w = self.weight(ch.kind, x);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            self.u(ch, x)[i] * w
        };
        let (a, b) = truncated_window(
            &|x: f64| g(x).norm(),
            self.spec.j.support(),
            &self.spec.quad,
        )?;
        let (l1, _) = integrate_real(&|x: f64| g(x).norm(), a, b, &self.breaks, &self.spec.quad)?;
        let quad = QuadratureSpec {
            abs_tol: self
                .spec
                .quad
                .abs_tol
                .max(self.spec.quad.rel_tol * l1 / TWO_PI),
            ..self.spec.quad.clone()
        };
        let times: Vec<Complex64> = taus
            .iter()
            .map(|&t| Complex64::new(ch.fourier_sign() * t, 0.0))
            .collect();
        let out = fourier_family(&g, &times, (a, b), &self.breaks, &quad)?;
        if out
            .iter()
            .any(|e| !(e.value.re.is_finite() && e.value.im.is_finite()))
        {
            return Err(Error::Domain("forcing integrand is not finite".into()));
        }
        Ok(out)
    }
}

/// Krylov bases of all Bohr components of `A`, concatenated.
pub(crate) struct Expansion {
    pub secs: Vec<Sector>,
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl Expansion {
    pub fn new(secs: Vec<Sector>) -> Self {
        let mut offsets = Vec::with_capacity(secs.len());
        let mut total = 0;
        for s in &secs {
            offsets.push(total);
            total += s.dim();
        }
        Expansion {
            secs,
            offsets,
            total,
        }
    }

    /// Decomposes `a` and builds a sector per component without any
    /// dissipativity requirement.
    pub fn of(gen: &AdjointGenerator, h_s: &CMatrix, a: &CMatrix) -> Result<Self> {
        Ok(Expansion::new(sectors(
            gen,
            &bohr_decompose(h_s, a, GROUPING_TOL)?.components,
        )?))
    }

    /// Coefficients of `A` itself.
    pub fn seed(&self) -> CVector {
        let mut v = CVector::zeros(self.total);
        for (s, off) in self.secs.iter().zip(&self.offsets) {
            v.rows_mut(*off, s.dim()).copy_from(&s.seed);
        }
        v
    }

    /// Block-diagonal `mᵀ`.
    pub fn drift(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.total, self.total);
        for (s, off) in self.secs.iter().zip(&self.offsets) {
            m.view_mut((*off, *off), (s.dim(), s.dim()))
                .copy_from(&s.m.transpose());
        }
        m
    }

    /// `Σ_i y_i B_i†`, so that `Tr[E X] = Σ_i y_i ⟨B_i, X⟩`.
    pub fn operator_from(&self, y: &CVector) -> CMatrix {
        let d = self.secs.first().map_or(0, |s| s.basis[0].nrows());
        let mut e = CMatrix::zeros(d, d);
        for (s, off) in self.secs.iter().zip(&self.offsets) {
            for (k, b) in s.basis.iter().enumerate() {
                e += b.adjoint() * y[off + k];
            }
        }
        e
    }

    /// `y_i = Tr[E B_i]`.
    pub fn coefficients_from(&self, e: &CMatrix) -> CVector {
        let mut y = CVector::zeros(self.total);
        for (s, off) in self.secs.iter().zip(&self.offsets) {
            for (k, b) in s.basis.iter().enumerate() {
                y[off + k] = trace_product(e, b);
            }
        }
        y
    }

    /// `Σ_s seed_sᵀ e^{m_sᵀ τ} y_s` at every τ.
    pub fn propagate(&self, y0: &CVector, taus: &[f64]) -> Vec<Complex64> {
        taus.iter()
            .map(|&tau| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, off) in self.secs.iter().zip(&self.offsets) {
                    let ys = y0.rows(*off, s.dim());
                    acc += (ys.transpose() * s.propagator(tau) * &s.seed)[(0, 0)];
                }
                acc
            })
            .collect()
    }
}
