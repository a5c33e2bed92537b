//! Exact reference for the quadratic model: the bath is replaced by `N`
//! discrete modes and the single-particle problem is diagonalized once.

mod dense;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{integrate_real, occupation, QuadratureSpec, SpectralDensity, Statistics};
use crate::models::{CorrelatorKind, ThreePointOrdering};

pub use dense::{
    dense_ed_reference, EdQuery, MAX_BOSON_MODES, MAX_BOSON_TRUNCATION, MAX_FERMION_MODES,
};

/// Allowed fraction of the spectral weight outside the discretization window.
pub const WINDOW_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedBath {
    pub n: usize,
    pub omegas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub window: (f64, f64),
}

impl DiscretizedBath {
    pub fn spacing(&self) -> f64 {
        (self.window.1 - self.window.0) / self.n as f64
    }

    /// `2π/ΔΩ`, after which the discrete bath revives.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }
}

/// Midpoint grid on `window` with `α_k² = J(Ω_k) ΔΩ / 2π`.
pub fn discretize(j: &SpectralDensity, n: usize, window: (f64, f64)) -> Result<DiscretizedBath> {
    j.validate()?;
    let (lo, hi) = window;
    if n == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(
            "discretization needs N ≥ 1 and a finite window lo < hi".into(),
        ));
    }
    check_window_mass(j, window)?;
    let d = (hi - lo) / n as f64;
    let omegas: Vec<f64> = (0..n).map(|k| lo + (k as f64 + 0.5) * d).collect();
    let alphas = omegas
        .iter()
        .map(|&w| (j.eval(w) * d / (2.0 * PI)).sqrt())
        .collect();
    Ok(DiscretizedBath {
        n,
        omegas,
        alphas,
        window,
    })
}

fn check_window_mass(j: &SpectralDensity, window: (f64, f64)) -> Result<()> {
    if j.is_zero() {
        return Ok(());
    }
    let (s0, s1) = j.support();
    let reach = 1e3 * window.0.abs().max(window.1.abs()).max(1.0);
    let spec = QuadratureSpec::default().with_tolerances(1e-8, 1e-14);
    let mass = |a: f64, b: f64| -> Result<f64> {
        if b > a {
            integrate_real(&|x| j.eval(x), a, b, &j.breakpoints(), &spec).map(|r| r.0)
        } else {
            Ok(0.0)
        }
    };
    let (a, b) = (s0.max(-reach), s1.min(reach));
    let total = mass(a, b)?;
    let inside = mass(a.max(window.0), b.min(window.1))?;
    let outside = (total - inside).max(0.0);
    if total > 0.0 && outside > WINDOW_MASS_TOL * total {
        return Err(Error::Window(format!(
            "{:.3e} of the spectral weight lies outside [{}, {}]",
            outside / total,
            window.0,
            window.1
        )));
    }
    Ok(())
}

/// System mode 0 coupled to the discrete bath modes `1..=N`.
#[derive(Debug, Clone)]
pub struct OracleSystem {
    pub h: DMatrix<f64>,
    pub stats: Statistics,
    pub beta: f64,
    pub n0: f64,
    pub occupations: Vec<f64>,
    pub bath: DiscretizedBath,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    guard: bool,
}

impl OracleSystem {
    pub fn new(
        omega0: f64,
        bath: DiscretizedBath,
        stats: Statistics,
        beta: f64,
        n0: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        let valid_n0 = match stats {
            Statistics::Fermion => (0.0..=1.0).contains(&n0),
            Statistics::Boson => n0 >= 0.0 && n0.is_finite(),
        };
        if !valid_n0 {
            return Err(Error::Domain(format!(
                "initial occupation {n0} is not valid for {stats:?}"
            )));
        }
        let m = bath.n + 1;
        let mut h = DMatrix::zeros(m, m);
        h[(0, 0)] = omega0;
        let mut occupations = vec![n0];
        for (k, (&w, &a)) in bath.omegas.iter().zip(&bath.alphas).enumerate() {
            h[(k + 1, k + 1)] = w;
            h[(0, k + 1)] = a;
            h[(k + 1, 0)] = a;
            if stats == Statistics::Boson && w <= 0.0 && a > 0.0 {
                return Err(Error::Domain(
                    "bosonic modes need Ω_k > 0; restrict J to positive frequencies".into(),
                ));
            }
            occupations.push(if a > 0.0 || stats == Statistics::Fermion || w > 0.0 {
                occupation(w, beta, stats)?
            } else {
                0.0
            });
        }
        let eig = h.clone().symmetric_eigen();
        Ok(OracleSystem {
            h,
            stats,
            beta,
            n0,
            occupations,
            bath,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            guard: true,
        })
    }

    /// Discretizes `j` on `window` and builds the system in one step.
    pub fn from_density(
        omega0: f64,
        j: &SpectralDensity,
        n: usize,
        window: (f64, f64),
        stats: Statistics,
        beta: f64,
        n0: f64,
    ) -> Result<Self> {
        OracleSystem::new(omega0, discretize(j, n, window)?, stats, beta, n0)
    }

    pub fn modes(&self) -> usize {
        self.h.nrows()
    }

    /// Row 0 of `U(t) = e^{−iht}`, so that `a₀(t) = Σ_j U₀ⱼ(t) a_j`.
    pub fn propagator_row(&self, t: f64) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        (0..self.modes())
            .map(|j| {
                (0..self.modes())
                    .map(|q| phases[q] * (v[(0, q)] * v[(j, q)]))
                    .sum()
            })
            .collect()
    }

    /// Disables the recurrence check, for comparisons between two exact treatments of the same finite bath.
    pub fn without_recurrence_guard(mut self) -> Self {
        self.guard = false;
        self
    }

    pub fn check_recurrence(&self, latest: f64) -> Result<()> {
        let limit = 0.5 * self.bath.recurrence_time();
        if self.guard && self.bath.n > 0 && latest >= limit {
            return Err(Error::Recurrence(format!(
                "time {latest} reaches half the recurrence time {limit:.3}; increase N"
            )));
        }
        Ok(())
    }

    /// `⟨a†(s) a(u)⟩`.
    fn lesser(&self, us: &[Complex64], uu: &[Complex64]) -> Complex64 {
        us.iter()
            .zip(uu)
            .zip(&self.occupations)
            .map(|((a, b), n)| a.conj() * b * *n)
            .sum()
    }

    /// `⟨a(s) a†(u)⟩`.
    fn greater(&self, us: &[Complex64], uu: &[Complex64]) -> Complex64 {
        let eta = self.stats.eta();
        us.iter()
            .zip(uu)
            .zip(&self.occupations)
            .map(|((a, b), n)| a * b.conj() * (1.0 - eta * n))
            .sum()
    }

    fn times_ok(&self, times: &[f64]) -> Result<()> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("times must be finite".into()));
        }
        if times.iter().any(|&t| t < 0.0) {
            return Err(Error::Domain("absolute times must be nonnegative".into()));
        }
        self.check_recurrence(times.iter().copied().fold(0.0, f64::max))
    }
}

/// `⟨a†(t+τ) a(t)⟩` or `⟨a(t) a†(t+τ)⟩`.
pub fn two_point_exact(
    sys: &OracleSystem,
    t: f64,
    tau: f64,
    kind: CorrelatorKind,
) -> Result<Complex64> {
    sys.times_ok(&[t, t + tau])?;
    let (u1, u0) = (sys.propagator_row(t + tau), sys.propagator_row(t));
    match kind {
        CorrelatorKind::ADagA => Ok(sys.lesser(&u1, &u0)),
        CorrelatorKind::AADag => Ok(sys.greater(&u0, &u1)),
        other => Err(Error::Config(format!(
            "{other:?} is not a two-point kind of the oracle"
        ))),
    }
}

/// `⟨N(t+τ) N(t)⟩` by Wick's theorem.
pub fn nn_exact(sys: &OracleSystem, t: f64, tau: f64) -> Result<Complex64> {
    sys.times_ok(&[t, t + tau])?;
    let (us, ut) = (sys.propagator_row(t + tau), sys.propagator_row(t));
    Ok(sys.lesser(&us, &us) * sys.lesser(&ut, &ut) + sys.lesser(&us, &ut) * sys.greater(&us, &ut))
}

/// `⟨a†(t+τ₁+τ₂) a(t+τ₂) N(t)⟩` or `⟨N(t) a†(t+τ₁+τ₂) a(t+τ₂)⟩` by Wick's theorem.
pub fn three_point_exact(
    sys: &OracleSystem,
    t: f64,
    tau1: f64,
    tau2: f64,
    ordering: ThreePointOrdering,
) -> Result<Complex64> {
    let (s1, s2) = (t + tau1 + tau2, t + tau2);
    sys.times_ok(&[t, s1, s2])?;
    let (u1, u2, ut) = (
        sys.propagator_row(s1),
        sys.propagator_row(s2),
        sys.propagator_row(t),
    );
    Ok(match ordering {
        ThreePointOrdering::NRight => {
            sys.lesser(&u1, &u2) * sys.lesser(&ut, &ut)
                + sys.lesser(&u1, &ut) * sys.greater(&u2, &ut)
        }
        ThreePointOrdering::NLeft => {
            sys.lesser(&ut, &ut) * sys.lesser(&u1, &u2)
                + sys.lesser(&ut, &u2) * sys.greater(&ut, &u1)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_fermion(n: usize) -> OracleSystem {
        OracleSystem::from_density(
            1.0,
            &SpectralDensity::flat(0.2, 5.0),
            n,
            (-5.0, 5.0),
            Statistics::Fermion,
            2.0,
            0.3,
        )
        .unwrap()
    }

    #[test]
    fn flat_couplings_are_uniform() {
        let b = discretize(&SpectralDensity::flat(0.2, 5.0), 100, (-5.0, 5.0)).unwrap();
        let expect = 0.2 * 0.1 / (2.0 * PI);
        assert!(b.alphas.iter().all(|a| (a * a - expect).abs() < 1e-15));
        let b2 = discretize(&SpectralDensity::flat(0.2, 5.0), 200, (-5.0, 5.0)).unwrap();
        assert!((b2.alphas[0].powi(2) * 2.0 - b.alphas[0].powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mass_outside_window_is_rejected() {
        let e =
            discretize(&SpectralDensity::rational_quartic(0.1), 100, (-40.0, 40.0)).unwrap_err();
        assert!(matches!(e, Error::Window(_)));
    }

    #[test]
    fn equal_time_values() {
        let s = flat_fermion(200);
        let v = two_point_exact(&s, 0.0, 0.0, CorrelatorKind::ADagA).unwrap();
        assert!((v - Complex64::new(0.3, 0.0)).norm() < 1e-12);
        for t in [0.0, 1.0, 7.5] {
            let a = two_point_exact(&s, t, 0.0, CorrelatorKind::ADagA).unwrap();
            let b = two_point_exact(&s, t, 0.0, CorrelatorKind::AADag).unwrap();
            assert!((a + b - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let n = nn_exact(&s, 0.0, 0.0).unwrap();
        assert!((n - Complex64::new(0.3, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn propagator_rows_are_unit() {
        let s = flat_fermion(150);
        for t in [0.0, 0.4, 11.0] {
            let norm: f64 = s.propagator_row(t).iter().map(|u| u.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn recurrence_guard() {
        let s = flat_fermion(100);
        let limit = 0.5 * s.bath.recurrence_time();
        assert!(matches!(
            two_point_exact(&s, limit, 0.1, CorrelatorKind::ADagA),
            Err(Error::Recurrence(_))
        ));
    }

    #[test]
    fn bosons_reject_negative_modes() {
        let r = OracleSystem::from_density(
            1.0,
            &SpectralDensity::flat(0.1, 2.0),
            20,
            (-2.0, 2.0),
            Statistics::Boson,
            1.0,
            0.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn three_point_at_zero_delays() {
        let s = flat_fermion(120);
        let r = three_point_exact(&s, 2.0, 0.0, 0.0, ThreePointOrdering::NRight).unwrap();
        let n = nn_exact(&s, 2.0, 0.0).unwrap();
        assert!((r - n).norm() < 1e-12);
    }
}
