use nalgebra::DVector;
use num_complex::Complex64;

use super::bohr::CMatrix;
use super::generator::AdjointGenerator;
use super::ops::inner;
use crate::error::{Error, Result};

pub(crate) type CVector = DVector<Complex64>;

const KRYLOV_TOL: f64 = 1e-10;

/// Invariant Krylov subspace of `𝓛†` generated by one Bohr component.
///
/// `basis` is Frobenius-orthonormal; `m[(k, i)] = ⟨B_k, 𝓛† B_i⟩`, so
/// `𝓛† B_i = Σ_k m[(k, i)] B_k`. The Schur form `m = Z U Z†` gives
/// shifted solves in `O(K²)`.
#[derive(Debug, Clone)]
pub(crate) struct Sector {
    pub omega: f64,
    pub basis: Vec<CMatrix>,
    pub m: CMatrix,
    pub seed: CVector,
    z: CMatrix,
    u: CMatrix,
}

impl Sector {
    pub fn build(gen: &AdjointGenerator, seed_op: &CMatrix, omega: f64) -> Result<Option<Sector>> {
        let norm0 = seed_op.norm();
        if norm0 == 0.0 {
            return Ok(None);
        }
        let mut basis: Vec<CMatrix> = vec![seed_op / Complex64::new(norm0, 0.0)];
        let max_dim = gen.dim * gen.dim;
        let mut k = 0;
        while k < basis.len() && basis.len() < max_dim {
            let mut w = gen.apply(&basis[k]);
            let scale = w.norm();
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &w);
                    w -= b * c;
                }
            }
            let r = w.norm();
            if r > KRYLOV_TOL * scale.max(1e-300) && r > 1e-14 {
                basis.push(w / Complex64::new(r, 0.0));
            }
            k += 1;
        }
        let n = basis.len();
        let images: Vec<CMatrix> = basis.iter().map(|b| gen.apply(b)).collect();
        let m = CMatrix::from_fn(n, n, |r, c| inner(&basis[r], &images[c]));
        let mut seed = CVector::zeros(n);
        seed[0] = Complex64::new(norm0, 0.0);
        let (z, u) = m.clone().schur().unpack();
        Ok(Some(Sector {
            omega,
            basis,
            m,
            seed,
            z,
            u,
        }))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.u[(k, k)]).collect()
    }

    /// Largest real part among the eigenvalues of `m`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn require_dissipative(&self, what: &str) -> Result<()> {
        let scale = self
            .eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(1.0, f64::max);
        if self.spectral_abscissa() >= -1e-10 * scale {
            return Err(Error::UnsupportedCorrelator(format!(
                "{what} overlaps a non-decaying sector (Bohr frequency {}); its resolvent is singular",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn operator(&self, coeffs: &CVector) -> CMatrix {
        let d = self.basis[0].nrows();
        self.basis
            .iter()
            .zip(coeffs.iter())
            .fold(CMatrix::zeros(d, d), |acc, (b, c)| acc + b * *c)
    }

    /// Coefficients `⟨B_k, X⟩`.
    #[cfg(test)]
    pub fn coefficients(&self, x: &CMatrix) -> CVector {
        CVector::from_iterator(self.dim(), self.basis.iter().map(|b| inner(b, x)))
    }

    pub fn propagator(&self, t: f64) -> CMatrix {
        (&self.m * Complex64::new(t, 0.0)).exp()
    }

    /// `(m + iν)^{-1} v`.
    pub fn solve(&self, nu: f64, v: &CVector) -> CVector {
        let shift = Complex64::new(0.0, nu);
        let mut x = self.z.adjoint() * v;
        let n = self.dim();
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.u[(r, c)] * x[c];
            }
            x[r] = s / (self.u[(r, r)] + shift);
        }
        &self.z * x
    }

    /// `(m + iν)^{-T} v`.
    pub fn solve_transpose(&self, nu: f64, v: &CVector) -> CVector {
        let shift = Complex64::new(0.0, nu);
        let mut x = self.z.transpose() * v;
        let n = self.dim();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.u[(c, r)] * x[c];
            }
            x[r] = s / (self.u[(r, r)] + shift);
        }
        self.z.map(|c| c.conj()) * x
    }

    /// `∫_0^t e^{(m+iν)s} ds · v`, or the half-line limit `−(m+iν)^{-1} v`
    /// when `prop` is `None`. `prop` is `e^{mt}`.
    pub fn window_apply(&self, nu: f64, t: f64, prop: Option<&CMatrix>, v: &CVector) -> CVector {
        match prop {
            None => -self.solve(nu, v),
            Some(e) => {
                let w = e * v * Complex64::from_polar(1.0, nu * t) - v;
                self.solve(nu, &w)
            }
        }
    }

    /// Transpose of [`Sector::window_apply`] applied to `v`.
    pub fn window_apply_transpose(
        &self,
        nu: f64,
        t: f64,
        prop: Option<&CMatrix>,
        v: &CVector,
    ) -> CVector {
        let y = self.solve_transpose(nu, v);
        match prop {
            None => -y,
            Some(e) => e.transpose() * &y * Complex64::from_polar(1.0, nu * t) - y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generator::build_adjoint_generator;
    use crate::engine::{ops, SystemSpec};
    use crate::mathkit::{QuadratureSpec, SpectralDensity};

    fn boson_sector() -> (AdjointGenerator, Sector) {
        let j = SpectralDensity::rational_quartic(0.1);
        let spec = SystemSpec::truncated_boson(1.0, 2.0, j, QuadratureSpec::default(), 6).unwrap();
        let gen = build_adjoint_generator(&spec).unwrap();
        let s = Sector::build(&gen, &ops::creation(6), -1.0)
            .unwrap()
            .unwrap();
        (gen, s)
    }

    #[test]
    fn basis_is_invariant_and_orthonormal() {
        let (gen, s) = boson_sector();
        assert!(s.dim() > 1 && s.dim() <= 5);
        for (i, b) in s.basis.iter().enumerate() {
            for (k, c) in s.basis.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((inner(c, b) - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
            let image = gen.apply(b);
            let rebuilt = s.operator(&s.coefficients(&image));
            assert!((image - rebuilt).norm() < 1e-10);
        }
        assert!(s.spectral_abscissa() < 0.0);
    }

    #[test]
    fn shifted_solves_match_dense() {
        let (_, s) = boson_sector();
        let v = CVector::from_fn(s.dim(), |k, _| {
            Complex64::new(1.0 + k as f64, -0.5 * k as f64)
        });
        let nu = 0.37;
        let a = &s.m + CMatrix::identity(s.dim(), s.dim()) * Complex64::new(0.0, nu);
        let x = s.solve(nu, &v);
        assert!((&a * &x - &v).norm() < 1e-11);
        let y = s.solve_transpose(nu, &v);
        assert!((a.transpose() * &y - &v).norm() < 1e-11);
    }

    #[test]
    fn finite_window_tends_to_half_line() {
        let (_, s) = boson_sector();
        let v = s.seed.clone();
        let t = 4000.0;
        let e = s.propagator(t);
        let fin = s.window_apply(0.2, t, Some(&e), &v);
        let inf = s.window_apply(0.2, t, None, &v);
        assert!((fin - inf).norm() < 1e-8);
        let fin_t = s.window_apply_transpose(0.2, 1.5, Some(&s.propagator(1.5)), &v);
        let direct = {
            let q = (0..s.dim())
                .map(|k| {
                    let mut ek = CVector::zeros(s.dim());
                    ek[k] = Complex64::new(1.0, 0.0);
                    s.window_apply(0.2, 1.5, Some(&s.propagator(1.5)), &ek)
                })
                .collect::<Vec<_>>();
            CVector::from_fn(s.dim(), |i, _| (0..s.dim()).map(|k| q[i][k] * v[k]).sum())
        };
        assert!((fin_t - direct).norm() < 1e-11);
    }
}
