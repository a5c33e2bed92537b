use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// One Bohr component `X_ω` of an operator.
#[derive(Debug, Clone)]
pub struct BohrComponent {
    pub omega: f64,
    pub op: CMatrix,
}

/// `e^{−iHt} X e^{iHt} = Σ_ω e^{iωt} X_ω`, with `ω = E′ − E` for the
/// `|E⟩⟨E′|` block.
#[derive(Debug, Clone)]
pub struct BohrDecomposition {
    pub components: Vec<BohrComponent>,
    /// Set when eigenvalue gaps approach the grouping tolerance.
    pub warnings: Vec<String>,
}

impl BohrDecomposition {
    pub fn reconstruct(&self, dim: usize) -> CMatrix {
        self.components
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, c| acc + &c.op)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.omega).collect()
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub(crate) fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub(crate) fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::Config("Hamiltonian must be square".into()));
    }
    let scale = h.norm().max(1.0);
    if (h - h.adjoint()).norm() > 1e-12 * scale {
        return Err(Error::Config("Hamiltonian is not Hermitian".into()));
    }
    Ok(())
}

/// Splits `x` into Bohr components of `h`. Frequencies closer than
/// `grouping_tol × (spectral span)` are merged.
pub fn bohr_decompose(h: &CMatrix, x: &CMatrix, grouping_tol: f64) -> Result<BohrDecomposition> {
    check_hermitian(h)?;
    if x.shape() != h.shape() {
        return Err(Error::Config(
            "operator and Hamiltonian dimensions differ".into(),
        ));
    }
    let (e, v) = hermitian_eigen(h);
    let n = e.len();
    let span = (e[n - 1] - e[0]).abs().max(1e-300);
    let tol = grouping_tol * span.max(1.0);
    let mut warnings = Vec::new();
    for w in e.windows(2) {
        let gap = w[1] - w[0];
        if gap > tol && gap < 10.0 * tol {
            warnings.push(format!(
                "eigenvalue gap {gap:.3e} is close to the grouping tolerance {tol:.3e}"
            ));
        }
    }
    let xt = v.adjoint() * x * &v;
    let mut blocks: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if xt[(a, b)].norm() > 0.0 {
                blocks.push((e[b] - e[a], a, b));
            }
        }
    }
    blocks.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut components = Vec::new();
    let mut k = 0;
    while k < blocks.len() {
        let start = k;
        while k + 1 < blocks.len() && blocks[k + 1].0 - blocks[k].0 <= tol {
            k += 1;
        }
        let group = &blocks[start..=k];
        let omega = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
        let mut masked = CMatrix::zeros(n, n);
        for &(_, a, b) in group {
            masked[(a, b)] = xt[(a, b)];
        }
        let op = &v * masked * v.adjoint();
        components.push(BohrComponent {
            omega: if omega.abs() <= tol { 0.0 } else { omega },
            op,
        });
        k += 1;
    }
    Ok(BohrDecomposition {
        components,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ops;

    #[test]
    fn identity_has_single_zero_component() {
        let h = ops::spin_hamiltonian(1.3);
        let d = bohr_decompose(&h, &CMatrix::identity(2, 2), 1e-9).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].omega, 0.0);
    }

    #[test]
    fn lowering_operator_frequency() {
        let h = ops::spin_hamiltonian(1.3);
        let d = bohr_decompose(&h, &ops::sigma_minus(), 1e-9).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!((d.components[0].omega - 1.3).abs() < 1e-12);
        assert!((&d.components[0].op - ops::sigma_minus()).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        assert!(bohr_decompose(&ops::sigma_minus(), &ops::sigma_minus(), 1e-9).is_err());
    }
}
