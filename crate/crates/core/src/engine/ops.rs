//! Standard operators and states.

use num_complex::Complex64;

use super::bohr::{hermitian_eigen, CMatrix};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `σ_z = diag(1, −1)`; index 0 is the excited state.
pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// `σ₋ = |g⟩⟨e|`.
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

pub fn sigma_plus() -> CMatrix {
    sigma_minus().adjoint()
}

pub fn spin_hamiltonian(omega0: f64) -> CMatrix {
    sigma_z() * c(omega0 / 2.0)
}

/// Annihilation operator on `n` Fock states.
pub fn annihilation(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt())
        } else {
            c(0.0)
        }
    })
}

pub fn creation(n: usize) -> CMatrix {
    annihilation(n).adjoint()
}

pub fn number(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i == j { c(i as f64) } else { c(0.0) })
}

/// `|k⟩⟨k|` on `n` states.
pub fn projector(n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i == k && j == k { c(1.0) } else { c(0.0) })
}

/// `e^{−βH}/Z` computed in the eigenbasis of `H`.
pub fn gibbs_state(h: &CMatrix, beta: f64) -> CMatrix {
    let (e, v) = hermitian_eigen(h);
    let e0 = e[0];
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let n = e.len();
    let d = CMatrix::from_fn(n, n, |i, j| if i == j { c(w[i] / z) } else { c(0.0) });
    &v * d * v.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Tr[X Y]` without forming the product.
pub fn trace_product(x: &CMatrix, y: &CMatrix) -> Complex64 {
    let n = x.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            s += x[(a, b)] * y[(b, a)];
        }
    }
    s
}

/// Frobenius inner product `Tr[X† Y]`.
pub fn inner(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}
