//! Many-body exact diagonalization for tiny systems.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OracleSystem;
use crate::error::{Error, Result};
use crate::mathkit::Statistics;
use crate::models::{CorrelatorKind, ThreePointOrdering};

/// Total fermionic modes, system included.
pub const MAX_FERMION_MODES: usize = 9;
/// Total bosonic modes, system included.
pub const MAX_BOSON_MODES: usize = 4;
pub const MAX_BOSON_TRUNCATION: usize = 6;

type CM = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdQuery {
    TwoPoint {
        t: f64,
        tau: f64,
        kind: CorrelatorKind,
    },
    NN {
        t: f64,
        tau: f64,
    },
    ThreePoint {
        t: f64,
        tau1: f64,
        tau2: f64,
        ordering: ThreePointOrdering,
    },
}

struct Fock {
    dim: usize,
    local: usize,
    modes: usize,
}

impl Fock {
    fn digit(&self, state: usize, mode: usize) -> usize {
        (state / self.local.pow(mode as u32)) % self.local
    }

    fn annihilation(&self, mode: usize, stats: Statistics) -> CM {
        let mut c = CM::zeros(self.dim, self.dim);
        let stride = self.local.pow(mode as u32);
        for s in 0..self.dim {
            let occ = self.digit(s, mode);
            if occ == 0 {
                continue;
            }
            let target = s - stride;
            let amp = match stats {
                Statistics::Boson => (occ as f64).sqrt(),
                Statistics::Fermion => {
                    let parity: usize = (0..mode).map(|k| self.digit(s, k)).sum();
                    if parity % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            c[(target, s)] = Complex64::new(amp, 0.0);
        }
        c
    }
}

/// Heisenberg operators `e^{iHs} X e^{−iHs}` from the eigendecomposition of `H`.
struct Evolver {
    vecs: CM,
    vals: Vec<f64>,
}

impl Evolver {
    fn at(&self, x: &CM, s: f64) -> CM {
        let n = self.vals.len();
        let xe = self.vecs.adjoint() * x * &self.vecs;
        let rotated = CM::from_fn(n, n, |i, j| {
            xe[(i, j)] * Complex64::from_polar(1.0, (self.vals[i] - self.vals[j]) * s)
        });
        &self.vecs * rotated * self.vecs.adjoint()
    }
}

/// Evaluates `query` by building the full many-body problem. `truncation` is
/// the number of Fock states per bosonic mode and is ignored for fermions.
pub fn dense_ed_reference(
    sys: &OracleSystem,
    truncation: usize,
    query: EdQuery,
) -> Result<Complex64> {
    let modes = sys.modes();
    let local = match sys.stats {
        Statistics::Fermion => {
            if modes > MAX_FERMION_MODES {
                return Err(Error::Size(format!(
                    "{modes} fermionic modes exceed {MAX_FERMION_MODES}"
                )));
            }
            2
        }
        Statistics::Boson => {
            if modes > MAX_BOSON_MODES || truncation > MAX_BOSON_TRUNCATION || truncation < 2 {
                return Err(Error::Size(format!(
                    "bosonic dense reference allows {MAX_BOSON_MODES} modes with 2..={MAX_BOSON_TRUNCATION} states each"
                )));
            }
            truncation
        }
    };
    let fock = Fock {
        dim: local.pow(modes as u32),
        local,
        modes,
    };
    let ops: Vec<CM> = (0..modes)
        .map(|j| fock.annihilation(j, sys.stats))
        .collect();
    let mut h = CM::zeros(fock.dim, fock.dim);
    for i in 0..modes {
        for j in 0..modes {
            if sys.h[(i, j)] != 0.0 {
                h += ops[i].adjoint() * &ops[j] * Complex64::new(sys.h[(i, j)], 0.0);
            }
        }
    }
    let eig = h.symmetric_eigen();
    let ev = Evolver {
        vecs: eig.eigenvectors,
        vals: eig.eigenvalues.iter().copied().collect(),
    };
    let rho = initial_state(sys, &fock);

    let a = &ops[0];
    let ad = a.adjoint();
    let expect = |x: CM| (&rho * x).trace();
    Ok(match query {
        EdQuery::TwoPoint { t, tau, kind } => match kind {
            CorrelatorKind::ADagA => expect(ev.at(&ad, t + tau) * ev.at(a, t)),
            CorrelatorKind::AADag => expect(ev.at(a, t) * ev.at(&ad, t + tau)),
            other => {
                return Err(Error::Config(format!(
                    "{other:?} is not supported by the dense reference"
                )))
            }
        },
        EdQuery::NN { t, tau } => {
            let n = &ad * a;
            expect(ev.at(&n, t + tau) * ev.at(&n, t))
        }
        EdQuery::ThreePoint {
            t,
            tau1,
            tau2,
            ordering,
        } => {
            let n = ev.at(&(&ad * a), t);
            let pair = ev.at(&ad, t + tau1 + tau2) * ev.at(a, t + tau2);
            match ordering {
                ThreePointOrdering::NRight => expect(pair * n),
                ThreePointOrdering::NLeft => expect(n * pair),
            }
        }
    })
}

/// Product state, diagonal in the occupation basis with the mean occupations
/// of `sys`; bosonic modes get the (truncated) geometric distribution.
fn initial_state(sys: &OracleSystem, fock: &Fock) -> CM {
    let probs: Vec<Vec<f64>> = sys
        .occupations
        .iter()
        .map(|&n| match sys.stats {
            Statistics::Fermion => vec![1.0 - n, n],
            Statistics::Boson => {
                let r = n / (1.0 + n);
                let raw: Vec<f64> = (0..fock.local).map(|m| r.powi(m as i32)).collect();
                let z: f64 = raw.iter().sum();
                raw.into_iter().map(|p| p / z).collect()
            }
        })
        .collect();
    let mut rho = CM::zeros(fock.dim, fock.dim);
    for s in 0..fock.dim {
        let p: f64 = (0..fock.modes)
            .map(|j| probs[j][fock.digit(s, j)])
            .product();
        rho[(s, s)] = Complex64::new(p, 0.0);
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::SpectralDensity;
    use crate::oracle::{
        nn_exact, three_point_exact, two_point_exact, DiscretizedBath, OracleSystem,
    };

    fn fermions(n: usize) -> OracleSystem {
        OracleSystem::from_density(
            0.7,
            &SpectralDensity::flat(0.6, 2.0),
            n,
            (-2.0, 2.0),
            Statistics::Fermion,
            1.3,
            0.4,
        )
        .unwrap()
    }

    #[test]
    fn free_mode() {
        let bath = DiscretizedBath {
            n: 0,
            omegas: vec![],
            alphas: vec![],
            window: (0.0, 1.0),
        };
        let sys = OracleSystem::new(0.7, bath, Statistics::Fermion, 1.0, 0.4).unwrap();
        let v = dense_ed_reference(
            &sys,
            2,
            EdQuery::TwoPoint {
                t: 0.0,
                tau: 1.3,
                kind: CorrelatorKind::ADagA,
            },
        )
        .unwrap();
        assert!((v - Complex64::from_polar(0.4, 0.7 * 1.3)).norm() < 1e-12);
    }

    #[test]
    fn fermionic_wick_agrees_with_dense() {
        let sys = fermions(4);
        let (t, tau) = (0.8, 1.1);
        for kind in [CorrelatorKind::ADagA, CorrelatorKind::AADag] {
            let w = two_point_exact(&sys, t, tau, kind).unwrap();
            let d = dense_ed_reference(&sys, 2, EdQuery::TwoPoint { t, tau, kind }).unwrap();
            assert!((w - d).norm() < 1e-12);
        }
        let w = nn_exact(&sys, t, tau).unwrap();
        let d = dense_ed_reference(&sys, 2, EdQuery::NN { t, tau }).unwrap();
        assert!((w - d).norm() < 1e-10);
        for ordering in [ThreePointOrdering::NRight, ThreePointOrdering::NLeft] {
            let w = three_point_exact(&sys, t, 0.4, 0.9, ordering).unwrap();
            let d = dense_ed_reference(
                &sys,
                2,
                EdQuery::ThreePoint {
                    t,
                    tau1: 0.4,
                    tau2: 0.9,
                    ordering,
                },
            )
            .unwrap();
            assert!((w - d).norm() < 1e-10);
        }
    }

    #[test]
    fn bosonic_truncation_is_small_when_cold() {
        let sys = OracleSystem::from_density(
            1.0,
            &SpectralDensity::flat(0.3, 1.0).windowed(0.5, 1.5),
            2,
            (0.5, 1.5),
            Statistics::Boson,
            3.0,
            0.05,
        )
        .unwrap();
        let w = two_point_exact(&sys, 0.5, 0.7, CorrelatorKind::ADagA).unwrap();
        let d = dense_ed_reference(
            &sys,
            6,
            EdQuery::TwoPoint {
                t: 0.5,
                tau: 0.7,
                kind: CorrelatorKind::ADagA,
            },
        )
        .unwrap();
        assert!((w - d).norm() < 1e-6);
    }

    #[test]
    fn size_caps() {
        assert!(matches!(
            dense_ed_reference(&fermions(9), 2, EdQuery::NN { t: 0.0, tau: 0.0 }),
            Err(Error::Size(_))
        ));
    }
}
