//! A bosonic mode coupled to a finite star of bath modes. The exact
//! single-particle propagation converges to the continuum closed form as the
//! bath grows, and a tiny fermionic bath is cross-checked against many-body
//! exact diagonalization.
//!
//! ```text
//! cargo run --release --example discretized_bath
//! ```

use qregress::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
use qregress::models::{exact_two_point_eq, BFParams, CorrelatorKind};
use qregress::oracle::{dense_ed_reference, two_point_exact, EdQuery, OracleSystem};

fn main() -> qregress::Result<()> {
    let beta = 1.0;
    let kind = CorrelatorKind::ADagA;
    let j = SpectralDensity::rational_quartic(0.1).windowed(0.0, 10.0);
    let quad = QuadratureSpec {
        omega_max: 10.0,
        ..Default::default()
    };
    let p = BFParams::new(1.0, beta, Statistics::Boson, j.clone()).with_quad(quad);
    let taus = [0.0, 1.0, 2.0, 4.0];
    let exact = exact_two_point_eq(&p, kind, &taus)?;

    // Equilibrium is reached by preparing the mode empty and waiting.
    let t = 60.0;
    for n in [250, 500, 1000] {
        let sys =
            OracleSystem::from_density(1.0, &j, n, (0.0, 10.0), Statistics::Boson, beta, 0.0)?;
        let worst = taus
            .iter()
            .zip(&exact.values)
            .map(|(&tau, c)| two_point_exact(&sys, t, tau, kind).map(|v| (v - c).norm()))
            .collect::<qregress::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("N = {n:5}: max |oracle - closed form| = {worst:.3e}");
    }

    let j = SpectralDensity::flat(0.2, 8.0);
    let small =
        OracleSystem::from_density(1.0, &j, 5, (-8.0, 8.0), Statistics::Fermion, beta, 1.0)?
            .without_recurrence_guard();
    for tau in [0.0, 0.7, 1.5] {
        let wick = two_point_exact(&small, 0.5, tau, kind)?;
        let ed = dense_ed_reference(&small, 2, EdQuery::TwoPoint { t: 0.5, tau, kind })?;
        println!("5 modes, tau = {tau}: Wick {wick:.10}, dense ED {ed:.10}");
    }
    Ok(())
}
