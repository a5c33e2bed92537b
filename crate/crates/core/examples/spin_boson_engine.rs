//! The general finite-dimensional engine applied to a two-level system and to
//! a truncated harmonic mode, compared with the closed-form correlators.
//!
//! ```text
//! cargo run --release --example spin_boson_engine
//! ```

use qregress::engine::{mqrt_correlator, ops, EngineOptions, SystemSpec, TimePoint};
use qregress::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
use qregress::models::{
    linspace, mqrt_two_point_eq, sb_mqrt_eq, BFParams, CorrelatorKind, SBParams,
};

fn max_rel(a: &[qregress::Complex64], b: &[qregress::Complex64]) -> f64 {
    let peak = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / peak
}

fn main() -> qregress::Result<()> {
    let (omega0, beta) = (1.0, 2.0);
    let j = SpectralDensity::rational_quartic(0.05);
    let quad = QuadratureSpec::for_model(omega0, beta);
    let taus = linspace(0.0, 10.0, 401);
    let opts = EngineOptions::default();

    let spin = SystemSpec::spin_boson(omega0, beta, j.clone(), quad)?;
    let engine = mqrt_correlator(
        &spin,
        &ops::sigma_plus(),
        &ops::sigma_minus(),
        &TimePoint::Infinity,
        &taus,
        &opts,
    )?;
    let closed = sb_mqrt_eq(
        &SBParams::new(omega0, beta, j.clone()).with_quad(quad),
        CorrelatorKind::PlusMinus,
        &taus,
    )?;
    println!(
        "spin-boson <s+(tau) s->: engine vs closed form, max rel diff {:.3e}",
        max_rel(&engine.values, &closed.values)
    );

    let p = BFParams::new(omega0, beta, Statistics::Boson, j.clone()).with_quad(quad);
    let closed = mqrt_two_point_eq(&p, CorrelatorKind::ADagA, &taus)?;
    for n_max in [10, 20] {
        let mode = SystemSpec::truncated_boson(omega0, beta, j.clone(), quad, n_max)?;
        let c = mqrt_correlator(
            &mode,
            &ops::creation(n_max),
            &ops::annihilation(n_max),
            &TimePoint::Infinity,
            &taus,
            &opts,
        )?;
        println!(
            "boson, {n_max} Fock states: max rel diff {:.3e}",
            max_rel(&c.values, &closed.values)
        );
    }
    Ok(())
}
