//! Two-time correlator `⟨a†(t+τ) a(t)⟩` after preparing the level in a
//! nonthermal state, approaching its equilibrium form as `t` grows. The
//! discretized bath gives the exact answer at each `t`.
//!
//! ```text
//! cargo run --release --example relaxation
//! ```

use qregress::mathkit::{QuadratureSpec, SpectralDensity, Statistics};
use qregress::models::{finite_time_occupation, mqrt_two_point_finite, BFParams, CorrelatorKind};
use qregress::oracle::{two_point_exact, OracleSystem};

fn main() -> qregress::Result<()> {
    let (w, beta, n0) = (10.0, 1.0, 1.0);
    let j = SpectralDensity::rational_quartic(0.1).windowed(-w, w);
    let quad = QuadratureSpec {
        omega_max: w,
        ..Default::default()
    };
    let p = BFParams::new(1.0, beta, Statistics::Fermion, j.clone()).with_quad(quad);
    let sys = OracleSystem::from_density(1.0, &j, 2000, (-w, w), Statistics::Fermion, beta, n0)?;

    let taus = [0.0, 1.0, 3.0];
    println!(
        "{:>5} {:>10} {:>28} {:>28}",
        "t", "n(t)", "mqrt at tau = 1", "oracle at tau = 1"
    );
    for t in [0.0, 2.0, 5.0, 10.0, 30.0] {
        let c = mqrt_two_point_finite(&p, n0, t, &taus)?;
        let exact = two_point_exact(&sys, t, taus[1], CorrelatorKind::ADagA)?;
        println!(
            "{t:5.1} {:10.6} {:>28.8} {:>28.8}",
            finite_time_occupation(&p, n0, t)?,
            c.values[1],
            exact
        );
    }
    Ok(())
}
