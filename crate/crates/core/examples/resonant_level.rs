//! Equilibrium `⟨a†(τ) a⟩` of a resonant level coupled to a Lorentzian-like
//! fermionic reservoir, computed three ways, plus the distance of each
//! approximation from the exact curve.
//!
//! ```text
//! cargo run --release --example resonant_level
//! ```

use qregress::analysis::deviation_metric;
use qregress::mathkit::{SpectralDensity, Statistics};
use qregress::models::{
    complex_rate, exact_two_point_eq, linspace, mqrt_two_point_eq, sqrt_two_point_eq, BFParams,
    CorrelatorKind,
};

fn main() -> qregress::Result<()> {
    let delta = 0.1;
    let p = BFParams::new(
        1.0,
        1.0,
        Statistics::Fermion,
        SpectralDensity::rational_quartic(delta),
    );
    let rate = complex_rate(&p)?;
    println!(
        "shifted frequency {:.6}, damping {:.6}",
        rate.omega0_prime, rate.gamma
    );

    let tau_f = 1.0 / delta;
    let taus = linspace(0.0, tau_f, 401);
    let kind = CorrelatorKind::ADagA;
    let exact = exact_two_point_eq(&p, kind, &taus)?;
    let mqrt = mqrt_two_point_eq(&p, kind, &taus)?;
    let sqrt = sqrt_two_point_eq(&p, kind, &taus)?;

    println!("{:>6} {:>24} {:>24} {:>24}", "tau", "exact", "mqrt", "sqrt");
    for k in (0..taus.len()).step_by(50) {
        let f = |z: qregress::Complex64| format!("{:+.5}{:+.5}i", z.re, z.im);
        println!(
            "{:6.2} {:>24} {:>24} {:>24}",
            taus[k],
            f(exact.values[k]),
            f(mqrt.values[k]),
            f(sqrt.values[k])
        );
    }
    println!("D(mqrt) = {:.4e}", deviation_metric(&mqrt, &exact, tau_f)?);
    println!("D(sqrt) = {:.4e}", deviation_metric(&sqrt, &exact, tau_f)?);
    Ok(())
}
