//! The numerical building blocks: thermal occupations, spectral densities,
//! principal values, the Lamb shift and oscillatory Fourier integrals.
//!
//! ```text
//! cargo run --release --example spectral_tools
//! ```

use qregress::mathkit::{
    cauchy_principal_value, fourier_integral, lamb_shift, occupation, principal_value,
    thermal_hilbert, weighted_occupation, QuadratureSpec, SpectralDensity, Statistics,
};
use qregress::Complex64;

fn main() -> qregress::Result<()> {
    let beta = 1.0;
    for stats in [Statistics::Fermion, Statistics::Boson] {
        println!("{stats:?}: n(1) = {:.12}", occupation(1.0, beta, stats)?);
    }

    let j = SpectralDensity::rational_quartic(0.1);
    let spec = QuadratureSpec::for_model(1.0, beta);
    println!("J(1) = {:.12}", j.eval(1.0));
    println!(
        "J n at the origin (boson) = {}",
        weighted_occupation(&j, 0.0, beta, Statistics::Boson)?
    );
    println!(
        "shifted frequency at omega0 = 1: {:.12}",
        lamb_shift(&j, 1.0, &spec)?
    );
    println!(
        "thermal Hilbert term: {:.12}",
        thermal_hilbert(&j, beta, 1.0, &spec)?
    );

    // P∫_{-1}^{1} dx / (0.3 − x) = ln(1.3/0.7)
    let pv = principal_value(&|_x| 1.0, 0.3, -1.0, 1.0, &[], &spec)?;
    println!(
        "PV integral {:.12} vs ln(1.3/0.7) = {:.12}",
        pv.0,
        (1.3f64 / 0.7).ln()
    );

    // P∫ dx e^{−x²} / (0 − x) = 0 by symmetry
    println!(
        "odd PV integral {:.3e}",
        cauchy_principal_value(&|x| (-x * x).exp(), 0.0, &spec)?
    );

    // ∫ dΩ/2π e^{iΩτ} e^{−Ω²/2} = e^{−τ²/2} / √(2π)
    let gauss = |w: f64| Complex64::new((-0.5 * w * w).exp(), 0.0);
    let f = fourier_integral(&gauss, 1.5, &spec)?;
    println!(
        "Gaussian transform {:.12} vs {:.12}",
        f.value.re,
        (-1.125f64).exp() / (2.0 * std::f64::consts::PI).sqrt()
    );
    Ok(())
}
