//! How well each method respects the KMS condition
//! `⟨a a†(τ)⟩ = ⟨a†(τ − iβ) a⟩` for a bosonic mode, and the spin analogue.
//!
//! ```text
//! cargo run --release --example kms_detailed_balance
//! ```

use qregress::analysis::{kms_residual, KmsPair, ModelParams};
use qregress::mathkit::{SpectralDensity, Statistics};
use qregress::models::{linspace, BFParams, Method, SBParams};

fn main() -> qregress::Result<()> {
    let taus = linspace(0.0, 10.0, 41);
    let j = SpectralDensity::rational_quartic(0.1);
    let boson = ModelParams::BosonFermion(BFParams::new(1.0, 2.0, Statistics::Boson, j.clone()));
    let spin = ModelParams::SpinBoson(SBParams::new(1.0, 2.0, j));

    let cases = [
        (&boson, Method::Exact, KmsPair::Mode),
        (&boson, Method::Mqrt, KmsPair::Mode),
        (&boson, Method::Sqrt, KmsPair::Mode),
        (&boson, Method::Mqrt, KmsPair::Number),
        (&boson, Method::Sqrt, KmsPair::Number),
        (&spin, Method::Mqrt, KmsPair::Spin),
        (&spin, Method::Sqrt, KmsPair::Spin),
    ];
    println!(
        "{:<8} {:<6} {:>12} {:>12}  verdict",
        "pair", "method", "residual", "threshold"
    );
    for (params, method, pair) in cases {
        let r = kms_residual(params, method, pair, &taus)?;
        let verdict = if r.passes() { "holds" } else { "violated" };
        println!(
            "{:<8} {:<6} {:>12.3e} {:>12.1e}  {verdict}",
            r.label,
            format!("{method:?}"),
            r.residual,
            r.pass_threshold
        );
    }
    Ok(())
}
