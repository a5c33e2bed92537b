//! Bosonic three-point correlators `⟨a†(τ₁+τ₂) a(τ₂) N⟩` and
//! `⟨N a†(τ₁+τ₂) a(τ₂)⟩`, and the four KMS relations that tie them together.
//!
//! ```text
//! cargo run --release --example three_point
//! ```

use qregress::analysis::three_point_kms_check;
use qregress::mathkit::{SpectralDensity, Statistics};
use qregress::models::{linspace, three_point_mqrt_eq, BFParams, ThreePointOrdering};

fn main() -> qregress::Result<()> {
    // A gapped band keeps the bosonic occupation finite.
    let j = SpectralDensity::flat(0.1, 10.0).windowed(0.25, 10.0);
    let p = BFParams::new(1.0, 1.0, Statistics::Boson, j);

    for (t1, t2) in [(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)] {
        let right = three_point_mqrt_eq(&p, t1, t2, ThreePointOrdering::NRight)?;
        let left = three_point_mqrt_eq(&p, t1, t2, ThreePointOrdering::NLeft)?;
        println!("tau1 = {t1}, tau2 = {t2}: N right {right:.6}, N left {left:.6}");
    }

    let grid = linspace(0.0, 5.0, 6);
    for r in three_point_kms_check(&p, &grid, &grid)? {
        println!(
            "{:<40} residual {:.2e} ({})",
            r.label,
            r.residual,
            if r.passes() { "holds" } else { "violated" }
        );
    }
    Ok(())
}
