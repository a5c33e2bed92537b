//! Ranks the two regression schemes over a temperature and bath-width grid.
//! A small 4x4 grid by default; pass `full` for the 8x8 default grid.
//!
//! ```text
//! cargo run --release --example deviation_sweep [full]
//! ```

use qregress::analysis::{default_deltas, default_temperatures, sweep_d, SweepOptions};
use qregress::mathkit::Statistics;
use qregress::models::linspace;

fn main() -> qregress::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let (temps, deltas) = if full {
        (default_temperatures(), default_deltas())
    } else {
        (linspace(0.5, 4.0, 4), linspace(0.02, 0.2, 4))
    };
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let table = sweep_d(stats, &temps, &deltas, &SweepOptions::default())?;
        let wins = table.rows.iter().filter(|r| r.d_mqrt <= r.d_sqrt).count();
        println!(
            "{stats:?}: MQRT at least as close as SQRT in {wins}/{} cells",
            table.rows.len()
        );
        println!(
            "{:>6} {:>7} {:>11} {:>11}",
            "T", "delta", "D_mqrt", "D_sqrt"
        );
        for r in &table.rows {
            println!(
                "{:6.3} {:7.4} {:11.4e} {:11.4e}",
                r.temperature, r.delta, r.d_mqrt, r.d_sqrt
            );
        }
    }
    Ok(())
}
