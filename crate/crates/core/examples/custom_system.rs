//! A user-defined three-level system (a ladder with a coupling operator that
//! connects neighbouring levels) run through the same entry point as the
//! `qregress` binary, writing CSV and its provenance sidecar.
//!
//! ```text
//! cargo run --release --example custom_system
//! ```

use std::path::Path;

fn entries(rows: &[[f64; 3]]) -> String {
    let cells: Vec<String> = rows.iter().flatten().map(|x| format!("[{x}, 0]")).collect();
    format!("[{}]", cells.join(", "))
}

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("qregress-custom-system");
    std::fs::create_dir_all(&dir)?;
    let matrices = dir.join("ladder.json");
    let config = dir.join("ladder.config.json");
    let out = dir.join("ladder.csv");

    let h = [[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.2]];
    let s = [[0.0, 1.0, 0.0], [0.0, 0.0, 0.7], [0.0, 0.0, 0.0]];
    std::fs::write(
        &matrices,
        format!("{{\"h_s\": {}, \"s\": {}}}", entries(&h), entries(&s)),
    )?;
    std::fs::write(
        &config,
        r#"{
  "model": "custom",
  "method": "engine",
  "beta": 1.5,
  "j": {"type": "rational_quartic", "delta": 0.05},
  "tau": {"start": 0, "stop": 20, "points": 81}
}"#,
    )?;

    let path = |p: &Path| p.to_string_lossy().into_owned();
    let code = qregress::cli::run([
        "qregress".to_string(),
        "engine".into(),
        "--config".into(),
        path(&config),
        "--matrices".into(),
        path(&matrices),
        "--out".into(),
        path(&out),
    ]);
    println!("exit status {code}");
    let csv = std::fs::read_to_string(&out)?;
    for line in csv.lines().take(6) {
        println!("{line}");
    }
    println!(
        "sidecar: {}",
        qregress::cli::output::sidecar_path(&out).display()
    );
    Ok(())
}
