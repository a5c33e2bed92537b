use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qregress::cli::RunConfig;
use tempfile::TempDir;

const FERMION: &str = r#"{
  "model": "fermion",
  "beta": 2,
  "j": {"type": "rational_quartic", "delta": 0.1},
  "tau": {"start": 0, "stop": 5, "points": 51}
}"#;

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn qregress(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qregress"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn sidecar(p: &Path) -> PathBuf {
    qregress::cli::output::sidecar_path(p)
}

#[test]
fn correlate_writes_csv_and_sidecar() {
    let w = Scratch::new();
    let cfg = w.file("run.json", FERMION);
    let out = w.path("run.csv");
    let o = qregress(&["correlate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 52);
    assert!(csv.starts_with("tau,"));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar(&out)).unwrap()).unwrap();
    assert_eq!(side["provenance"]["rows"], 51);
    assert_eq!(side["provenance"]["command"], "correlate");
}

#[test]
fn stdout_when_no_output_path() {
    let w = Scratch::new();
    let cfg = w.file("run.json", FERMION);
    let o = qregress(&["correlate", "--config", s(&cfg), "--method", "sqrt"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 52);
}

#[test]
fn reruns_are_byte_identical() {
    let w = Scratch::new();
    let cfg = w.file("run.json", FERMION);
    let out = w.path("run.csv");
    let mut seen = Vec::new();
    for _ in 0..2 {
        let o = qregress(&["correlate", "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        seen.push((
            std::fs::read(&out).unwrap(),
            std::fs::read(sidecar(&out)).unwrap(),
        ));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn sidecar_reloads_as_config() {
    let w = Scratch::new();
    let cfg = w.file("run.json", FERMION);
    let first = w.path("first.csv");
    assert_eq!(
        code(&qregress(&[
            "correlate",
            "--config",
            s(&cfg),
            "--out",
            s(&first),
            "--t",
            "inf"
        ])),
        0
    );
    let side = sidecar(&first);
    let loaded = RunConfig::load(&side).unwrap();
    assert!(loaded.provenance.is_some());
    let second = w.path("second.csv");
    let o = qregress(&["correlate", "--config", s(&side), "--out", s(&second)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn unknown_key_is_a_config_error() {
    let w = Scratch::new();
    let cfg = w.file("bad.json", &FERMION.replace("\"beta\"", "\"betta\""));
    assert_eq!(code(&qregress(&["correlate", "--config", s(&cfg)])), 2);
}

#[test]
fn beta_and_temperature_together_are_rejected() {
    let w = Scratch::new();
    let both = w.file(
        "both.json",
        &FERMION.replace("\"beta\": 2", "\"beta\": 2, \"temperature\": 0.5"),
    );
    assert_eq!(code(&qregress(&["correlate", "--config", s(&both)])), 2);
    let cfg = w.file("run.json", FERMION);
    let o = qregress(&[
        "correlate",
        "--config",
        s(&cfg),
        "--beta",
        "1",
        "--temperature",
        "1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let w = Scratch::new();
    let o = qregress(&["correlate", "--config", s(&w.path("absent.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn recurrence_guard_is_a_config_error() {
    let w = Scratch::new();
    let cfg = w.file(
        "oracle.json",
        r#"{"model": "fermion", "beta": 1, "j": {"type": "flat", "gamma": 0.2, "half_width": 5}, "t": 10,
            "tau": {"start": 0, "stop": 200, "points": 11}, "oracle": {"modes": 50}}"#,
    );
    let o = qregress(&["oracle", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("recurrence guard"));
}

#[test]
fn truncated_bath_window_is_a_numerical_error() {
    let w = Scratch::new();
    let cfg = w.file(
        "oracle.json",
        r#"{"model": "fermion", "beta": 1, "j": {"type": "rational_quartic", "delta": 0.1}, "t": 10,
            "tau": {"start": 0, "stop": 2, "points": 5}, "oracle": {"modes": 200, "window": [-1, 1]}}"#,
    );
    let o = qregress(&["oracle", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_sweep_cells_are_nan_with_status_one() {
    let w = Scratch::new();
    let cfg = w.file(
        "sweep.json",
        r#"{"model": "boson", "j": {"type": "rational_quartic", "delta": 0.1},
            "sweep": {"temperatures": [1.0], "deltas": [1e-7, 0.1], "tau_points": 51}}"#,
    );
    let out = w.path("sweep.csv");
    let o = qregress(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("nan"));
    assert!(!rows[1].contains("nan"));
}

#[test]
fn kms_report_is_json() {
    let w = Scratch::new();
    let cfg = w.file("run.json", FERMION);
    let out = w.path("kms.json");
    let o = qregress(&["kms", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passes"], true);
}

#[test]
fn engine_and_threepoint_run() {
    let w = Scratch::new();
    let spin = w.file(
        "spin.json",
        r#"{"model": "spinboson", "beta": 1, "j": {"type": "rational_quartic", "delta": 0.05},
            "tau": {"start": 0, "stop": 5, "points": 11}}"#,
    );
    let o = qregress(&["engine", "--config", s(&spin)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 12);

    let tp = w.file(
        "tp.json",
        r#"{"model": "boson", "beta": 1,
            "j": {"type": "windowed", "lo": 0.25, "hi": 10,
                  "inner": {"type": "flat", "gamma": 0.1, "half_width": 10}},
            "threepoint": {"tau1": {"start": 0, "stop": 2, "points": 3},
                           "tau2": {"start": 0, "stop": 2, "points": 3}}}"#,
    );
    let out = w.path("tp.csv");
    let o = qregress(&["threepoint", "--config", s(&tp), "--out", s(&out), "--kms"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 10);
}

#[test]
fn help_exits_zero_and_bad_subcommand_two() {
    assert_eq!(code(&qregress(&["--help"])), 0);
    assert_eq!(code(&qregress(&["frobnicate"])), 2);
}
