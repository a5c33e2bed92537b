//! Command-line front end for the `qregress` binary.
//!
//! Exit status: 0 on success, 1 on a numerical failure, 2 on a configuration
//! error.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::engine::TimeLabel;
use crate::error::{Error, Result};
use crate::models::{CorrelatorKind, Method, ThreePointOrdering};
pub use commands::Output;
pub use config::{ModelName, Provenance, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "qregress",
    version,
    about = "Regression-theorem correlation functions for open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<CorrelatorKind>,
    #[arg(long, conflicts_with = "temperature")]
    beta: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Preparation time, a number or `inf`.
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    omega0: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-point correlator on the configured τ grid.
    Correlate(Common),
    /// KMS residual of the configured method.
    Kms(Common),
    /// Deviation sweep over temperature and bath width.
    Sweep(Common),
    /// Discretized-bath reference correlator.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Number of bath modes.
        #[arg(long)]
        modes: Option<usize>,
        /// Compare against dense many-body diagonalization.
        #[arg(long)]
        dense: bool,
    },
    /// Finite-dimensional system coupled to a bosonic bath.
    Engine {
        #[command(flatten)]
        common: Common,
        /// Operator matrices for the custom model.
        #[arg(long)]
        matrices: Option<PathBuf>,
    },
    /// Three-point correlator grid.
    Threepoint {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_ordering)]
        ordering: Option<ThreePointOrdering>,
        /// Also evaluate the four KMS relations.
        #[arg(long)]
        kms: bool,
    },
}

fn from_json_word<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    from_json_word(s)
}

fn parse_kind(s: &str) -> std::result::Result<CorrelatorKind, String> {
    from_json_word(s)
}

fn parse_ordering(s: &str) -> std::result::Result<ThreePointOrdering, String> {
    from_json_word(s)
}

fn parse_time(s: &str) -> Result<TimeLabel> {
    serde_json::from_str::<TimeLabel>(s)
        .or_else(|_| from_json_word::<TimeLabel>(s))
        .map_err(|_| Error::Config(format!("--t expects a number or \"inf\", got {s:?}")))
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&c.config)?;
    cfg.provenance = None;
    if let Some(m) = c.method {
        cfg.method = m;
    }
    if let Some(k) = c.kind {
        cfg.kind = Some(k);
    }
    if let Some(b) = c.beta {
        cfg.beta = Some(b);
        cfg.temperature = None;
    }
    if let Some(t) = c.temperature {
        cfg.temperature = Some(t);
        cfg.beta = None;
    }
    if let Some(t) = &c.t {
        cfg.t = parse_time(t)?;
    }
    if let Some(w) = c.omega0 {
        cfg.omega0 = w;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Sidecar JSON: the effective configuration with provenance attached.
pub fn sidecar(cfg: &RunConfig, out: &Output) -> String {
    let mut cfg = cfg.clone();
    let csv = out.csv.as_deref().unwrap_or("");
    cfg.provenance = Some(Provenance {
        command: out.command.to_string(),
        params_digest: out.params_digest.clone(),
        csv_sha256: sha256_hex(csv),
        rows: csv.lines().count().saturating_sub(1),
        version: env!("CARGO_PKG_VERSION").to_string(),
    });
    serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n"
}

fn emit(cfg: &RunConfig, out: &Output) -> Result<()> {
    let path = cfg.output.clone();
    match (&out.csv, &path) {
        (Some(csv), Some(p)) => {
            output::write_file(p, csv)?;
            output::write_file(&output::sidecar_path(p), &sidecar(cfg, out))?;
            if let Some(json) = &out.json {
                let mut s = p.as_os_str().to_owned();
                s.push(".kms.json");
                output::write_file(&PathBuf::from(s), json)?;
            }
        }
        (Some(csv), None) => {
            print!("{csv}");
            if let Some(json) = &out.json {
                print!("{json}");
            }
        }
        (None, Some(p)) => output::write_file(p, out.json.as_deref().unwrap_or(""))?,
        (None, None) => print!("{}", out.json.as_deref().unwrap_or("")),
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<bool> {
    let (cfg, out) = match command {
        Command::Correlate(c) => {
            let cfg = load_config(&c)?;
            let out = commands::correlate(&cfg)?;
            (cfg, out)
        }
        Command::Kms(c) => {
            let cfg = load_config(&c)?;
            let out = commands::kms(&cfg)?;
            (cfg, out)
        }
        Command::Sweep(c) => {
            let cfg = load_config(&c)?;
            let out = commands::sweep(&cfg)?;
            (cfg, out)
        }
        Command::Oracle {
            common,
            modes,
            dense,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.method = Method::Oracle;
            let out = commands::oracle(&cfg, modes, dense)?;
            (cfg, out)
        }
        Command::Engine { common, matrices } => {
            let mut cfg = load_config(&common)?;
            cfg.method = Method::Engine;
            let out = commands::engine_cmd(&cfg, matrices.as_deref())?;
            (cfg, out)
        }
        Command::Threepoint {
            common,
            ordering,
            kms,
        } => {
            let cfg = load_config(&common)?;
            let out = commands::threepoint(&cfg, ordering, kms)?;
            (cfg, out)
        }
    };
    emit(&cfg, &out)?;
    Ok(out.complete)
}

fn init_threads() {
    if let Some(n) = std::env::var("QREGRESS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Parse `args` (program name first), run the command, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("qregress: {e}");
            if e.is_config() {
                2
            } else {
                1
            }
        }
    }
}
