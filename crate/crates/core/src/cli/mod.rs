//! Command-line front end: configuration, orchestration, result caching and
//! export.
//!
//! Results land under `<outdir>/<command>/<config-hash>/` as `report.json`
//! (the payload — byte-identical across runs of the same config and
//! version), side-table CSVs, and `record.json` (run metadata: timestamp and
//! exit status; never compared). The cache serves a hit by reprinting the
//! stored payload's assertions and exit status; `--no-cache` forces
//! recomputation. Writes go through a temp file in the target directory
//! followed by a rename.
//!
//! Exit status: 0 when every scientific assertion passes, 1 when one fails
//! (the failing inequality is named) or the computation itself breaks down,
//! 2 for configuration errors.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use commands::CommandOutput;
use config::RunConfig;

pub const OUT_DIR_ENV: &str = "LEELAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Renorm,
    Flow,
    Groundstate,
    Bounds,
    ResolventCheck,
    Heatkernel,
    LightfrontBounds,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Renorm => "renorm",
            Self::Flow => "flow",
            Self::Groundstate => "groundstate",
            Self::Bounds => "bounds",
            Self::ResolventCheck => "resolvent-check",
            Self::Heatkernel => "heatkernel",
            Self::LightfrontBounds => "lightfront-bounds",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Configuration file; defaults apply when absent.
    pub config_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Enable the truncated-Hamiltonian cross-checks where supported.
    pub oracle: bool,
    pub no_cache: bool,
    pub threads: Option<usize>,
}

/// Exit status selected by the run; see the module docs for the contract.
pub fn run(kind: CommandKind, options: &RunOptions) -> u8 {
    if let Some(k) = options.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    match run_inner(kind, options) {
        Ok(status) => status,
        Err(err) => {
            let code = match &err {
                Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) => 2u8,
                _ => 1u8,
            };
            let label = if code == 2 { "config" } else { "computation" };
            eprintln!(
                "{}",
                json!({"error": {"code": label, "message": err.to_string()}})
            );
            code
        }
    }
}

fn run_inner(kind: CommandKind, options: &RunOptions) -> Result<u8> {
    let config = match &options.config_path {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let hash = config.config_hash(kind.name());
    let out_root = resolve_out_dir(options, &config);
    let dir = out_root.join(kind.name()).join(&hash);

    if !options.no_cache {
        if let Some(status) = serve_cached(&dir, &hash)? {
            return Ok(status);
        }
    }

    let output = compute(kind, &config, options)?;
    let failed: Vec<&str> = output
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    let status: u8 = if failed.is_empty() { 0 } else { 1 };

    std::fs::create_dir_all(&dir)?;
    let payload = json!({
        "command": kind.name(),
        "config_hash": hash,
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(&config).expect("config serializes"),
        "assertions": output.assertions,
        "report": output.report,
    });
    let payload_bytes = serde_json::to_vec_pretty(&payload).expect("payload serializes");
    write_atomic(&dir.join("report.json"), &payload_bytes)?;
    if config.output.formats.csv {
        for (name, text) in &output.csv {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
    }
    let record = json!({
        "command": kind.name(),
        "config_hash": hash,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "exit_status": status,
    });
    write_atomic(
        &dir.join("record.json"),
        &serde_json::to_vec_pretty(&record).expect("record serializes"),
    )?;

    print_assertions(&payload);
    if !failed.is_empty() {
        eprintln!(
            "{}",
            json!({"error": {"code": "assertion", "failed": failed}})
        );
    }
    println!("report: {}", dir.join("report.json").display());
    Ok(status)
}

fn compute(kind: CommandKind, config: &RunConfig, options: &RunOptions) -> Result<CommandOutput> {
    match kind {
        CommandKind::Renorm => commands::cmd_renorm(config),
        CommandKind::Flow => commands::cmd_flow(config),
        CommandKind::Groundstate => commands::cmd_groundstate(config, options.oracle),
        CommandKind::Bounds => commands::cmd_bounds(config),
        CommandKind::ResolventCheck => commands::cmd_resolvent_check(config),
        CommandKind::Heatkernel => commands::cmd_heatkernel(config),
        CommandKind::LightfrontBounds => commands::cmd_lightfront_bounds(config),
    }
}

fn resolve_out_dir(options: &RunOptions, config: &RunConfig) -> PathBuf {
    if let Some(dir) = &options.out_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    if let Some(dir) = &config.output.directory {
        return PathBuf::from(dir);
    }
    PathBuf::from("leelab-out")
}

/// A cache hit requires the stored payload to carry the exact config hash.
fn serve_cached(dir: &Path, hash: &str) -> Result<Option<u8>> {
    let report_path = dir.join("report.json");
    let record_path = dir.join("record.json");
    if !(report_path.is_file() && record_path.is_file()) {
        return Ok(None);
    }
    let record: Value = match std::fs::read(&record_path)
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
    {
        Some(v) => v,
        None => return Ok(None),
    };
    if record.get("config_hash").and_then(Value::as_str) != Some(hash)
        || record.get("version").and_then(Value::as_str) != Some(env!("CARGO_PKG_VERSION"))
    {
        return Ok(None);
    }
    let payload: Value = match std::fs::read(&report_path)
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
    {
        Some(v) => v,
        None => return Ok(None),
    };
    if payload.get("config_hash").and_then(Value::as_str) != Some(hash) {
        return Ok(None);
    }
    println!("cache hit: {}", report_path.display());
    print_assertions(&payload);
    println!("report: {}", report_path.display());
    let status = record
        .get("exit_status")
        .and_then(Value::as_u64)
        .unwrap_or(0) as u8;
    Ok(Some(status))
}

fn print_assertions(payload: &Value) {
    if let Some(list) = payload.get("assertions").and_then(Value::as_array) {
        for a in list {
            let name = a.get("name").and_then(Value::as_str).unwrap_or("?");
            let passed = a.get("passed").and_then(Value::as_bool).unwrap_or(false);
            let detail = a.get("detail").and_then(Value::as_str).unwrap_or("");
            println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::Config(format!("output path {} has no parent", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
