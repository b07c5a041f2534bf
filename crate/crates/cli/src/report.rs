use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::Serialize;
use tenscalc::verify::Check;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StampMode {
    On,
    Off,
}

/// Environment stamp; omitted with `--stamp off` so reports are byte-stable.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub unix_time: u64,
    pub os: &'static str,
    pub arch: &'static str,
}

impl StampMode {
    pub fn stamp(self) -> Option<Stamp> {
        (self == StampMode::On).then(|| Stamp {
            tool: "tenscalc",
            version: env!("CARGO_PKG_VERSION"),
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        })
    }

    /// Wall-clock value, or `None` when timings are suppressed.
    pub fn time(self, ms: f64) -> Option<f64> {
        (self == StampMode::On).then_some(ms)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf, CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn print_check(c: &Check, verbose: bool) {
    if verbose || !c.pass {
        println!(
            "    {} {} (max error {:.3e}, tolerance {:.0e}){}",
            if c.pass { "ok  " } else { "fail" },
            c.name,
            c.max_error,
            c.tolerance,
            c.detail
                .as_deref()
                .map(|d| format!(": {d}"))
                .unwrap_or_default()
        );
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
