//! Output plumbing: the resolved-config envelope every command echoes into
//! its output, JSON/CSV writers, and numeric formatting. JSON carries full
//! 17-digit floats; CSV rounds to 9 significant digits for reading and
//! plotting. Timestamps live in one dedicated header field so reruns are
//! byte-identical everywhere else.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Fully resolved run configuration; defaults are materialized before
/// execution and echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsystem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub tol_rank: f64,
    pub tol_discord: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            state: None,
            ensemble: None,
            subsystem: None,
            dims: None,
            seed: None,
            samples: None,
            trials: None,
            family: None,
            from: None,
            to: None,
            step: None,
            out: None,
            out_dir: None,
            tol_rank: qcorr::tol::RANK_REL,
            tol_discord: qcorr::tol::DISCORD_ZERO,
            threads: std::env::var("QCORR_THREADS")
                .ok()
                .and_then(|v| v.parse().ok()),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    timestamp: String,
    report: T,
}

fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}

/// Serializes a report inside the config envelope with full-precision
/// floats and writes it to `out` or stdout.
pub fn emit_json<T: Serialize>(
    config: &RunConfig,
    report: T,
    out: Option<&Path>,
) -> qcorr::Result<()> {
    let envelope = Envelope {
        config,
        timestamp: timestamp(),
        report,
    };
    let mut text = qcorr::format::to_json_full_precision(&envelope)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Writes a CSV with the config and timestamp as `#` header lines.
pub fn emit_csv(
    config: &RunConfig,
    header: &str,
    rows: &[String],
    out: Option<&Path>,
) -> qcorr::Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# config: {}\n", serde_json::to_string(config)?));
    text.push_str(&format!("# timestamp: {}\n", timestamp()));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Nine significant digits, the CSV float format.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Optional float for CSV cells; empty when absent.
pub fn sig9_opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}
