//! CSV and JSON report writers with a configuration echo.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::eigen::RESIDUAL_TOL;
use crate::quadrature::QuadConfig;
use crate::Result;

pub const TOOL: &str = "toral";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: Option<usize>,
    pub n: Option<String>,
    pub measure_path: Option<String>,
    /// Measure spec exactly as read from disk.
    pub measure_echo: Option<String>,
    pub patch_path: Option<String>,
    pub patch_echo: Option<String>,
    pub c: Option<f64>,
    pub exponent: Option<f64>,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub depth: Option<u32>,
    pub seed: Option<u64>,
    pub cap: Option<usize>,
    pub out: String,
    pub quadrature: Option<QuadConfig>,
    pub eigen_residual_tol: f64,
    /// Command-specific settings.
    pub extra: Value,
}

impl RunConfig {
    pub fn new(command: &str, out: &Path) -> Self {
        RunConfig {
            command: command.to_string(),
            out: out.display().to_string(),
            quadrature: Some(QuadConfig::default()),
            eigen_residual_tol: RESIDUAL_TOL,
            extra: json!({}),
            ..Default::default()
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Csv {
    header: Vec<String>,
    body: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.header.len());
        let line = cells
            .iter()
            .map(|c| {
                if c.contains([',', '"', '\n']) {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(self.body, "{line}");
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }
}

/// Writes `<out>/<command>.csv` and `<out>/<command>.json`.
pub fn write_reports(cfg: &RunConfig, csv: &Csv, body: Value) -> Result<(PathBuf, PathBuf)> {
    let dir = Path::new(&cfg.out);
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", cfg.command));
    let json_path = dir.join(format!("{}.json", cfg.command));
    fs::write(&csv_path, csv.render())?;
    let doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "config": cfg,
        "result": body,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path))
}
