//! Data, singles and summary files.
//!
//! Data file grammar: header lines start with `# `; the first is
//! `# foil data v1`, the second `# generated: <unix seconds>` (the only line
//! that differs between reruns), then `key: value` lines, the last of which
//! is `# columns: ...`. Rows are whitespace-separated floats in `{:e}` form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::fit::FringeFit;
use super::sweep::{ComparisonReport, Summary};
use crate::error::{Error, Result};
use crate::interferometer::ScenarioKind;

pub const DATA_MAGIC: &str = "# foil data v1";
pub const SINGLES_MAGIC: &str = "# foil singles v1";
pub const DATA_COLUMNS: &str = "sweep_value mc_mean mc_stderr analytic z";
pub const SINGLES_COLUMNS: &str =
    "sweep_value mean_1 stderr_1 analytic_1 mean_2 stderr_2 analytic_2";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub data: PathBuf,
    pub singles: PathBuf,
    pub summary: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        OutputPaths {
            data: dir.join(format!("{stem}.dat")),
            singles: dir.join(format!("{stem}.singles.dat")),
            summary: dir.join(format!("{stem}.summary.json")),
        }
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    format: &'static str,
    generated: u64,
    version: &'static str,
    scenario: ScenarioKind,
    seed: u64,
    realizations: usize,
    sweep: &'a super::config::SweepSpec,
    summary: &'a Summary,
    fit: &'a Option<FringeFit>,
    analytic_fit: &'a Option<FringeFit>,
    regime_warnings: &'a [String],
    applied_defaults: &'a [String],
    config: &'a ExperimentConfig,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn header(magic: &str, cfg: &ExperimentConfig, columns: &str, generated: u64) -> String {
    let s = &cfg.sweep;
    let mut h = String::new();
    let _ = writeln!(h, "{magic}");
    let _ = writeln!(h, "# generated: {generated}");
    let _ = writeln!(h, "# version: {VERSION}");
    let _ = writeln!(h, "# scenario: {}", cfg.scenario);
    let _ = writeln!(h, "# seed: {}", cfg.ensemble.seed);
    let _ = writeln!(h, "# realizations: {}", cfg.ensemble.realizations);
    let _ = writeln!(
        h,
        "# sweep: {} start={:e} stop={:e} steps={} endpoint={}",
        s.variable.name(),
        s.start,
        s.stop,
        s.steps,
        s.endpoint
    );
    let _ = writeln!(h, "# columns: {columns}");
    h
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `<stem>.dat`, `<stem>.singles.dat` and `<stem>.summary.json` into
/// `dir`, creating it if needed.
pub fn emit_outputs(report: &ComparisonReport, cfg: &ExperimentConfig, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let paths = OutputPaths::new(dir, &cfg.output.stem);
    let generated = now();

    let mut data = header(DATA_MAGIC, cfg, DATA_COLUMNS, generated);
    for r in &report.rows {
        let _ = writeln!(data, "{:e} {:e} {:e} {:e} {:e}", r.value, r.mean, r.stderr, r.analytic, r.z);
    }
    write(&paths.data, &data)?;

    let mut singles = header(SINGLES_MAGIC, cfg, SINGLES_COLUMNS, generated);
    for r in &report.singles {
        let _ = writeln!(
            singles,
            "{:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            r.value, r.mean[0], r.stderr[0], r.analytic[0], r.mean[1], r.stderr[1], r.analytic[1]
        );
    }
    write(&paths.singles, &singles)?;

    let summary = SummaryFile {
        format: "foil summary v1",
        generated,
        version: VERSION,
        scenario: cfg.scenario,
        seed: cfg.ensemble.seed,
        realizations: cfg.ensemble.realizations,
        sweep: &cfg.sweep,
        summary: &report.summary,
        fit: &report.fit,
        analytic_fit: &report.analytic_fit,
        regime_warnings: &report.regime_warnings,
        applied_defaults: &cfg.applied_defaults,
        config: cfg,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io {
        path: paths.summary.clone(),
        source: std::io::Error::other(e),
    })?;
    json.push('\n');
    write(&paths.summary, &json)?;
    Ok(paths)
}

/// A parsed data or singles file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub magic: String,
    /// `key: value` header entries in file order.
    pub header: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl DataFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn columns(&self) -> Vec<&str> {
        self.get("columns").map_or_else(Vec::new, |c| c.split_whitespace().collect())
    }
}

pub fn read_data_file(path: &Path) -> Result<DataFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let bad = |line: usize, msg: String| Error::ConfigParse { path: path.to_path_buf(), message: format!("line {line}: {msg}") };
    let mut lines = text.lines().enumerate();
    let magic = match lines.next() {
        Some((_, l)) if l.starts_with("# foil ") => l.to_string(),
        _ => return Err(bad(1, "missing `# foil` format line".into())),
    };
    let mut out = DataFile { magic, header: Vec::new(), rows: Vec::new() };
    for (i, line) in lines {
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h.split_once(": ").ok_or_else(|| bad(i + 1, format!("malformed header `{line}`")))?;
            out.header.push((k.to_string(), v.to_string()));
        } else if !line.trim().is_empty() {
            let row = line
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| bad(i + 1, format!("`{x}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            let want = out.columns().len();
            if row.len() != want {
                return Err(bad(i + 1, format!("{} values for {want} columns", row.len())));
            }
            out.rows.push(row);
        }
    }
    Ok(out)
}

/// Drops the `generated` line (data files) or field (summary JSON) so that
/// reruns can be compared byte for byte.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !(l.starts_with("# generated: ") || l.trim_start().starts_with("\"generated\": ")))
        .map(|l| format!("{l}\n"))
        .collect()
}
