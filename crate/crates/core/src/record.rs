//! CSV rows, run manifests and plain-text summaries.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spectra::BasisDescriptor;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Floats are written with 17 significant digits.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            if n.is_f64() {
                format!("{:.16e}", n.as_f64().unwrap())
            } else {
                n.to_string()
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders rows of a flat serializable struct as CSV text; the header is
/// the field order of the struct.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let v = serde_json::to_value(row).map_err(|e| Error::Mismatch(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Mismatch("CSV rows must be structs".into()))?;
        if header.is_none() {
            let h: Vec<String> = obj.keys().cloned().collect();
            w.write_record(&h).map_err(|e| Error::Mismatch(e.to_string()))?;
            header = Some(h);
        }
        w.write_record(obj.values().map(cell))
            .map_err(|e| Error::Mismatch(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Mismatch(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, csv_string(rows)?).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Everything an experiment produced, before it is written out.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    /// `(file name, CSV text)`.
    pub tables: Vec<(String, String)>,
    /// Extra result values for the manifest.
    pub results: serde_json::Map<String, Value>,
    pub bases: Vec<BasisDescriptor>,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        self.tables.push((name.to_string(), csv_string(rows)?));
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).expect("result serializes"));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self, experiment: &str) -> String {
        let mut s = format!("{experiment}\n");
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        s.push_str(if self.passed() { "overall: PASS\n" } else { "overall: FAIL\n" });
        s
    }
}

/// Writes tables, `manifest.json` and `summary.txt` into `dir`; returns the
/// written paths.
pub fn write_run(
    dir: &Path,
    experiment: &str,
    resolved: &impl Serialize,
    seed: u64,
    out: &RunOutput,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (name, text) in &out.tables {
        let p = dir.join(name);
        fs::write(&p, text).map_err(io_err(&p))?;
        written.push(p);
    }
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "experiment": experiment,
        "seed": seed,
        "config": resolved,
        "versions": {
            "crate": env!("CARGO_PKG_NAME"),
            "crate_version": env!("CARGO_PKG_VERSION"),
        },
        "bases": out.bases,
        "results": out.results,
        "checks": out.checks,
        "passed": out.passed(),
        "outputs": out.tables.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "created_unix": created,
    });
    let p = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&p, text + "\n").map_err(io_err(&p))?;
    written.push(p);
    let p = dir.join("summary.txt");
    fs::write(&p, out.summary(experiment)).map_err(io_err(&p))?;
    written.push(p);
    Ok(written)
}
