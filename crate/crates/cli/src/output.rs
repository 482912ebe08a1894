use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::commands::{Command, Outcome};
use crate::config::{ExperimentConfig, Format};

/// Marker line that ends a row file whose command failed.
pub const FAILED_MARKER: &str = "#failed";

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(outcome: &Outcome) -> String {
    let mut out = outcome.header.join(",");
    out.push('\n');
    for row in &outcome.rows {
        let line: Vec<String> = row.iter().map(cell).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    if let Some(f) = &outcome.failure {
        out.push_str(&format!(
            "{FAILED_MARKER}: {}\n",
            f.message().replace('\n', " ")
        ));
    }
    out
}

fn render_json_rows(outcome: &Outcome) -> String {
    let rows: Vec<Value> = outcome
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = outcome
                .header
                .iter()
                .zip(row)
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "rows": rows,
        "failed": outcome.failure.as_ref().map(|f| f.message()),
    });
    pretty(&doc)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Files written by one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub rows: PathBuf,
    pub summary: Option<PathBuf>,
    pub error: Option<PathBuf>,
}

/// Writes the row file, then `summary.json` on success or `error.json` on
/// failure, into the configured output directory.
pub fn write(command: Command, cfg: &ExperimentConfig, outcome: &Outcome) -> io::Result<Written> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let ext = match cfg.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let rows_path = dir.join(format!("{}.{ext}", command.name()));
    let body = match cfg.output.format {
        Format::Csv => render_csv(outcome),
        Format::Json => render_json_rows(outcome),
    };
    fs::write(&rows_path, body)?;
    let mut canonical = cfg.clone();
    canonical.output = Default::default();
    let head = json!({
        "command": command.name(),
        "version": shiftbc::VERSION,
        "config_hash": cfg.hash(),
    });
    match &outcome.failure {
        None => {
            let mut doc = head;
            doc["config"] = serde_json::to_value(&canonical).expect("config serializes");
            doc["result"] = outcome.summary.clone();
            let path = dir.join("summary.json");
            fs::write(&path, pretty(&doc))?;
            remove_if_present(&dir.join("error.json"))?;
            Ok(Written {
                rows: rows_path,
                summary: Some(path),
                error: None,
            })
        }
        Some(f) => {
            let mut doc = head;
            doc["error"] = json!({ "kind": f.kind(), "message": f.message() });
            doc["exit_code"] = json!(f.exit_code());
            if !outcome.summary.is_null() {
                doc["partial"] = outcome.summary.clone();
            }
            let path = dir.join("error.json");
            fs::write(&path, pretty(&doc))?;
            remove_if_present(&dir.join("summary.json"))?;
            Ok(Written {
                rows: rows_path,
                summary: None,
                error: Some(path),
            })
        }
    }
}

fn remove_if_present(path: &Path) -> io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}
