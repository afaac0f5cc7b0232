use std::path::Path;

use serde::Serialize;

use crate::config::Resolved;
use crate::error::{io_err, Result};

/// One CSV file held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub text: String,
}

impl CsvTable {
    /// Header row from the field names of `T`, one record per row.
    pub fn from_rows<T: Serialize>(
        name: impl Into<String>,
        header: &[&str],
        rows: &[T],
    ) -> Result<Self> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| io_err("buffering csv")(e.into_error()))?;
        Ok(Self {
            name: name.into(),
            text: String::from_utf8(bytes).expect("csv writes UTF-8"),
        })
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    seed: u64,
    outputs: Vec<&'a str>,
    config: &'a Resolved,
}

/// Writes every table plus `run.json` into `dir` (created if missing).
pub fn write_run(dir: &Path, resolved: &Resolved, tables: &[CsvTable]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    for t in tables {
        let path = dir.join(&t.name);
        std::fs::write(&path, &t.text).map_err(io_err(format!("writing {}", path.display())))?;
    }
    let manifest = Manifest {
        tool: "isac",
        version: env!("CARGO_PKG_VERSION"),
        experiment: resolved.experiment.name(),
        seed: resolved.seed,
        outputs: tables.iter().map(|t| t.name.as_str()).collect(),
        config: resolved,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    let path = dir.join("run.json");
    std::fs::write(&path, json).map_err(io_err(format!("writing {}", path.display())))?;
    Ok(())
}
