//! CSV tables and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "1";

/// Fixed-precision number, independent of locale.
pub fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    match s.strip_prefix('-') {
        // Tiny negatives round to "-0.000000000".
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

#[derive(Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let line = |fields: &[String]| fields.iter().map(|f| quote(f)).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{}", line(&self.header));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Where the table and the manifest go.
pub struct Sink {
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

impl Sink {
    /// The manifest defaults to `<output>.manifest.json` when writing to a file.
    pub fn new(output: Option<PathBuf>, manifest: Option<PathBuf>) -> Self {
        let manifest = manifest.or_else(|| {
            output.as_ref().map(|o| {
                let mut name = o.clone().into_os_string();
                name.push(".manifest.json");
                PathBuf::from(name)
            })
        });
        Sink { output, manifest }
    }

    pub fn write_table(&self, table: &Table) -> Result<()> {
        let text = table.render();
        match &self.output {
            Some(p) => write_file(p, &text),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    pub fn write_manifest(&self, manifest: &Value) -> Result<()> {
        if let Some(p) = &self.manifest {
            let mut text = serde_json::to_string_pretty(manifest)?;
            text.push('\n');
            write_file(p, &text)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub struct ManifestInput<'a> {
    pub command: &'a str,
    pub argv: &'a [String],
    pub flags: Value,
    pub seed: u64,
    pub threads: usize,
    pub grid_resolution: Option<usize>,
    pub rows: usize,
    pub results: Value,
    pub wall_time: f64,
}

pub fn manifest(input: ManifestInput<'_>) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": input.command,
        "argv": input.argv,
        "flags": input.flags,
        "seed": input.seed,
        "threads": input.threads,
        "grid_resolution": input.grid_resolution,
        "rows": input.rows,
        "results": input.results,
        "wall_time_seconds": input.wall_time,
    })
}
