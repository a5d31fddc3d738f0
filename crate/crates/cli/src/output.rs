//! Tabular output with a provenance sidecar.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A cell: a float written with 17 significant digits, an integer, or text.
/// Missing floats are written as empty cells (CSV) or null (JSON).
#[derive(Debug, Clone)]
pub enum Cell {
    Float(Option<f64>),
    Int(u64),
    Text(String),
}

impl Cell {
    pub fn num(v: f64) -> Self {
        Cell::Float(v.is_finite().then_some(v))
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(Some(v)) => format!("{v:.16e}"),
            Cell::Float(None) => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(Some(v)) => Value::from(*v),
            Cell::Float(None) => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    fn write<W: Write>(&self, format: Format, mut w: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.to_json())?;
                writeln!(w)?;
                Ok(())
            }
        }
    }
}

/// Sidecar path for an output file: `<out>.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

/// Writes the table to `out` with its sidecar, or to stdout without one.
pub fn emit<M: Serialize>(table: &Table, format: Format, out: Option<&Path>, meta: &M) -> Result<()> {
    match out {
        None => table.write(format, io::stdout().lock()),
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write(format, io::BufWriter::new(file))?;
            let side = sidecar_path(path);
            let text = serde_json::to_string_pretty(meta)?;
            fs::write(&side, text + "\n").with_context(|| format!("writing {}", side.display()))?;
            Ok(())
        }
    }
}
