//! Record tables with a provenance header, written as CSV (commented
//! header block) or JSON (meta + records). Floats are printed at 17
//! significant digits so identical runs produce byte-identical files.

use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{CliError, OutFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColKind {
    Int,
    Real,
    Str,
    Bool,
    Complex,
}

#[derive(Debug, Clone)]
pub struct Col {
    pub name: String,
    pub kind: ColKind,
}

pub fn col(name: impl Into<String>, kind: ColKind) -> Col {
    Col {
        name: name.into(),
        kind,
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    I(i64),
    F(f64),
    S(String),
    B(bool),
    C(Complex64),
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Col>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<Col>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Meta {
    pub seed: u64,
    pub config_toml: String,
}

impl Meta {
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.config_toml.as_bytes()))
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(meta: &Meta, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# tool krein {}\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# config-sha256 {}\n", meta.config_hash()));
    out.push_str(&format!("# seed {}\n", meta.seed));
    for line in meta.config_toml.lines() {
        out.push_str("# config ");
        out.push_str(line);
        out.push('\n');
    }
    let mut header = Vec::new();
    for c in &table.columns {
        match c.kind {
            ColKind::Complex => {
                header.push(format!("{}_re", c.name));
                header.push(format!("{}_im", c.name));
            }
            _ => header.push(c.name.to_string()),
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut fields = Vec::new();
        for cell in row {
            match cell {
                Cell::I(v) => fields.push(v.to_string()),
                Cell::F(v) => fields.push(fmt_f64(*v)),
                Cell::S(v) => fields.push(csv_escape(v)),
                Cell::B(v) => fields.push(v.to_string()),
                Cell::C(v) => {
                    fields.push(fmt_f64(v.re));
                    fields.push(fmt_f64(v.im));
                }
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn render_json(meta: &Meta, table: &Table) -> String {
    let config_value: Value = toml::from_str::<toml::Value>(&meta.config_toml)
        .ok()
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or(Value::Null);
    let records: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (c, cell) in table.columns.iter().zip(row) {
                let v = match cell {
                    Cell::I(v) => json!(v),
                    Cell::F(v) => json!(v),
                    Cell::S(v) => json!(v),
                    Cell::B(v) => json!(v),
                    Cell::C(v) => json!({"re": v.re, "im": v.im}),
                };
                obj.insert(c.name.to_string(), v);
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "meta": {
            "tool": "krein",
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": meta.config_hash(),
            "seed": meta.seed,
            "config": config_value,
        },
        "records": records,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json render");
    s.push('\n');
    s
}

pub fn write_table(
    path: &Path,
    format: OutFormat,
    meta: &Meta,
    table: &Table,
) -> Result<(), CliError> {
    let body = match format {
        OutFormat::Csv => render_csv(meta, table),
        OutFormat::Json => render_json(meta, table),
    };
    std::fs::write(path, body)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}
