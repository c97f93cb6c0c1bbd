//! Tables with an embedded metadata header, written as CSV or JSON.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value as Json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce an output file.
#[derive(Clone, Debug)]
pub struct Meta {
    pub command: &'static str,
    pub config: Json,
    pub seed: Option<u64>,
}

impl Meta {
    fn to_json(&self) -> Json {
        json!({
            "tool": "sbn",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn to_json(&self) -> Json {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Empty => Json::Null,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub struct Report {
    pub meta: Meta,
    pub notes: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Nested results, emitted only in JSON.
    pub extra: Map<String, Json>,
}

impl Report {
    pub fn new(meta: Meta, columns: Vec<&'static str>) -> Self {
        Report { meta, notes: Vec::new(), columns, rows: Vec::new(), extra: Map::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&self.to_json())?;
                text.push('\n');
                Ok(text.into_bytes())
            }
        }
    }

    fn render_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut out = Vec::new();
        let m = &self.meta;
        writeln!(out, "# sbn {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", m.command)?;
        writeln!(out, "# config: {}", m.config)?;
        match m.seed {
            Some(s) => writeln!(out, "# seed: {s}")?,
            None => writeln!(out, "# seed: none")?,
        }
        for (k, v) in &self.notes {
            writeln!(out, "# note {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::to_field))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    fn to_json(&self) -> Json {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| Json::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.to_json())).collect()))
            .collect();
        let mut obj = Map::new();
        obj.insert("meta".into(), self.meta.to_json());
        if !self.notes.is_empty() {
            obj.insert("notes".into(), Json::Object(self.notes.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
        }
        if !self.columns.is_empty() {
            obj.insert("rows".into(), Json::Array(rows));
        }
        for (k, v) in &self.extra {
            obj.insert(k.clone(), v.clone());
        }
        Json::Object(obj)
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            s.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let meta = Meta { command: "test", config: json!({"k": 1}), seed: Some(5) };
        let mut r = Report::new(meta, vec!["name", "value"]);
        r.row(vec!["a,\"b\"".into(), 0.5.into()]);
        r.row(vec!["plain".into(), Cell::Empty]);
        r
    }

    #[test]
    fn csv_quotes_fields_and_embeds_header() {
        let text = String::from_utf8(report().render(Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "# command: test");
        assert_eq!(lines[2], "# config: {\"k\":1}");
        assert_eq!(lines[3], "# seed: 5");
        assert_eq!(&lines[4..], ["name,value", "\"a,\"\"b\"\"\",0.5", "plain,"]);
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let doc: Json = serde_json::from_slice(&report().render(Format::Json).unwrap()).unwrap();
        assert_eq!(doc["meta"]["seed"], 5);
        assert_eq!(doc["rows"][1], json!({"name": "plain", "value": null}));
    }
}
