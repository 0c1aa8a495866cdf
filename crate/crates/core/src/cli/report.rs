//! Report rendering (table, CSV, JSON) and atomic output.
//!
//! Every report starts with the tool version, the command, and the SHA-256
//! of its inputs. Floats are printed with 17 significant digits so values
//! round-trip exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected table, csv or json)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Str(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Str(s) => serde_json::to_string(s).expect("string serialization"),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => fmt_f64(*x),
            Cell::Float(_) | Cell::Empty => "null".into(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub input_hash: String,
    pub meta: Vec<(String, Cell)>,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(command: &str, input_hash: String) -> Self {
        Self {
            command: command.to_string(),
            input_hash,
            meta: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.to_string(), value.into()));
    }

    fn header(&self) -> Vec<(String, Cell)> {
        let mut h = vec![
            ("tool".to_string(), Cell::from(format!("gbsim {}", crate::VERSION))),
            ("command".to_string(), Cell::from(self.command.as_str())),
            ("input_sha256".to_string(), Cell::from(self.input_hash.as_str())),
        ];
        h.extend(self.meta.iter().cloned());
        h
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.header() {
            let _ = writeln!(out, "# {k}: {}", v.text());
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.name);
            let cells: Vec<Vec<String>> = s.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
            let widths: Vec<usize> = s
                .columns
                .iter()
                .enumerate()
                .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            let line = |items: &[String]| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(x, w)| format!("{x:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let _ = writeln!(out, "{}", line(&s.columns));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.header() {
            let _ = writeln!(out, "# {k}: {}", v.text());
        }
        let multi = self.sections.len() > 1;
        for s in &self.sections {
            if multi {
                let _ = writeln!(out, "# section: {}", s.name);
            }
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&s.columns).expect("in-memory csv");
            for r in &s.rows {
                w.write_record(r.iter().map(Cell::text)).expect("in-memory csv");
            }
            let bytes = w.into_inner().expect("in-memory csv");
            out.push_str(std::str::from_utf8(&bytes).expect("csv output is UTF-8"));
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = String::from("{\n");
        for (k, v) in self.header() {
            let _ = writeln!(out, "  {}: {},", Cell::from(k).json(), v.json());
        }
        out.push_str("  \"sections\": [");
        for (i, s) in self.sections.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let cols: Vec<String> = s.columns.iter().map(|c| Cell::from(c.as_str()).json()).collect();
            let _ = write!(
                out,
                "    {{\n      \"name\": {},\n      \"columns\": [{}],\n      \"rows\": [",
                Cell::from(s.name.as_str()).json(),
                cols.join(", ")
            );
            for (j, r) in s.rows.iter().enumerate() {
                out.push_str(if j == 0 { "\n" } else { ",\n" });
                let vals: Vec<String> = r.iter().map(Cell::json).collect();
                let _ = write!(out, "        [{}]", vals.join(", "));
            }
            out.push_str(if s.rows.is_empty() { "]\n    }" } else { "\n      ]\n    }" });
        }
        out.push_str(if self.sections.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }
}

/// Writes `contents` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("prob", "ab".repeat(32));
        r.meta("modes", 2usize);
        let mut s = Section::new("probabilities", &["pattern", "n", "probability"]);
        s.push(vec!["0,1".into(), 1usize.into(), 0.25.into()]);
        s.push(vec!["1,1".into(), 2usize.into(), Cell::Empty]);
        r.sections.push(s);
        r
    }

    #[test]
    fn json_is_valid_and_keeps_digits() {
        let text = sample().render(Format::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["sections"][0]["rows"][0][2].as_f64(), Some(0.25));
        assert!(v["sections"][0]["rows"][1][2].is_null());
        assert!(text.contains("2.5000000000000000e-1"));
        assert_eq!(v["command"], "prob");
    }

    #[test]
    fn csv_quotes_pattern_strings() {
        let text = sample().render(Format::Csv);
        assert!(text.contains("pattern,n,probability\n\"0,1\",1,2.5000000000000000e-1\n"));
        assert!(text.starts_with("# tool: gbsim "));
    }

    #[test]
    fn table_aligns_columns() {
        let text = sample().render(Format::Table);
        assert!(text.contains("[probabilities]\npattern  n  probability\n0,1      1  2.5000000000000000e-1\n"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
