//! Result tables and their CSV form.
//!
//! Layout: `# `-prefixed metadata lines, one header row, then data rows.
//! Numbers are written with the shortest representation that parses back
//! to the same `f64`, so reading a file returns the table bit for bit.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(field: &str) -> Self {
        match field.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(field.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

/// Shortest round-trip text for `v`; scientific notation outside
/// `[1e-5, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Comment lines, without the leading `# `.
    pub metadata: Vec<String>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if row.len() != self.columns.len() {
            return Err(CliError::Validation(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(bad) = row.iter().find_map(|c| c.as_f64().filter(|v| !v.is_finite())) {
            return Err(CliError::Validation(format!("non-finite value {bad} in result row")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_numbers(&mut self, row: &[f64]) -> Result<(), CliError> {
        self.push(row.iter().map(|&v| Cell::Num(v)).collect())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        // Writing into memory cannot fail.
        let _ = self.write_to(&mut buf);
        String::from_utf8(buf).unwrap_or_default()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in &self.metadata {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns).map_err(std::io::Error::other)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(std::io::Error::other)?;
        }
        w.flush()
    }

    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for line in text.as_bytes().split_inclusive(|&b| b == b'\n') {
            let s = String::from_utf8_lossy(line);
            match s.strip_prefix('#') {
                Some(rest) => {
                    let rest = rest.trim_end_matches(['\n', '\r']);
                    metadata.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
                    body_start += line.len();
                }
                None => break,
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(&text.as_bytes()[body_start..]);
        let columns = reader
            .headers()
            .map_err(|e| CliError::Parse(format!("csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for (n, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Parse(format!("csv row {}: {e}", n + 1)))?;
            rows.push(record.iter().map(Cell::parse).collect());
        }
        Ok(Self { columns, rows, metadata })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = std::fs::File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            text.push_str(&line);
            text.push('\n');
        }
        Self::parse_csv(&text)
    }
}

/// Writes `table` to `path`, creating parent directories.
pub fn write_csv(table: &ResultTable, path: &Path) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = std::fs::File::create(path).map_err(io)?;
    let mut out = std::io::BufWriter::new(file);
    table.write_to(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_rows_with_metadata() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.metadata.push("version: 1".into());
        t.push_numbers(&[1.0, -2.5]).unwrap();
        t.push_numbers(&[1e-300, 6.02e23]).unwrap();
        let text = t.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["# version: 1", "a,b", "1,-2.5", "1e-300,6.02e23"]);
        assert_eq!(ResultTable::parse_csv(&text).unwrap(), t);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new(&["x", "y"]);
        assert_eq!(t.to_csv_string(), "x,y\n");
        assert_eq!(ResultTable::parse_csv(&t.to_csv_string()).unwrap(), t);
    }

    #[test]
    fn rejects_ragged_and_non_finite_rows() {
        let mut t = ResultTable::new(&["x"]);
        assert!(t.push_numbers(&[1.0, 2.0]).is_err());
        assert!(t.push_numbers(&[f64::NAN]).is_err());
    }

    #[test]
    fn text_cells_survive() {
        let mut t = ResultTable::new(&["id", "passed", "measured"]);
        t.push(vec!["g0-closed-form".into(), true.into(), 3.5e-12.into()]).unwrap();
        assert_eq!(ResultTable::parse_csv(&t.to_csv_string()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_float(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
