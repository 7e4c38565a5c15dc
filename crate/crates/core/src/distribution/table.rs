use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// A CSV file held as strings: header row plus records.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    /// 1-based source line of each record, for diagnostics.
    lines: Vec<usize>,
}

impl RawTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Result<RawTable> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != headers.len()) {
            return Err(Error::parse(
                i + 2,
                format!("expected {} fields, found {}", headers.len(), r.len()),
            ));
        }
        let lines = (2..rows.len() + 2).collect();
        Ok(RawTable { headers, rows, lines })
    }

    /// Comma-separated, header row required, fields trimmed.
    pub fn from_reader(reader: impl Read) -> Result<RawTable> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv
            .headers()
            .map_err(|source| Error::Csv {
                context: "reading header".into(),
                source,
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|source| Error::Csv {
                context: "reading records".into(),
                source,
            })?;
            lines.push(record.position().map_or(0, |p| p.line() as usize));
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(RawTable { headers, rows, lines })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<RawTable> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        RawTable::from_reader(std::io::BufReader::new(file))
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn line(&self, row: usize) -> usize {
        self.lines[row]
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::validation(format!("unknown column `{name}`")))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }
}
