//! CSV tables with a mandatory header and 17 significant digits.

use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Na,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Na => "NA".to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        buf
    }
}

/// Header and string records of a CSV file.
pub fn read_table(r: impl Read) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Column `name` of a table read back with [`read_table`], as floats;
/// `NA` becomes `None`.
pub fn float_column(header: &[String], rows: &[Vec<String>], name: &str) -> Result<Vec<Option<f64>>> {
    let j = header.iter().position(|h| h == name).ok_or_else(|| Error::argument(format!("no column '{name}'")))?;
    rows.iter()
        .map(|r| match r[j].as_str() {
            "NA" => Ok(None),
            s => s.parse().map(Some).map_err(|_| Error::argument(format!("'{s}' in column '{name}' is not a number"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_na() {
        let mut t = Table::new(&["level", "h", "rate"]);
        t.push(vec![0usize.into(), 0.5.into(), Cell::Na]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(text, "level,h,rate\r\n0,5.0000000000000000e-1,NA\r\n");
        let (h, rows) = read_table(text.as_bytes()).unwrap();
        assert_eq!(float_column(&h, &rows, "rate").unwrap(), vec![None]);
        assert!(float_column(&h, &rows, "missing").is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let mut t = Table::new(&["v"]);
            t.push(vec![v.into()]);
            let (h, rows) = read_table(&t.to_bytes()[..]).unwrap();
            prop_assert_eq!(float_column(&h, &rows, "v").unwrap()[0].unwrap().to_bits(), v.to_bits());
        }
    }
}
