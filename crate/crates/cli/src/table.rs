//! Homogeneous result tables and their CSV / JSON encodings.
//!
//! Reals are rounded to 12 significant digits before encoding, so both formats carry
//! the same values and re-parsing either one gives back identical doubles.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn real_text(x: f64) -> String {
    let r = round12(x);
    let a = r.abs();
    if r == 0.0 || (1e-4..1e15).contains(&a) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Real(v) => real_text(*v),
                Cell::Bool(v) => v.to_string(),
                Cell::Text(v) => v.clone(),
            }))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(name, c)| {
                        let v = match c {
                            Cell::Int(v) => Value::from(*v),
                            Cell::Real(v) => Number::from_f64(round12(*v)).map_or(Value::Null, Value::Number),
                            Cell::Bool(v) => Value::Bool(*v),
                            Cell::Text(v) => Value::String(v.clone()),
                        };
                        (name.to_string(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf)?,
            Format::Json => {
                buf = serde_json::to_vec_pretty(&self.to_json()).expect("json values serialize");
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["eta", "n", "q"]);
        t.push(vec![1.0.into(), 3usize.into(), 0.65625.into()]);
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(vec!["eta", "n", "q"]);
        assert_eq!(String::from_utf8(t.encode(Format::Csv).unwrap()).unwrap(), "eta,n,q\n");
        assert_eq!(t.to_json(), Value::Array(vec![]));
    }

    #[test]
    fn one_row_is_two_lines() {
        let csv = String::from_utf8(sample().encode(Format::Csv).unwrap()).unwrap();
        assert_eq!(csv, "eta,n,q\n1,3,0.65625\n");
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.1234567890123456), 0.123456789012);
        assert_eq!(round12(2.0 / 3.0), 0.666666666667);
        assert_eq!(real_text(1.23456789012345e-13), "1.23456789012e-13");
        assert_eq!(real_text(0.0), "0");
    }

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(vec!["x", "label", "ok"]);
        for x in [1.0 / 3.0, 1e-9 / 7.0, 12345.678901234567] {
            t.push(vec![x.into(), "fock:3".to_string().into(), true.into()]);
        }
        let csv = String::from_utf8(t.encode(Format::Csv).unwrap()).unwrap();
        let json: Value = serde_json::from_slice(&t.encode(Format::Json).unwrap()).unwrap();
        for (line, obj) in csv.lines().skip(1).zip(json.as_array().unwrap()) {
            let csv_x: f64 = line.split(',').next().unwrap().parse().unwrap();
            assert_eq!(Some(csv_x), obj["x"].as_f64());
            assert_eq!(obj["label"], "fock:3");
        }
    }
}
