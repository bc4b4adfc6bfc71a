//! Artifact formatting: CSV tables and JSON with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// `x` with 17 significant digits, or `NaN`/`inf`/`-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose floats are written like [`fmt17`].
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    serde::Serialize::serialize(value, &mut ser).expect("serialising a Value into memory cannot fail");
    out.push(b'\n');
    out
}

/// One CSV cell.
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Num(x) => fmt17(*x),
                Cell::Text(s) => s.clone(),
            }))
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// A named output file held in memory until the run writes it.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn csv(name: impl Into<String>, table: &Table) -> Self {
        Self {
            name: name.into(),
            bytes: table.to_bytes(),
        }
    }

    pub fn json(name: impl Into<String>, value: &Value) -> Self {
        Self {
            name: name.into(),
            bytes: json_bytes(value),
        }
    }

    pub fn sha256(&self) -> String {
        format!("{:x}", Sha256::digest(&self.bytes))
    }

    pub fn write_into(&self, dir: &Path) -> io::Result<()> {
        std::fs::write(dir.join(&self.name), &self.bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn json_floats_use_fixed_digits() {
        let text = String::from_utf8(json_bytes(&json!({"x": 0.5, "n": 3, "s": "a"}))).unwrap();
        assert!(text.contains("5.0000000000000000e-1"), "{text}");
        assert!(text.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"], 0.5);
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["a,b".into(), 1.5.into()]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(text, "name,value\n\"a,b\",1.5000000000000000e0\n");
    }
}
