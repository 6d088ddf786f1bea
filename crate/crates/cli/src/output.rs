//! JSON and CSV rendering with floats at 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON whose floats print as `d.dddddddddddddddde±x`.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `null` for non-finite values, which JSON cannot represent.
pub fn format_float(value: f64) -> String {
    if value.is_finite() {
        // adding zero folds -0.0 into 0.0
        format!("{:.16e}", value + 0.0)
    } else {
        "null".to_string()
    }
}

/// One JSON document followed by a newline.
pub fn json_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    out
}

/// A CSV table; cells are preformatted strings.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        w.into_inner().expect("in-memory csv")
    }
}

/// A float cell; empty when not finite.
pub fn f(value: f64) -> String {
    if value.is_finite() {
        format_float(value)
    } else {
        String::new()
    }
}
