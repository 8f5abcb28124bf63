//! CSV and manifest writers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Free text made safe for a CSV cell.
pub fn text(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// Comma-separated table with a `#`-prefixed header of `name [unit]`.
pub struct Table {
    buf: String,
    width: usize,
}

impl Table {
    pub fn new(columns: &[(String, &str)]) -> Self {
        let head: Vec<String> = columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        Self { buf: format!("# {}\n", head.join(",")), width: columns.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.buf)
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

/// Unit label for a swept parameter.
pub fn unit_of(param: &str) -> &'static str {
    match param {
        "r_s" | "r_b" | "t_s" | "t_b" => "omega",
        _ => "1",
    }
}
