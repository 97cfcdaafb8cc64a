//! CSV, key-value reports, grid dumps and the run manifest.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

/// CSV text with a fixed header; numbers are written with 17 significant
/// digits so they read back exactly.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

/// One CSV cell.
pub enum Cell<'a> {
    Num(f64),
    Int(i64),
    Text(&'a str),
}

impl From<f64> for Cell<'_> {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl<'a> From<&'a str> for Cell<'a> {
    fn from(v: &'a str) -> Self {
        Cell::Text(v)
    }
}

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".into()
    }
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        assert_eq!(cells.len(), self.columns, "row width");
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Num(v) => num(*v),
                Cell::Int(i) => i.to_string(),
                Cell::Text(s) => s.to_string(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn nums(&mut self, values: &[f64]) {
        let cells: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
        self.row(&cells);
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Plain `key = value` report.
#[derive(Debug, Clone, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.put(key, num(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn finish(&self) -> String {
        self.lines.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k} = {v}");
            s
        })
    }
}

/// Grid dump: a header line then one line per slice, time first.
pub fn grid_dump(x_min: f64, dx: f64, slices: &[(f64, Vec<f64>)]) -> String {
    let n = slices.first().map_or(0, |s| s.1.len());
    let mut out = format!("# x_min = {} dx = {} n = {n}\n# t u_0 ... u_{{n-1}}\n", num(x_min), num(dx));
    for (t, cells) in slices {
        out.push_str(&num(*t));
        for c in cells {
            out.push(' ');
            out.push_str(&num(*c));
        }
        out.push('\n');
    }
    out
}

/// Git-style content hash: SHA-256 of `blob <len>\0<bytes>`, in hex.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0477214, 1e-300, 12345.678901234567] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["u", "kind"]);
        c.row(&[Cell::Num(1.0), Cell::Text("big")]);
        assert_eq!(c.finish(), "u,kind\n1.0000000000000000e0,big\n");
    }

    #[test]
    fn empty_blob_hash() {
        // git hash-object --object-format=sha256 on an empty file
        assert_eq!(blob_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }
}
