//! Structured key-value reports and dense matrix text.
//!
//! Reports are written in a TOML-compatible layout with stable key order
//! and every float printed with 12 significant digits, so they can be read
//! back with any TOML parser.

use std::fmt::Write as _;

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Array(Vec<Value>),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(v: Vec<T>) -> Self {
        Value::Array(v.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, Value)>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Section {
            name: name.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

/// An ordered list of sections. A section with an empty name holds
/// top-level keys and must come first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, section: Section) -> &mut Self {
        self.sections.push(section);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if !s.name.is_empty() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{}]", s.name);
            }
            for (k, v) in &s.entries {
                let _ = writeln!(out, "{k} = {}", render_value(v));
            }
        }
        out
    }

    /// Parses rendered text back into a TOML table.
    pub fn parse(text: &str) -> Result<toml::Table, toml::de::Error> {
        text.parse::<toml::Table>()
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => fmt_float(*x),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => format!("{s:?}"),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(render_value).collect();
            format!("[{}]", inner.join(", "))
        }
    }
}

/// 12 significant digits, `%g`-style, always a valid TOML float.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        };
        if trimmed.contains('.') {
            trimmed
        } else {
            format!("{trimmed}.0")
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

/// `rows cols` header then one row per line, shortest round-trip decimals.
pub fn write_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("missing matrix header")?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad dimension `{t}`")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err("matrix header must be `rows cols`".into());
    };
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines.by_ref().take(rows) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad entry `{t}`")))
            .collect::<Result<_, _>>()?;
        if row.len() != cols {
            return Err(format!("expected {cols} entries per row"));
        }
        data.extend(row);
    }
    if data.len() != rows * cols {
        return Err(format!("expected {rows} rows"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(18440.0), "18440.0");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_float(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_float(0.0), "0.0");
        assert_eq!(fmt_float(123456789012.0), "123456789012.0");
    }

    #[test]
    fn rendered_report_parses_as_toml() {
        let mut r = Report::new();
        let mut top = Section::new("");
        top.push("command", "lines").push("seed", 7u64);
        let mut s = Section::new("spectrum");
        s.push("groups", Value::Array(vec![Value::Array(vec![3.0.into(), 1usize.into()])]))
            .push("ok", true)
            .push("tiny", 1e-12);
        r.add(top).add(s);
        let t = Report::parse(&r.render()).unwrap();
        assert_eq!(t["command"].as_str(), Some("lines"));
        assert_eq!(t["spectrum"]["tiny"].as_float(), Some(1e-12));
        assert_eq!(t["spectrum"]["groups"][0][1].as_integer(), Some(1));
    }

    #[test]
    fn matrix_text_round_trips() {
        let m = DMatrix::from_row_slice(2, 3, &[0.1, -1.0 / 3.0, 5e-300, 1.0, 0.0, -7.25]);
        let back = parse_matrix(&write_matrix(&m)).unwrap();
        assert_eq!(m, back);
        assert!(parse_matrix("2 2\n1 2\n").is_err());
    }
}
