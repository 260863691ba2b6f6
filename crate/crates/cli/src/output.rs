use std::io::{self, Write};

use crate::config::Output;

/// Significant digits in CSV and JSON; enough to round-trip any double.
pub const MACHINE_DIGITS: usize = 17;
pub const TEXT_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
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
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// `%.{digits}g`: fixed notation for decimal exponents in `[-5, digits)`,
/// scientific otherwise. `trim` drops trailing zeros of the mantissa.
pub fn format_g(v: f64, digits: usize, trim: bool) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = if trim { trim_zeros(mantissa) } else { mantissa.to_string() };
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, v);
    if trim {
        trim_zeros(&fixed)
    } else {
        fixed
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Num(v) => format_g(*v, MACHINE_DIGITS, false),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_g(*v, TEXT_DIGITS, true),
            Cell::Empty => "-".into(),
            other => other.machine(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Str(s) => serde_json::to_string(s).expect("string serialises"),
            Cell::Num(v) if v.is_finite() => format_g(*v, MACHINE_DIGITS, false),
            Cell::Num(_) | Cell::Empty => "null".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Rows sharing one fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Output, out: &mut impl Write) -> io::Result<()> {
        match format {
            Output::Csv => self.write_csv(out),
            Output::Json => self.write_json(out),
            Output::Text => self.write_text(out),
        }
    }

    fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::machine))?;
        }
        w.flush()
    }

    /// One JSON object per line, keys in header order.
    fn write_json(&self, out: &mut impl Write) -> io::Result<()> {
        for r in &self.rows {
            let mut line = String::from("{");
            for (j, (k, c)) in self.header.iter().zip(r).enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&serde_json::to_string(k)?);
                line.push(':');
                line.push_str(&c.json());
            }
            line.push('}');
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    fn write_text(&self, out: &mut impl Write) -> io::Result<()> {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = self
            .header
            .iter()
            .enumerate()
            .map(|(j, h)| cells.iter().map(|r| r[j].chars().count()).chain([h.len()]).max().unwrap_or(0))
            .collect();
        let line = |fields: Vec<&str>| -> String {
            fields
                .iter()
                .zip(&widths)
                .map(|(f, w)| format!("{f:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(self.header.clone()))?;
        for r in &cells {
            writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}
