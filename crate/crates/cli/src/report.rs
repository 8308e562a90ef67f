use std::io::Write;

use relcausal::scalar::format_rational;
use relcausal::{Rational, Scalar};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// What a command produces: a JSON document, a table for CSV, and the
/// plain-text rendering. `failed` maps to exit code 1.
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub text: String,
    pub failed: bool,
}

impl Report {
    pub fn new(json: Value, text: impl Into<String>) -> Self {
        Report { json, header: Vec::new(), rows: Vec::new(), text: text.into(), failed: false }
    }

    pub fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|h| h.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn failed(mut self, failed: bool) -> Self {
        self.failed = failed;
        self
    }

    /// A JSON document that is emitted as JSON in text mode too.
    pub fn document(json: Value) -> Self {
        let text = serde_json::to_string_pretty(&json).expect("serializable");
        Report::new(json, text)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
        let mut out = Vec::new();
        match format {
            Format::Text => {
                out.extend_from_slice(self.text.as_bytes());
                if !self.text.ends_with('\n') {
                    out.push(b'\n');
                }
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.json)?;
                out.push(b'\n');
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
        }
        Ok(out)
    }

    pub fn emit(&self, format: Format, out: Option<&std::path::Path>) -> Result<(), Box<dyn std::error::Error>> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().write_all(&bytes)?,
        }
        Ok(())
    }
}

/// Floats with 12 significant digits, trailing zeros trimmed.
pub fn float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{:.11e}", x)
    };
    trim(s)
}

fn trim(s: String) -> String {
    let (mantissa, exp) = match s.find('e') {
        Some(i) => (s[..i].to_string(), s[i..].to_string()),
        None => (s, String::new()),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        mantissa
    };
    mantissa + &exp
}

pub fn scalar<T: Scalar>(v: &T) -> String {
    if T::EXACT {
        format_rational(&v.to_rational().expect("exact"))
    } else {
        float(v.as_f64())
    }
}

pub fn rational(v: &Rational) -> String {
    format_rational(v)
}

pub fn tuple(t: &[usize]) -> String {
    t.iter().map(|d| d.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(float(7.656854249492381), "7.65685424949");
        assert_eq!(float(0.5), "0.5");
        assert_eq!(float(-2.0), "-2");
        assert_eq!(float(1.234e-9), "1.234e-9");
        assert_eq!(float(0.0), "0");
    }

    #[test]
    fn csv_quoting() {
        let r = Report::new(Value::Null, "").table(&["name", "value"], vec![vec!["a,b".into(), "1/2".into()]]);
        assert_eq!(String::from_utf8(r.render(Format::Csv).unwrap()).unwrap(), "name,value\n\"a,b\",1/2\n");
    }
}
