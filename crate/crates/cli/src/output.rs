//! CSV and JSON rendering with numbers at 12 significant digits.

use serde::Serialize;
use serde_json::{Map, Number, Value};

const SIG_DIGITS: usize = 12;

/// `%.12g`: fixed notation for decimal exponents in `[-4, 12)`, scientific
/// otherwise, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x: f64 = fmt_num(n.as_f64().unwrap_or(f64::NAN)).parse().unwrap_or(f64::NAN);
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable output");
    let mut s = serde_json::to_string_pretty(&round_value(v)).expect("json text");
    s.push('\n');
    s
}

/// A CSV cell from a scalar JSON value; objects are flattened by the caller.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_num(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        scalar => out.push((prefix.to_string(), cell(scalar))),
    }
}

/// Header plus one line per record; nested fields become dotted columns.
/// Records must share a shape.
pub fn records_to_csv<T: Serialize>(records: &[T]) -> String {
    let mut text = String::new();
    for (i, r) in records.iter().enumerate() {
        let mut cols = Vec::new();
        flatten("", &serde_json::to_value(r).expect("serializable output"), &mut cols);
        if i == 0 {
            text.push_str(&cols.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(","));
            text.push('\n');
        }
        text.push_str(&cols.iter().map(|(_, v)| v.as_str()).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    text
}

/// A fixed-header table for rows that may be partly empty.
pub struct Table {
    header: &'static [&'static str],
    rows: Vec<Map<String, Value>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Map<String, Value>) {
        debug_assert!(row.keys().all(|k| self.header.contains(&k.as_str()) || k == "error"));
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut text = self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            let line: Vec<String> = self
                .header
                .iter()
                .map(|k| row.get(*k).map_or_else(String::new, cell))
                .collect();
            text.push_str(&line.join(","));
            text.push('\n');
        }
        text
    }

    pub fn to_json(&self) -> String {
        to_json(&self.rows)
    }
}

/// JSON number for a float, `null` when not finite.
pub fn num(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(0.05 * 3.0), "0.15");
        assert_eq!(fmt_num(1234.5), "1234.5");
        assert_eq!(fmt_num(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_num(999999999999.9), "1e12");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.9e-5), "2.9e-5");
        assert_eq!(fmt_num(2.9e-4), "0.00029");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(to_json(&[1.0 / 3.0, f64::NAN]), "[\n  0.333333333333,\n  null\n]\n");
    }
}
