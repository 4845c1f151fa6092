//! Locale-free CSV and JSON emission at 12 significant digits.

use serde_json::{Map, Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub const BOUND_COLUMNS: [&str; 7] = ["n", "epsilon", "test_class", "beta", "bound_bits", "rate_bits_per_use", "wall_ms"];

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest of fixed or scientific notation carrying 12 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value a reader recovers from the serialized form.
pub fn rounded(v: f64) -> f64 {
    format_number(v).parse().expect("formatted numbers parse")
}

impl Cell {
    fn to_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(v) => Number::from_f64(rounded(*v)).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_text).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// An array of row objects keyed by column name, in column order.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("table serializes");
        s.push('\n');
        s
    }
}

/// One parsed row of the bound CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub n: usize,
    pub epsilon: f64,
    pub test_class: String,
    pub beta: f64,
    pub bound_bits: f64,
    pub rate_bits_per_use: f64,
    pub wall_ms: f64,
}

/// Reads CSV emitted for the bound columns back into rows.
pub fn parse_bound_csv(text: &str) -> Result<Vec<BoundRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    if header != BOUND_COLUMNS.join(",") {
        return Err(format!("unexpected header {header:?}"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != BOUND_COLUMNS.len() {
                return Err(format!("row {i}: expected {} fields, found {}", BOUND_COLUMNS.len(), f.len()));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|e| format!("row {i} column {}: {e}", BOUND_COLUMNS[k]));
            Ok(BoundRow {
                n: f[0].parse().map_err(|e| format!("row {i} column n: {e}"))?,
                epsilon: num(1)?,
                test_class: f[2].to_string(),
                beta: num(3)?,
                bound_bits: num(4)?,
                rate_bits_per_use: num(5)?,
                wall_ms: num(6)?,
            })
        })
        .collect()
}
