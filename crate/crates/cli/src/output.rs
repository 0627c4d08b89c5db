//! Tabular results and their CSV / JSON renderings.

use std::io::Write;

use serde_json::{json, Map, Value};

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i128),
    /// Exact integer too large for `i128`, in decimal.
    Big(String),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Big(s) | Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => match i64::try_from(*v) {
                Ok(i) => json!(i),
                Err(_) => Value::String(v.to_string()),
            },
            Cell::Big(s) | Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Result of a command: a table plus context for the JSON envelope.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra CSV rows after the data (for instance the `tail_mass` line).
    pub footer: Vec<Vec<Cell>>,
    /// Keys added to the JSON `values` object next to `rows`.
    pub extras: Map<String, Value>,
    pub params: Value,
    pub inputs: Value,
    pub tolerances: Value,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            params: Value::Null,
            inputs: json!({}),
            tolerances: json!({}),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .flexible(true)
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in self.rows.iter().chain(&self.footer) {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_owned(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut values = Map::new();
        values.insert("rows".into(), Value::Array(rows));
        values.extend(self.extras.clone());
        json!({
            "command": self.command,
            "params": self.params,
            "inputs": self.inputs,
            "values": values,
            "meta": {
                "tolerances": self.tolerances,
                "seed": self.seed,
                "version": env!("CARGO_PKG_VERSION"),
            },
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("pmf", &["n", "probability"]);
        r.push(vec![0usize.into(), 0.1.into()]);
        r.push(vec![1usize.into(), (1.0 / 3.0).into()]);
        r.footer.push(vec!["tail_mass".into(), 1e-17.into()]);
        r.extras.insert("tail_mass".into(), json!(1e-17));
        r
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,probability\n0,1.0000000000000001e-1\n1,3.3333333333333331e-1\ntail_mass,1.0000000000000001e-17\n"
        );
    }

    #[test]
    fn csv_values_parse_back_exactly() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-200, 123456789.123456789] {
            let s = Cell::Real(v).csv();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_envelope() {
        let v = sample().to_json();
        assert_eq!(v["values"]["rows"][1]["probability"], json!(1.0 / 3.0));
        assert_eq!(v["values"]["tail_mass"], json!(1e-17));
        assert!(v["meta"]["seed"].is_null());
        assert!(v["meta"]["tolerances"].is_object());
        assert_eq!(Cell::Real(f64::NAN).json(), Value::Null);
        assert_eq!(Cell::Int(1 << 70).json(), json!("1180591620717411303424"));
    }
}
