use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A finished report: the JSON text and, for CSV output, a table.
pub struct Report {
    json: String,
    table: Table,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    /// CSV rendering is a `key,value` listing of the flattened JSON.
    pub fn new<T: Serialize>(body: &T) -> Self {
        let value = serde_json::to_value(body).expect("serializable report");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        Report { json: serde_json::to_string(body).expect("serializable report"), table: Table { header: vec!["key", "value"], rows } }
    }

    pub fn with_table<T: Serialize>(body: &T, table: Table) -> Self {
        Report { json: serde_json::to_string(body).expect("serializable report"), table }
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => writeln!(out, "{}", self.json),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                w.flush()
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let key = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) if !items.is_empty() => {
            items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows))
        }
        Value::Array(_) => rows.push(vec![prefix.to_owned(), String::new()]),
        Value::String(s) => rows.push(vec![prefix.to_owned(), s.clone()]),
        Value::Null => rows.push(vec![prefix.to_owned(), String::new()]),
        other => rows.push(vec![prefix.to_owned(), other.to_string()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_flattens_nested_values() {
        let r = Report::new(&serde_json::json!({"a": {"b": ["1/2", "1"]}, "ok": true}));
        let mut buf = Vec::new();
        r.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\na.b.0,1/2\na.b.1,1\nok,true\n");
    }
}
