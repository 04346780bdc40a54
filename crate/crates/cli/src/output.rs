//! Output documents: CSV with `# key=value` header lines and
//! `# table: name` separators, or one JSON object with a `config` field.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column values, by name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    fn to_json(&self) -> Value {
        json!({ "columns": self.columns, "rows": self.rows })
    }
}

/// Formats a cell value.
pub fn cell<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

#[derive(Clone, Debug)]
pub struct Document {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub result: Value,
}

impl Document {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Document { command: command.to_string(), config, tables: Vec::new(), result: Value::Null }
    }

    pub fn set_result<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        self.result = serde_json::to_value(value)?;
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# command={}\n", self.command));
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}={v}\n"));
        }
        for table in &self.tables {
            out.push_str(&format!("# table: {}\n", table.name));
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            out.push_str(&String::from_utf8(w.into_inner()?)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut config: serde_json::Map<String, Value> =
            self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        config.insert("command".into(), Value::String(self.command.clone()));
        let tables: serde_json::Map<String, Value> =
            self.tables.iter().map(|t| (t.name.clone(), t.to_json())).collect();
        let doc = json!({ "config": config, "result": self.result, "tables": tables });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// What the CSV reader recovers: the header config and the tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCsv {
    pub config: BTreeMap<String, String>,
    pub tables: Vec<Table>,
}

pub fn parse_csv(text: &str) -> anyhow::Result<ParsedCsv> {
    let mut config = BTreeMap::new();
    let mut tables = Vec::new();
    let mut current: Option<(String, String)> = None;
    let flush = |cur: Option<(String, String)>, tables: &mut Vec<Table>| -> anyhow::Result<()> {
        if let Some((name, body)) = cur {
            let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
            let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                rows.push(rec?.iter().map(String::from).collect());
            }
            tables.push(Table { name, columns, rows });
        }
        Ok(())
    };
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# table: ") {
            flush(current.take(), &mut tables)?;
            current = Some((name.to_string(), String::new()));
        } else if let Some(kv) = line.strip_prefix("# ") {
            if current.is_some() {
                anyhow::bail!("header line after the first table: {line}");
            }
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow::anyhow!("malformed header line: {line}"))?;
            config.insert(k.to_string(), v.to_string());
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        } else if !line.trim().is_empty() {
            anyhow::bail!("data outside a table: {line}");
        }
    }
    flush(current, &mut tables)?;
    Ok(ParsedCsv { config, tables })
}

/// Reads a JSON document back into its config and tables.
pub fn parse_json(text: &str) -> anyhow::Result<(BTreeMap<String, String>, Vec<Table>, Value)> {
    let v: Value = serde_json::from_str(text)?;
    let config = v["config"]
        .as_object()
        .ok_or_else(|| anyhow::anyhow!("missing config object"))?
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
        .collect();
    let mut tables = Vec::new();
    if let Some(obj) = v["tables"].as_object() {
        for (name, t) in obj {
            let strings = |x: &Value| -> Vec<String> {
                x.as_array()
                    .map(|a| a.iter().map(|s| s.as_str().unwrap_or_default().to_string()).collect())
                    .unwrap_or_default()
            };
            tables.push(Table {
                name: name.clone(),
                columns: strings(&t["columns"]),
                rows: t["rows"].as_array().map(|rs| rs.iter().map(strings).collect()).unwrap_or_default(),
            });
        }
    }
    Ok((config, tables, v["result"].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        let mut config = BTreeMap::new();
        config.insert("t".into(), "1,1".into());
        let mut d = Document::new("demo", config);
        let mut t = Table::new("words", &["word", "mass"]);
        t.push(vec!["(3,2)".into(), "0.5".into()]);
        t.push(vec!["(2)".into(), "1e-3".into()]);
        d.tables.push(t);
        d.tables.push(Table::new("empty", &["a"]));
        d
    }

    #[test]
    fn csv_round_trip() {
        let d = doc();
        let parsed = parse_csv(&d.to_csv().unwrap()).unwrap();
        assert_eq!(parsed.config["command"], "demo");
        assert_eq!(parsed.config["t"], "1,1");
        assert_eq!(parsed.tables, d.tables);
    }

    #[test]
    fn json_round_trip() {
        let d = doc();
        let (config, tables, _) = parse_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(config["t"], "1,1");
        let mut expect = d.tables.clone();
        expect.sort_by(|a, b| a.name.cmp(&b.name));
        assert_eq!(tables, expect);
    }
}
