//! Tables with a self-describing header, rendered as CSV or JSON.
//!
//! CSV output starts with `#` lines carrying the artifact version, the
//! command, the fully resolved configuration (as JSON), the provenance of
//! every column and the outcome of every check, followed by a header row and
//! the data. JSON output carries the same information with the rows as an
//! array of objects keyed by column name.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, value: f64, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, value, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub provenance: String,
}

impl Column {
    pub fn new(name: impl Into<String>, provenance: impl Into<String>) -> Self {
        Self { name: name.into(), provenance: provenance.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    pub checks: Vec<Check>,
    /// Command-specific JSON appended to the JSON output (and as a `#`
    /// comment in CSV).
    pub extra: Option<(String, Value)>,
}

impl Report {
    pub fn new(command: &str, config: Map<String, Value>) -> Self {
        Self { command: command.into(), config, columns: vec![], rows: vec![], checks: vec![], extra: None }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| !c.passed)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# isocube {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "# command: {}", self.command).unwrap();
        writeln!(out, "# config: {}", Value::Object(self.config.clone())).unwrap();
        let prov: Vec<String> = self.columns.iter().map(|c| format!("{}={}", c.name, c.provenance)).collect();
        writeln!(out, "# provenance: {}", prov.join(",")).unwrap();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "# check: {} {status} value={} {}", c.name, c.value, c.detail).unwrap();
        }
        if let Some((key, value)) = &self.extra {
            writeln!(out, "# {key}: {value}").unwrap();
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .enumerate()
                .map(|(i, (v, col))| csv_cell(v, i == 0 && col.name == "lambda"))
                .collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().map(|c| c.name.clone()).zip(row.iter().cloned()).collect()))
            .collect();
        let provenance: Map<String, Value> =
            self.columns.iter().map(|c| (c.name.clone(), Value::String(c.provenance.clone()))).collect();
        let mut doc = json!({
            "artifact": "isocube",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "provenance": provenance,
            "checks": self.checks,
            "rows": rows,
        });
        if let Some((key, value)) = &self.extra {
            doc[key.as_str()] = value.clone();
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialises");
        text.push('\n');
        text
    }
}

/// `x` in plain decimal notation with 12 significant digits.
pub fn decimal12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_cell(v: &Value, is_lambda: bool) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if is_lambda => decimal12(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(decimal12(0.5), "0.500000000000");
        assert_eq!(decimal12(0.01), "0.0100000000000");
        assert_eq!(decimal12(1.0), "1.00000000000");
        assert_eq!(decimal12(0.0), "0");
        assert_eq!(decimal12(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn csv_and_json_agree() {
        let mut r = Report::new("profile", Map::new());
        r.columns = vec![Column::new("lambda", "grid"), Column::new("candidate_d2", "candidate")];
        r.rows = vec![vec![json!(0.25), json!(0.886)], vec![json!(0.5), Value::Null]];
        r.checks.push(Check::new("dominance", true, 0.0, "ok"));
        let csv = r.render(Format::Csv);
        assert!(csv.contains("# provenance: lambda=grid,candidate_d2=candidate"));
        assert!(csv.contains("lambda,candidate_d2\n0.250000000000,0.886\n0.500000000000,\n"));
        let json: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(json["rows"][0]["candidate_d2"], 0.886);
        assert_eq!(json["rows"][1]["candidate_d2"], Value::Null);
        assert_eq!(json["checks"][0]["passed"], true);
        assert!(!r.failed());
    }
}
