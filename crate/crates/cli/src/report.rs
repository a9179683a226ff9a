//! Rendering of command results as an aligned table, `#schema=1` CSV or
//! pretty JSON. JSON keys are sorted, so equal inputs give equal bytes.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

pub const CSV_SCHEMA: &str = "#schema=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    body: Value,
    summary: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Long per-trial listings stay out of the table view.
    rows_in_table: bool,
    /// `Some` only for `verify` runs.
    violations: Option<usize>,
}

impl Report {
    pub fn new(command: impl Into<String>, body: impl Serialize) -> Self {
        Report {
            command: command.into(),
            body: serde_json::to_value(body).expect("report body serialises"),
            summary: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            rows_in_table: true,
            violations: None,
        }
    }

    /// Replaces the JSON body, keeping the table and CSV layout.
    pub fn with_body(mut self, body: impl Serialize) -> Self {
        self.body = serde_json::to_value(body).expect("report body serialises");
        self
    }

    pub fn line(mut self, key: &str, value: impl ToString) -> Self {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }

    pub fn columns(mut self, names: &[&str]) -> Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn owned_columns(mut self, names: Vec<String>) -> Self {
        self.columns = names;
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn hide_rows_in_table(mut self) -> Self {
        self.rows_in_table = false;
        self
    }

    pub fn violations(mut self, count: usize) -> Self {
        self.violations = Some(count);
        self
    }

    pub fn violation_count(&self) -> Option<usize> {
        self.violations
    }

    pub fn render(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => self.render_json(out),
            Format::Csv => self.render_csv(out),
            Format::Table => self.render_table(out),
        }
    }

    fn render_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut doc = serde_json::Map::new();
        doc.insert("command".into(), Value::String(self.command.clone()));
        doc.insert("result".into(), self.body.clone());
        if let Some(v) = self.violations {
            doc.insert("violations".into(), Value::from(v));
        }
        serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
        writeln!(out)
    }

    /// Summary-only reports become a single row of their summary values.
    fn render_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        if self.columns.is_empty() {
            w.write_record(self.summary.iter().map(|(k, _)| k))?;
            w.write_record(self.summary.iter().map(|(_, v)| v))?;
        } else {
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
        }
        w.flush()
    }

    fn render_table(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let key_width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.summary {
            writeln!(out, "{k:<key_width$}  {v}")?;
        }
        if !self.rows_in_table || self.columns.is_empty() {
            return Ok(());
        }
        if !self.summary.is_empty() {
            writeln!(out)?;
        }
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| {
                self.rows
                    .iter()
                    .map(|r| r[i].chars().count())
                    .chain([self.columns[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(&self.columns))?;
        writeln!(out, "{}", line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()))?;
        for r in &self.rows {
            writeln!(out, "{}", line(r))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", serde_json::json!({"b": 1.5, "a": [1, 2]}))
            .line("value", 3)
            .columns(&["eps", "number"]);
        r.row(vec!["0.1".into(), "4".into()]);
        r.row(vec!["0.25".into(), "2".into()]);
        r
    }

    fn render(r: &Report, f: Format) -> String {
        let mut buf = Vec::new();
        r.render(f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_carries_schema_line() {
        let text = render(&sample(), Format::Csv);
        assert_eq!(text, "#schema=1\neps,number\n0.1,4\n0.25,2\n");
        let summary_only = Report::new("x", 1).line("vc", 2).line("certificate", "{1, 2}");
        assert_eq!(render(&summary_only, Format::Csv), "#schema=1\nvc,certificate\n2,\"{1, 2}\"\n");
    }

    #[test]
    fn json_keys_are_sorted_and_stable() {
        let text = render(&sample().violations(0), Format::Json);
        let a = text.find("\"a\"").unwrap();
        let b = text.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(text.contains("\"violations\": 0"));
        assert_eq!(text, render(&sample().violations(0), Format::Json));
    }

    #[test]
    fn table_aligns_columns() {
        let text = render(&sample(), Format::Table);
        assert!(text.starts_with("value  3\n\neps   number\n----  ------\n0.1   4\n"), "{text}");
        let hidden = render(&sample().hide_rows_in_table(), Format::Table);
        assert_eq!(hidden, "value  3\n");
    }
}
