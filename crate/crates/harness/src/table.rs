use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const CSV_HEADER: &str = "method,group,mean,std,repeats";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Pretty,
}

impl std::str::FromStr for TableFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "pretty" => Ok(TableFormat::Pretty),
            _ => Err(HarnessError::Config(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub group: String,
    pub mean: f64,
    /// Sample standard deviation across repeats.
    pub std: f64,
    pub repeats: usize,
}

/// Method × group cells, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<TableRow>,
}

/// Pairwise summation, so the result does not depend on how the values were
/// produced but only on their order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0)).sqrt())
}

impl ResultTable {
    /// Adds a cell from its per-repeat values.
    pub fn push(&mut self, method: &str, group: &str, per_repeat: &[f64]) {
        let (mean, std) = if per_repeat.is_empty() { (f64::NAN, f64::NAN) } else { mean_std(per_repeat) };
        self.rows.push(TableRow {
            method: method.to_string(),
            group: group.to_string(),
            mean,
            std,
            repeats: per_repeat.len(),
        });
    }

    pub fn cell(&self, method: &str, group: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.method == method && r.group == group)
    }

    pub fn methods(&self) -> Vec<&str> {
        unique(self.rows.iter().map(|r| r.method.as_str()))
    }

    pub fn groups(&self) -> Vec<&str> {
        unique(self.rows.iter().map(|r| r.group.as_str()))
    }

    /// True when every cell aggregates the same number of repeats.
    pub fn is_balanced(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].repeats == w[1].repeats)
    }

    pub fn emit(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Pretty => self.to_pretty(),
        }
    }

    /// Full-precision CSV; `parse_csv` reads it back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.method, r.group, r.mean, r.std, r.repeats);
        }
        out
    }

    /// Methods as rows, groups as columns, three decimals.
    pub fn to_pretty(&self) -> String {
        let groups = self.groups();
        let methods = self.methods();
        let name_w = methods.iter().map(|m| m.len()).max().unwrap_or(0).max("method".len());
        let cell_w = 13;
        let mut out = format!("{:<name_w$}", "method");
        for g in &groups {
            let _ = write!(out, "  {g:>cell_w$}");
        }
        out.push('\n');
        let _ = writeln!(out, "{}", "-".repeat(name_w + groups.len() * (cell_w + 2)));
        for m in &methods {
            let _ = write!(out, "{m:<name_w$}");
            for g in &groups {
                let text = match self.cell(m, g) {
                    Some(c) if c.repeats > 1 => format!("{:.3} ± {:.3}", c.mean, c.std),
                    Some(c) => format!("{:.3}", c.mean),
                    None => "-".into(),
                };
                let _ = write!(out, "  {text:>cell_w$}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| HarnessError::Data(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.join(",") != CSV_HEADER {
            return Err(HarnessError::Data(format!("unexpected table header {:?}", header.join(","))));
        }
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<TableRow>, _>>()
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        Ok(Self { rows })
    }
}

fn unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_csv_has_two_lines() {
        let mut t = ResultTable::default();
        t.push("ranking_pursuit", "20-40", &[0.41]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().nth(1).unwrap(), "ranking_pursuit,20-40,0.41,0,1");
    }

    #[test]
    fn pretty_uses_three_decimals() {
        let mut t = ResultTable::default();
        t.push("rls", "20-40", &[0.4251]);
        t.push("rls", "40-60", &[0.41, 0.43]);
        let text = t.to_pretty();
        assert!(text.contains("0.425"), "{text}");
        assert!(!text.contains("0.4251"));
        assert!(text.contains("0.420 ± 0.014"), "{text}");
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[1.0, 2.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }

    #[test]
    fn header_is_checked() {
        assert!(ResultTable::parse_csv("a,b\n1,2\n").is_err());
        assert_eq!(ResultTable::parse_csv(&format!("{CSV_HEADER}\n")).unwrap(), ResultTable::default());
    }
}
