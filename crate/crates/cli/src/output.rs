//! CSV tables and the run metadata file.

use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

/// Full double precision: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A rectangular table of pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().copied().map(fmt_f64).collect());
    }
}

/// Write `table` as UTF-8 CSV with a header row, in row order.
pub fn emit_csv(path: &Path, table: &Table) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub config_sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub quad_abs: f64,
    pub quad_rel: f64,
    pub quad_max_panels: usize,
    pub eta_ladder: [f64; 3],
    pub shell_nodes: usize,
    pub shell_convergence: f64,
    pub shell_measure: f64,
    pub momentum_grid: usize,
}

/// Contents of `metadata.json`. No timestamps, so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<C: Serialize> {
    pub scenario: String,
    pub cli_version: String,
    pub core_version: String,
    pub config_sha256: String,
    pub config: C,
    pub tolerances: Tolerances,
    pub outputs: Vec<OutputFile>,
}

pub fn write_metadata<C: Serialize>(path: &Path, meta: &Metadata<C>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&path, &Table::new(&["a", "b"])).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
    }

    #[test]
    fn one_cell_table_is_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["x"]);
        t.push_f64(&[0.1]);
        emit_csv(&path, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x\n1.0000000000000001e-1\n");
        let back: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn formatting_round_trips() {
        for x in [std::f64::consts::PI, -1e-300, 12.544058517699666, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
