use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, Result};

/// Labeled residual columns indexed by iteration. Columns may have
/// different lengths; missing cells are written empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTable {
    pub labels: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn new() -> Self {
        CurveTable {
            labels: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, column: Vec<f64>) {
        self.labels.push(label.into());
        self.columns.push(column);
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iteration".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.rows() {
            let mut row = vec![i.to_string()];
            for col in &self.columns {
                row.push(col.get(i).map(|v| format!("{v:e}")).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

impl Default for CurveTable {
    fn default() -> Self {
        Self::new()
    }
}
