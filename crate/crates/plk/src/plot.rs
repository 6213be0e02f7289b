//! CSV plot series, one series per file.

use std::path::Path;

use crate::error::CliError;
use crate::io::write_atomic;

pub const SERIES: [&str; 3] = ["g-graph", "delta", "roots"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Series { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
    }
}

/// Checks a requested series name against those a verb can produce.
pub fn check_series(requested: &str, offered: &[&str]) -> Result<(), CliError> {
    if !SERIES.contains(&requested) {
        return Err(CliError::Usage(format!("unknown series {requested:?}; known: {}", SERIES.join(", "))));
    }
    if !offered.contains(&requested) {
        return Err(CliError::Usage(format!("this verb does not produce series {requested:?}")));
    }
    Ok(())
}

pub fn emit(series: &Series, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &series.to_csv()?)
}

/// `(x, g(x))` on `steps` evenly spaced points of `[lo, hi]`.
pub fn graph(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Series {
    let mut s = Series::new("g-graph", &["x", "g"]);
    for i in 0..steps {
        let x = lo + (hi - lo) * i as f64 / (steps - 1).max(1) as f64;
        s.push(vec![x, g(x)]);
    }
    s
}
