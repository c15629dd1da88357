//! CSV artifacts with a `#` comment header, and plot-data tables.

use std::path::{Path, PathBuf};

use frobrace::bias::{char_function, BiasModel};
use frobrace::race::{EmpiricalDensity, RaceSeries};
use frobrace::zeros::atomic_write;

use crate::CliError;

/// Header comment entries; every artifact of a run shares them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }
}

/// A CSV table with a stable column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// A named output file: header comments followed by a CSV body.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub body: String,
}

impl Artifact {
    pub fn table(file: &str, table: &Table) -> Result<Self, CliError> {
        Ok(Artifact { file: file.to_string(), body: table.to_csv()? })
    }

    pub fn raw(file: &str, body: String) -> Self {
        Artifact { file: file.to_string(), body }
    }

    pub fn write(&self, dir: &Path, header: &Header) -> Result<PathBuf, CliError> {
        let path = dir.join(&self.file);
        let text = header.render() + &self.body;
        atomic_write(&path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Shortest round-trip form; stable across runs and platforms.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// (y, E(y), running density); header only for an empty series.
pub fn race_plot_table(series: Option<&RaceSeries>, density: Option<&EmpiricalDensity>) -> Table {
    let mut t = Table::new(&["y", "E", "running_density"]);
    if let Some(s) = series {
        for (i, (y, e)) in s.y.iter().zip(&s.e_values).enumerate() {
            let d = density.and_then(|d| d.running.get(i).copied());
            t.push(vec![num(*y), num(*e), opt(d)]);
        }
    }
    t
}

/// (ξ, |φ(ξ)|) on `points` equally spaced ξ in [0, xi_max].
pub fn phi_table(model: &BiasModel, xi_max: f64, points: usize) -> Table {
    let mut t = Table::new(&["xi", "abs_phi"]);
    let n = points.max(2);
    for k in 0..n {
        let xi = xi_max * k as f64 / (n - 1) as f64;
        t.push(vec![num(xi), num(char_function(model, xi).norm())]);
    }
    t
}

/// Writes the plot tables for a race series and/or a model.
pub fn emit_plot_data(
    dir: &Path,
    header: &Header,
    series: Option<(&RaceSeries, &EmpiricalDensity)>,
    model: Option<(&BiasModel, f64)>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    if let Some((s, d)) = series {
        out.push(Artifact::table("race_plot.csv", &race_plot_table(Some(s), Some(d)))?.write(dir, header)?);
    }
    if let Some((m, xi_max)) = model {
        out.push(Artifact::table("phi.csv", &phi_table(m, xi_max, 512))?.write(dir, header)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let t = race_plot_table(None, None);
        assert_eq!(t.to_csv().unwrap(), "y,E,running_density\n");
    }

    #[test]
    fn phi_starts_at_one() {
        let m = BiasModel::from_amplitudes("m", 1.0, &[0.5, 0.25]);
        let t = phi_table(&m, 10.0, 5);
        assert_eq!(t.rows[0], vec!["0".to_string(), "1".to_string()]);
        assert_eq!(t.rows.len(), 5);
    }

    #[test]
    fn header_lines() {
        let mut h = Header::default();
        h.push("config_hash", "abc");
        assert_eq!(h.render(), "# config_hash: abc\n");
    }
}
