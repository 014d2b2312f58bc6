use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Named columns of text cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Format(format!("row has {} cells, table has {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Numbers print in shortest round-trip form; NaN marks a missing value.
    pub fn push_numbers(&mut self, row: &[f64]) -> Result<()> {
        self.push(row.iter().map(|v| v.to_string()).collect())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    /// Comment lines first (each prefixed by `# `), then the header and rows.
    pub fn write(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let mut text = String::new();
        for c in comments {
            text.push_str("# ");
            text.push_str(&c.replace('\n', " "));
            text.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| Error::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        text.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
        fs::write(path, text)?;
        Ok(())
    }
}

/// Comment lines and table of a CSV written by [`Table::write`].
pub fn read_table(path: impl AsRef<Path>) -> Result<(Vec<String>, Table)> {
    let text = fs::read_to_string(path)?;
    let comments = text.lines().filter_map(|l| l.strip_prefix("# ").map(str::to_string)).collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = r.headers().map_err(|e| Error::Format(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| Error::Format(e.to_string()))?.iter().map(str::to_string).collect());
    }
    Ok((comments, Table { columns, rows }))
}

/// `MANIFEST` in an output directory, rewritten after every artifact so an
/// interrupted run is marked partial.
#[derive(Debug)]
pub struct Manifest {
    dir: PathBuf,
    entries: Vec<String>,
}

impl Manifest {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        let m = Self { dir: dir.as_ref().to_path_buf(), entries: Vec::new() };
        m.flush("partial")?;
        Ok(m)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn record(&mut self, name: &str) -> Result<()> {
        self.entries.push(name.to_string());
        self.flush("partial")
    }

    pub fn finish(&self) -> Result<()> {
        self.flush("complete")
    }

    fn flush(&self, status: &str) -> Result<()> {
        let mut text = format!("status: {status}\n");
        for e in &self.entries {
            text.push_str(e);
            text.push('\n');
        }
        fs::write(self.dir.join("MANIFEST"), text)?;
        Ok(())
    }
}

/// Gnuplot script plotting `ys` against `x` from a CSV in the same directory.
pub fn plot_script(title: &str, csv: &str, x: &str, ys: &[&str], log_y: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str(&format!("set title '{title}'\nset xlabel '{x}'\nset key outside\n"));
    if log_y {
        s.push_str("set logscale y\n");
    }
    s.push_str(&format!("set terminal pngcairo size 900,600\nset output '{}.png'\n", csv.trim_end_matches(".csv")));
    let plots: Vec<String> = ys
        .iter()
        .map(|y| format!("'{csv}' using (column('{x}')):(column('{y}')) with linespoints title '{y}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
