//! Matrix files, JSON reports and CSV tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clifford_tori::matcore::{CMatrix, UnitaryMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Unitarity tolerance applied to matrices read from disk.
pub const READ_TOL: f64 = 1e-8;

/// `{"n": N, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let n = u.dim();
        let entries = (0..n).map(|j| (0..n).map(|k| [u.get(j, k).re, u.get(j, k).im]).collect()).collect();
        MatrixFile { n, entries }
    }

    pub fn to_unitary(&self, check: bool) -> Result<UnitaryMatrix> {
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            bail!("matrix file declares n = {} but entries are not {0}x{0}", self.n);
        }
        let m = CMatrix::from_fn(self.n, self.n, |j, k| {
            let [re, im] = self.entries[j][k];
            Complex64::new(re, im)
        });
        if check {
            Ok(UnitaryMatrix::with_tolerance(m, READ_TOL)?)
        } else {
            Ok(UnitaryMatrix::new_unchecked(m))
        }
    }
}

pub fn read_matrix(path: &Path, check: bool) -> Result<UnitaryMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: MatrixFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_unitary(check)
}

/// A CSV table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Float formatting shared by all CSV output; shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Where command output goes: a directory of named files, or stdout.
#[derive(Clone, Debug)]
pub enum Sink {
    Stdout,
    Dir(PathBuf),
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Result<Self> {
        match out {
            None => Ok(Sink::Stdout),
            Some(dir) => {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                Ok(Sink::Dir(dir))
            }
        }
    }

    pub fn emit(&self, file_name: &str, body: &str) -> Result<()> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())?;
                out.flush()?;
            }
            Sink::Dir(dir) => {
                let path = dir.join(file_name);
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Ok(())
    }

    pub fn emit_table(&self, table: &Table) -> Result<()> {
        self.emit(&format!("{}.csv", table.name), &table.to_csv()?)
    }
}
