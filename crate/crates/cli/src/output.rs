//! Output directory handling and the CSV schemas.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so every value
//! parses back to the same `f64`. Each file is written in one go by a single
//! writer; headers never change, so rows from several runs can be appended.

use std::fs;
use std::path::{Path, PathBuf};

use riesz_mmd::ParticleSet;

use crate::error::{CliError, CliResult};

pub const BENCH_HEADER: [&str; 7] = ["mode", "N", "M", "d", "P", "reps", "median_seconds"];
pub const SCALING_HEADER: [&str; 5] = ["sweep", "d", "P", "mean_rel_error", "bound"];
pub const SCALING_ABS_HEADER: [&str; 5] = ["sweep", "d", "P", "mean_abs_error", "bound"];
pub const SLOPES_HEADER: [&str; 3] = ["sweep", "slope", "points"];
pub const TAILS_HEADER: [&str; 6] = ["sweep", "d", "P", "t", "empirical_tail", "bound"];
pub const ENERGY_HEADER: [&str; 3] = ["step", "F_d", "grad_norm"];
pub const BOUNDS_HEADER: [&str; 8] = ["instance", "N", "M", "d_sq", "w1", "ratio", "weak_ok", "paper_ok"];
pub const BOUNDS_SUMMARY_HEADER: [&str; 6] = ["instances", "weak_ok", "paper_ok", "ratio_min", "ratio_median", "ratio_max"];

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `particle,dim0,...,dim{d-1}`.
pub fn snapshot_header(d: usize) -> Vec<String> {
    std::iter::once("particle".to_string())
        .chain((0..d).map(|k| format!("dim{k}")))
        .collect()
}

pub fn snapshot_rows(points: &ParticleSet) -> Vec<Vec<String>> {
    points
        .points()
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| std::iter::once(i.to_string()).chain(row.iter().map(|&v| fmt_f64(v))).collect())
        .collect()
}

/// A directory that refuses to overwrite existing files unless `force` is set.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    /// Creates `root` (and parents) if needed.
    pub fn create(root: impl Into<PathBuf>, force: bool) -> CliResult<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, force })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// A child directory with the same overwrite policy.
    pub fn subdir(&self, name: &str) -> CliResult<Self> {
        Self::create(self.root.join(name), self.force)
    }

    fn claim(&self, name: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        if path.exists() && !self.force {
            return Err(CliError::Exists(path));
        }
        Ok(path)
    }

    pub fn write_csv<H, R>(&self, name: &str, header: &[H], rows: R) -> CliResult<PathBuf>
    where
        H: AsRef<str>,
        R: IntoIterator<Item = Vec<String>>,
    {
        let path = self.claim(name)?;
        let csv_err = |source| CliError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header.iter().map(|h| h.as_ref())).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.claim(name)?;
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Header and rows of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> CliResult<Self> {
        let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as floats; empty cells become NaN.
    pub fn floats(&self, name: &str) -> CliResult<Vec<f64>> {
        let k = self
            .column(name)
            .ok_or_else(|| CliError::Config(format!("missing column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[k].as_str();
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse().map_err(|_| CliError::Config(format!("bad number '{cell}' in {name}")))
                }
            })
            .collect()
    }
}

/// Reads points in the snapshot schema (`particle,dim0,...`).
pub fn read_particles(path: &Path) -> CliResult<ParticleSet> {
    let table = CsvTable::read(path)?;
    let d = table.header.len().saturating_sub(1);
    if d == 0 || table.header != snapshot_header(d) {
        return Err(CliError::Config(format!("{}: expected header particle,dim0,...", path.display())));
    }
    let mut data = Vec::with_capacity(table.rows.len() * d);
    for row in &table.rows {
        for cell in &row[1..] {
            data.push(
                cell.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{}: bad number '{cell}'", path.display())))?,
            );
        }
    }
    Ok(ParticleSet::from_flat(data, d)?)
}
