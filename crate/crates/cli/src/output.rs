//! Result files: long-format CSV, JSON records and a hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use floquet_tfim::evolution::Trajectory;

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Time axis of an output file: divide internal times (in `1/g`) by `scale`.
#[derive(Clone, Copy, Debug)]
pub struct TimeUnit {
    pub label: &'static str,
    pub scale: f64,
}

impl TimeUnit {
    pub fn inverse_g() -> Self {
        Self { label: "1/g", scale: 1.0 }
    }

    pub fn periods(period: f64) -> Self {
        Self { label: "T", scale: period }
    }

    pub fn inverse_coupling(j0: f64) -> Self {
        Self { label: "1/J0", scale: 1.0 / j0 }
    }

    pub fn inverse_lambda(lambda0: f64) -> Self {
        Self { label: "1/lambda0", scale: 1.0 / lambda0 }
    }

    pub fn header(&self) -> String {
        format!("time [{}]", self.label)
    }

    pub fn convert(&self, t: f64) -> f64 {
        t / self.scale
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Output directory that remembers every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileRecord { path: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("result records serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Usage(format!("{name}: {e}"));
        writer.write_record(header).map_err(fail)?;
        for row in rows {
            writer.write_record(&row).map_err(fail)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, mut manifest: serde_json::Map<String, Value>) -> Result<PathBuf> {
        manifest.insert("files".into(), serde_json::to_value(&self.files).expect("records serialize"));
        let mut text = serde_json::to_string_pretty(&Value::Object(manifest)).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.clear();
        Ok(path)
    }
}

/// Long-format rows `(time, index, observable, value)` of a trajectory.
pub fn trajectory_rows(traj: &Trajectory, unit: TimeUnit, kind: Observable) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (k, &t) in traj.times.iter().enumerate() {
        let time = fmt_f64(unit.convert(t));
        let (name, values): (&str, Vec<f64>) = match kind {
            Observable::Magnetization => ("sigma_z", traj.magnetizations[k].clone()),
            Observable::Correlation => ("C", traj.correlations[k].clone()),
            Observable::Parity => ("parity", vec![traj.parity[k]]),
            Observable::Norm => ("norm", vec![traj.norms[k]]),
        };
        for (i, v) in values.into_iter().enumerate() {
            rows.push(vec![time.clone(), (i + 1).to_string(), name.to_string(), fmt_f64(v)]);
        }
    }
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Magnetization,
    Correlation,
    Parity,
    Norm,
}

/// Writes magnetization and correlation CSVs (and parity/norm diagnostics)
/// with the given file prefix.
pub fn write_trajectory(out: &mut OutputDir, prefix: &str, traj: &Trajectory, unit: TimeUnit) -> Result<()> {
    let header = unit.header();
    for (kind, name) in [
        (Observable::Magnetization, "magnetization"),
        (Observable::Correlation, "correlation"),
        (Observable::Parity, "parity"),
        (Observable::Norm, "norm"),
    ] {
        out.write_csv(
            &format!("{prefix}{name}.csv"),
            &[header.as_str(), "site_or_bond", "observable", "value"],
            trajectory_rows(traj, unit, kind),
        )?;
    }
    Ok(())
}

/// Dense matrix as `(row, col, re, im, abs)` rows, nonzero entries only.
pub fn matrix_rows(m: &nalgebra::DMatrix<floquet_tfim::C64>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v.norm() > 0.0 {
                rows.push(vec![r.to_string(), c.to_string(), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())]);
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.7934, f64::MAX] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("run")).unwrap();
        out.write("a.txt", b"abc").unwrap();
        out.write_csv("b.csv", &["x", "y"], vec![vec!["1".into(), "2".into()]]).unwrap();
        let path = out.finish(serde_json::Map::new()).unwrap();
        let manifest: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        let files = manifest["files"].as_array().unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(
            files[0]["sha256"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(fs::read_to_string(dir.path().join("run/b.csv")).unwrap(), "x,y\n1,2\n");
    }
}
