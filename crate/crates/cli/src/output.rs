//! Per-run output directory: manifest, CSV/JSON reports, snapshots and the
//! FAILED sentinel.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kglab::functionals::PhasePoint;
use kglab::groundstate::{cached_thresholds, preload_thresholds, ThresholdEntry};
use kglab::propagator::fmt_sig;
use kglab::spectral::write_snapshot;
use serde::Serialize;

pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
}

impl RunDir {
    pub fn create(path: &Path, hash: &str) -> std::io::Result<Self> {
        fs::create_dir_all(path)?;
        let _ = fs::remove_file(path.join("FAILED"));
        Ok(Self {
            path: path.to_path_buf(),
            hash: hash.to_string(),
        })
    }

    pub fn comment(&self) -> String {
        format!("config_sha256={}", self.hash)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> kglab::Result<()> {
        let mut w = BufWriter::new(File::create(self.path.join(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV with the config-hash comment line, a header row and 10-digit floats.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> kglab::Result<()> {
        self.with_writer(name, |w| {
            writeln!(w, "# {}", self.comment())?;
            writeln!(w, "{}", header.join(","))?;
            for r in rows {
                let cells: Vec<String> = r.iter().map(|v| fmt_sig(*v)).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
            Ok(())
        })
    }

    pub fn with_writer(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> kglab::Result<()>,
    ) -> kglab::Result<()> {
        let mut w = BufWriter::new(File::create(self.path.join(name))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Phase snapshot in field order u1, v1, u2, v2.
    pub fn snapshot(&self, name: &str, phase: &PhasePoint) -> kglab::Result<()> {
        let f = phase.fields();
        write_snapshot(&self.path.join(name), &[f[0], f[1], f[2], f[3]])
    }

    pub fn mark_failed(&self, message: &str) {
        let _ = fs::write(self.path.join("FAILED"), format!("{message}\n"));
    }
}

/// Threshold cache: a JSON list of entries. A missing or unreadable file only
/// costs a recompute.
pub fn load_cache(path: &Path) {
    let Ok(text) = fs::read_to_string(path) else {
        return;
    };
    match serde_json::from_str::<Vec<ThresholdEntry>>(&text) {
        Ok(entries) => preload_thresholds(entries),
        Err(e) => eprintln!(
            "warning: ignoring corrupt threshold cache {}: {e}",
            path.display()
        ),
    }
}

pub fn save_cache(path: &Path) {
    let entries = cached_thresholds();
    if entries.is_empty() {
        return;
    }
    let tmp = path.with_extension("tmp");
    let write = || -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(&tmp, serde_json::to_string_pretty(&entries)?)?;
        fs::rename(&tmp, path)
    };
    if let Err(e) = write() {
        eprintln!(
            "warning: could not write threshold cache {}: {e}",
            path.display()
        );
    }
}
