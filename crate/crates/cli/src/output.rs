//! Atomic file output, content hashes and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use spin32_core::adjudication::Adjudication;
use spin32_core::ansatz::slot_name;
use spin32_core::radial::REDUCED;
use spin32_core::solver::SolutionTrace;
use spin32_core::Check;

use crate::config::RunConfig;
use crate::error::{usage, CliError};

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Output directory that records every data file it writes.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Output {
    /// Creates the directory and checks that it accepts files.
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .or_else(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        let probe = dir.join(".spin32-probe");
        fs::write(&probe, b"")
            .and_then(|_| fs::remove_file(&probe))
            .or_else(|e| usage(format!("{} is not writable: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Removes the files listed by an earlier manifest of the same name, so a rerun
    /// never leaves data that no manifest accounts for.
    pub fn discard_previous(&self, manifest: &str) {
        let path = self.dir.join(manifest);
        let Ok(text) = fs::read_to_string(&path) else {
            return;
        };
        if let Ok(old) = serde_json::from_str::<serde_json::Value>(&text) {
            let names = old["files"].as_array().cloned().unwrap_or_default();
            for name in names.iter().filter_map(|f| f["path"].as_str()) {
                if Path::new(name).file_name().is_some_and(|n| n == name) {
                    let _ = fs::remove_file(self.dir.join(name));
                }
            }
        }
        let _ = fs::remove_file(path);
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let res = fs::File::create(&tmp)
            .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
            .and_then(|_| fs::rename(&tmp, &target));
        if let Err(e) = res {
            let _ = fs::remove_file(&tmp);
            return usage(format!("cannot write {}: {e}", target.display()));
        }
        Ok(target)
    }

    /// Writes a data file and records it for the manifest.
    pub fn data(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.write_atomic(name, bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn finish(self, name: &str, mut manifest: Manifest) -> Result<PathBuf, CliError> {
        manifest.files = self.files.clone();
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        self.write_atomic(name, text.as_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ChecksFailed,
    NumericalFailure,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub spin32_core: &'static str,
    pub spin32_cli: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            spin32_core: spin32_core::VERSION,
            spin32_cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub versions: Versions,
    pub inputs: RunConfig,
    pub status: Status,
    /// Set when any warning was raised; the run still counts as successful.
    pub warning: bool,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    pub adjudication: Vec<Adjudication>,
    pub files: Vec<FileRecord>,
}

/// Doubles with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_csv(trace: &SolutionTrace) -> String {
    let mut header = vec!["omega".to_string()];
    for k in 0..REDUCED {
        let n = slot_name(k);
        header.push(format!("re_{n}"));
        header.push(format!("im_{n}"));
    }
    header.extend(["res_trace_0", "res_trace_1", "res_div_0", "res_div_1"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for s in &trace.samples {
        let mut row = vec![fmt_f64(s.omega)];
        for z in &s.state {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.extend(s.residuals.iter().map(|&r| fmt_f64(r)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
