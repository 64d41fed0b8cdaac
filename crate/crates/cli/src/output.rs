use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Reals with 17 significant digits, which round-trip any double.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

/// CSV table built in memory, written in one piece.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub threads: usize,
    pub wall_seconds: f64,
    pub parameters: serde_json::Value,
    pub parameter_digest: String,
    pub outputs: Vec<OutputFile>,
}

/// Collects the files of one run and writes the manifest last.
pub struct Run {
    dir: PathBuf,
    subcommand: &'static str,
    parameters: serde_json::Value,
    outputs: Vec<OutputFile>,
    started: std::time::Instant,
}

impl Run {
    pub fn new(dir: &Path, subcommand: &'static str, parameters: serde_json::Value) -> Self {
        Self { dir: dir.to_path_buf(), subcommand, parameters, outputs: Vec::new(), started: std::time::Instant::now() }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(OutputFile { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn finish(self, threads: usize) -> std::io::Result<PathBuf> {
        let canonical = serde_json::to_vec(&self.parameters).expect("parameters serialize");
        let manifest = Manifest {
            tool: "divlab",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            threads,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            parameter_digest: sha256_hex(&canonical),
            parameters: self.parameters,
            outputs: self.outputs,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.subcommand));
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
