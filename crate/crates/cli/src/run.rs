//! Output bookkeeping shared by every command.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sisfront::model::RawParams;

use crate::error::CliError;

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
    /// Set when the command wrote some files and then failed.
    pub failure: Option<CliError>,
}

/// Record of a single run, written after every other output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: RawParams,
    pub version: &'static str,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub exit_code: u8,
    pub summary: String,
}

pub const MANIFEST: &str = "manifest.json";

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path.to_path_buf())
}

pub fn write_with<F>(path: &Path, body: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Run `body` in `out`, then write the manifest. Returns the manifest.
pub fn execute<F>(command: &str, raw: &RawParams, out: &Path, body: F) -> Result<RunManifest, CliError>
where
    F: FnOnce(&Path) -> Result<Report, CliError>,
{
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let result = body(out);
    let wall_clock_seconds = start.elapsed().as_secs_f64();
    let (report, exit_code) = match result {
        Ok(mut r) => {
            let code = match r.failure.take() {
                Some(e) => {
                    r.summary = if r.summary.is_empty() { e.to_string() } else { format!("{}; {e}", r.summary) };
                    r.passed = false;
                    e.code()
                }
                None if r.passed => 0,
                None => 2,
            };
            (r, code)
        }
        Err(e) => (Report { summary: e.to_string(), ..Report::default() }, e.code()),
    };
    let mut outputs = Vec::with_capacity(report.outputs.len());
    for p in &report.outputs {
        if !p.exists() {
            return Err(CliError::Internal(format!("listed output {} is missing", p.display())));
        }
        outputs.push(p.strip_prefix(out).unwrap_or(p).to_string_lossy().into_owned());
    }
    let manifest = RunManifest {
        command: command.to_string(),
        params: raw.clone(),
        version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds,
        outputs,
        passed: report.passed,
        exit_code,
        summary: report.summary,
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}
