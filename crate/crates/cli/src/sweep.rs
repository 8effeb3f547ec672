//! Batch runs over a parameter grid, described by a TOML file:
//!
//! ```toml
//! job = "shoot"          # shoot | trap | rotation
//! reduced = true         # shoot only
//! deltas = [0.1, 1.0]    # rotation only
//!
//! [base]
//! beta = 2.0
//! regime = "case2"
//!
//! [grid]
//! c = [0.2, 1.0, 5.0]
//! ```
//!
//! Runs are the Cartesian product of the `[grid]` lists, in key order. A
//! missing `[grid]` table is a single run at `[base]`; an empty list gives
//! no runs at all.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};
use sisfront::model::{validate_params, RawParams};

use crate::commands;
use crate::config::apply;
use crate::error::CliError;
use crate::run::{execute, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Shoot,
    Trap,
    Rotation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:?}"),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub job: JobKind,
    #[serde(default)]
    pub reduced: bool,
    /// Trapping slope for case-3 trap jobs; the interval midpoint when absent.
    pub r: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub base: BTreeMap<String, Value>,
    pub grid: Option<BTreeMap<String, Vec<Value>>>,
}

fn default_samples() -> usize {
    100
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("sweep file: {e}")))
    }

    /// Raw parameters for every grid point.
    pub fn points(&self) -> Result<Vec<RawParams>, CliError> {
        let mut base = RawParams::default();
        for (k, v) in &self.base {
            apply(&mut base, k, &v.text())?;
        }
        let mut points = vec![base];
        for (k, values) in self.grid.iter().flatten() {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for v in values {
                    let mut q = p.clone();
                    apply(&mut q, k, &v.text())?;
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }
}

#[derive(Debug, Serialize)]
pub struct IndexEntry {
    pub id: usize,
    pub dir: String,
    pub params: RawParams,
    pub passed: bool,
    pub exit_code: u8,
    pub summary: String,
}

#[derive(Debug, Serialize)]
pub struct SweepIndex {
    pub job: JobKind,
    pub runs: Vec<IndexEntry>,
    pub passed: usize,
    pub failed: usize,
}

fn run_one(file: &SweepFile, raw: &RawParams, dir: &Path) -> Result<(bool, u8, String), CliError> {
    let name = format!("{:?}", file.job).to_lowercase();
    let m = execute(&name, raw, dir, |out| {
        let params = validate_params(raw)?;
        match file.job {
            JobKind::Shoot => commands::shoot(&params, file.reduced, out),
            JobKind::Trap => commands::trap(&params, file.r, file.samples, out),
            JobKind::Rotation => commands::rotation(&params, &file.deltas, out),
        }
    })?;
    Ok((m.passed, m.exit_code, m.summary))
}

/// Execute every run with up to `jobs` worker threads, then write `index.json`.
pub fn sweep(file: &SweepFile, out: &Path, jobs: usize) -> Result<SweepIndex, CliError> {
    let points = file.points()?;
    fs::create_dir_all(out)?;
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(points.len()));
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, points.len().max(1)) {
            s.spawn(|| loop {
                let id = next.fetch_add(1, Ordering::Relaxed);
                let Some(raw) = points.get(id) else { break };
                let dir = format!("run_{id:04}");
                let (passed, exit_code, summary) = match run_one(file, raw, &out.join(&dir)) {
                    Ok(r) => r,
                    Err(e) => (false, e.code(), e.to_string()),
                };
                let entry = IndexEntry { id, dir, params: raw.clone(), passed, exit_code, summary };
                done.lock().expect("index lock").push(entry);
            });
        }
    });
    let mut runs = done.into_inner().expect("index lock");
    runs.sort_by_key(|e| e.id);
    let passed = runs.iter().filter(|e| e.passed).count();
    let index = SweepIndex { job: file.job, failed: runs.len() - passed, passed, runs };
    write_json(&out.join("index.json"), &index)?;
    Ok(index)
}

pub fn load(path: &PathBuf) -> Result<SweepFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read sweep file {}: {e}", path.display())))?;
    SweepFile::parse(&text)
}
