//! Output directory bookkeeping and the run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::{CliError, RunConfig};

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub case: String,
    pub computed: f64,
    pub target: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(case: impl Into<String>, computed: f64, target: f64, pass: bool) -> Self {
        Self { case: case.into(), computed, target, pass }
    }

    /// Passes when `|computed - target| <= tol`.
    pub fn abs(case: impl Into<String>, computed: f64, target: f64, tol: f64) -> Self {
        Self::new(case, computed, target, (computed - target).abs() <= tol)
    }

    /// Passes when `|computed / target - 1| <= tol`.
    pub fn rel(case: impl Into<String>, computed: f64, target: f64, tol: f64) -> Self {
        Self::new(case, computed, target, (computed / target - 1.0).abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub all_passed: bool,
}

impl RunManifest {
    /// Writes `manifest.json` as one JSON line via a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<(), CliError> {
        let tmp = dir.join(".manifest.json.tmp");
        {
            let mut f = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut f, self).map_err(std::io::Error::other)?;
            writeln!(f)?;
            f.flush()?;
        }
        std::fs::rename(&tmp, dir.join("manifest.json"))?;
        Ok(())
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// State of one invocation: where files go, what was written, which checks ran.
#[derive(Debug)]
pub struct Run {
    pub out: PathBuf,
    pub quiet: bool,
    started: f64,
    outputs: Vec<String>,
    checks: Vec<CheckRecord>,
}

impl Run {
    pub fn new(out: impl Into<PathBuf>, quiet: bool) -> Result<Self, CliError> {
        let out = out.into();
        std::fs::create_dir_all(&out)?;
        Ok(Self { out, quiet, started: unix_now(), outputs: Vec::new(), checks: Vec::new() })
    }

    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    /// Creates `name` in the output directory and records it.
    pub fn write_file(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
        let mut f = BufWriter::new(File::create(self.out.join(name))?);
        body(&mut f)?;
        f.flush()?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn check(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn checks(&self) -> &[CheckRecord] {
        &self.checks
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn manifest(&self, command: &str, cfg: &RunConfig) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.resolved(),
            started_unix: self.started,
            finished_unix: unix_now(),
            outputs: self.outputs.clone(),
            checks: self.checks.clone(),
            all_passed: self.checks.iter().all(|c| c.pass),
        }
    }
}
