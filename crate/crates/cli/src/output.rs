//! Output directory handling and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use flexdur::data_io::atomic_write;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Tracks inputs and outputs of one command invocation.
pub struct Run {
    command: &'static str,
    dir: PathBuf,
    started: Instant,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(command: &'static str, dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Run {
            command,
            dir: dir.to_path_buf(),
            started: Instant::now(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Path of an output file inside the run directory, recorded for the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.output(name);
        write_json(&path, value)
    }

    /// Writes a CSV with a header row; cells are pre-formatted.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.output(name);
        atomic_write(&path, |w: &mut dyn Write| {
            writeln!(w, "{}", header.join(","))?;
            for row in rows {
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        })?;
        Ok(())
    }

    pub fn finish(self, settings: &Settings, extra: Value) -> Result<(), CliError> {
        let paths = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>();
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": settings.snapshot(),
            "seeds": self.seeds,
            "inputs": paths(&self.inputs),
            "outputs": paths(&self.outputs),
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "notes": extra,
        });
        write_json(&self.dir.join(MANIFEST), &manifest)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    atomic_write(path, |w: &mut dyn Write| writeln!(w, "{text}"))?;
    Ok(())
}

/// Quotes a CSV cell when needed.
pub fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
