//! Append-only run directories and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// A freshly created run directory; never reuses an existing one.
pub struct RunDir {
    pub path: PathBuf,
    command: String,
    argv: Vec<String>,
    started: Instant,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, argv: &[String]) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output root {}", root.display()))?;
        for counter in 0.. {
            let candidate = root.join(format!("run-{counter:03}-{command}"));
            if !candidate.exists() {
                fs::create_dir(&candidate)
                    .with_context(|| format!("creating run dir {}", candidate.display()))?;
                return Ok(RunDir {
                    path: candidate,
                    command: command.to_string(),
                    argv: argv.to_vec(),
                    started: Instant::now(),
                });
            }
        }
        unreachable!("run counter exhausted");
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Write `manifest.json` beside the outputs: config echo, versions,
    /// wall time, and the extra command-specific fields.
    pub fn write_manifest(&self, seed: u64, threads: usize, extra: serde_json::Value) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            argv: &'a [String],
            seed: u64,
            threads: usize,
            kpp_cli_version: &'a str,
            kpp_core_version: &'a str,
            wall_time_secs: f64,
            extra: serde_json::Value,
        }
        let manifest = Manifest {
            command: &self.command,
            argv: &self.argv,
            seed,
            threads,
            kpp_cli_version: env!("CARGO_PKG_VERSION"),
            kpp_core_version: env!("CARGO_PKG_VERSION"),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            extra,
        };
        let body = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.file("manifest.json"), body)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_dirs_are_append_only() {
        let tmp = tempfile::tempdir().unwrap();
        let a = RunDir::create(tmp.path(), "simulate", &[]).unwrap();
        let b = RunDir::create(tmp.path(), "simulate", &[]).unwrap();
        assert_ne!(a.path, b.path);
        assert!(a.path.ends_with("run-000-simulate"));
        assert!(b.path.ends_with("run-001-simulate"));
        a.write_manifest(7, 1, serde_json::json!({"note": "x"})).unwrap();
        assert!(a.file("manifest.json").exists());
    }
}
