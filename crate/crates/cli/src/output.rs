//! Metrics sinks. Every file opens with a provenance block: artifact
//! version, subcommand, master seed, wall-clock timestamp and the fully
//! resolved configuration. CSV files carry it as `#` comment lines, JSONL
//! files as their first object.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Prefix of the only provenance line that differs between identical runs.
pub const TIMESTAMP_PREFIX: &str = "# timestamp: ";

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub artifact: String,
    pub command: String,
    pub seed: u64,
    pub timestamp: u64,
    pub config: ExperimentConfig,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Provenance {
            artifact: format!("zample {VERSION}"),
            command: command.to_string(),
            seed: config.seed,
            timestamp,
            config: config.clone(),
        }
    }
}

/// Output directory plus the provenance stamped on every file in it.
#[derive(Debug, Clone)]
pub struct OutDir {
    dir: PathBuf,
    provenance: Provenance,
}

impl OutDir {
    pub fn create(dir: &Path, provenance: Provenance) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            provenance,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Write `rows` to `name` as CSV under the provenance comment block.
    /// `columns` is written as the header even when `rows` is empty.
    pub fn write_csv<R: Serialize>(&self, name: &str, columns: &[&str], rows: &[R]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut file = BufWriter::new(File::create(&path)?);
        let p = &self.provenance;
        writeln!(file, "# {}", p.artifact)?;
        writeln!(file, "# command: {}", p.command)?;
        writeln!(file, "# seed: {}", p.seed)?;
        writeln!(file, "{TIMESTAMP_PREFIX}{}", p.timestamp)?;
        writeln!(file, "# config: {}", serde_json::to_string(&p.config)?)?;
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        csv.write_record(columns)?;
        for row in rows {
            csv.serialize(row)?;
        }
        csv.flush()?;
        Ok(path)
    }

    pub fn jsonl(&self, name: &str) -> CliResult<JsonLines> {
        let path = self.path(name);
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer(&mut out, &self.provenance)?;
        writeln!(out)?;
        Ok(JsonLines { out, path })
    }
}

/// A JSON-lines stream whose first line is the provenance object.
pub struct JsonLines {
    out: BufWriter<File>,
    path: PathBuf,
}

impl JsonLines {
    pub fn write<T: Serialize>(&mut self, record: &T) -> CliResult<()> {
        serde_json::to_writer(&mut self.out, record)?;
        writeln!(self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// `text` without provenance fields that legitimately change between runs.
pub fn strip_timestamp(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.lines().enumerate() {
        if line.starts_with(TIMESTAMP_PREFIX) {
            continue;
        }
        if i == 0 && line.starts_with('{') {
            if let Ok(mut v) = serde_json::from_str::<serde_json::Value>(line) {
                if let Some(obj) = v.as_object_mut() {
                    obj.remove("timestamp");
                }
                out.push_str(&v.to_string());
                out.push('\n');
                continue;
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}
