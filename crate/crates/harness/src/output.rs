//! Trace, table and summary writers.
//!
//! `csv` output has a header row and one record per line. `structured`
//! output is a JSON array of the same records. Summaries are always JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Structured,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Structured => "json",
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Writes records under an explicit header, so an empty table still has
/// its column names.
pub fn write_records<R: Serialize>(
    path: &Path,
    header: &[&str],
    records: &[R],
    format: Format,
) -> Result<()> {
    let mut out = create(path)?;
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(header)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Structured => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn write_json<V: Serialize + ?Sized>(path: &Path, value: &V) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub const CENTRALIZED_COLUMNS: [&str; 8] = [
    "k",
    "dist_x2",
    "dist_y2",
    "psi",
    "f_calls",
    "g_calls",
    "f_samples",
    "g_samples",
];

pub const DECENTRALIZED_COLUMNS: [&str; 10] = [
    "k",
    "dist_x2",
    "dist_y2",
    "psi",
    "spread_u",
    "spread_w",
    "consensus_error_x",
    "consensus_error_y",
    "communications",
    "oracle_samples",
];

pub const SWEEP_COLUMNS: [&str; 9] = [
    "mu_x",
    "mu_y",
    "iterations",
    "status",
    "geometric",
    "minimum",
    "rate",
    "residual_geometric",
    "residual_minimum",
];
