//! CSV tables and the run manifest.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use toric_loss::analysis::fit::ThresholdFit;
use toric_loss::analysis::{PfailEstimate, ERROR_STREAM, LOSS_STREAM, SEED_MIXING};

/// CSV file written row by row and flushed after each, so an interrupted
/// run keeps every completed cell.
pub struct Table {
    writer: csv::Writer<File>,
    path: PathBuf,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        writer.write_record(header)?;
        writer.flush()?;
        Ok(Self { writer, path })
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .with_context(|| format!("writing {}", self.path.display()))?;
        self.writer.flush()?;
        Ok(())
    }

    pub fn name(&self) -> String {
        self.path.file_name().unwrap().to_string_lossy().into_owned()
    }
}

pub const PFAIL_HEADER: [&str; 9] = [
    "L",
    "p_loss",
    "p_comp",
    "tau",
    "n_trials",
    "n_fail",
    "p_fail",
    "stderr",
    "n_loss_blocked",
];

pub const FIT_HEADER: [&str; 7] = ["p_loss", "p_thr", "p_thr_err", "nu0", "a", "b", "resid"];

pub fn pfail_row(size: usize, p_loss: f64, p_comp: f64, tau: f64, est: &PfailEstimate) -> Vec<String> {
    vec![
        size.to_string(),
        p_loss.to_string(),
        p_comp.to_string(),
        tau.to_string(),
        est.n_trials.to_string(),
        est.n_fail.to_string(),
        est.p_fail.to_string(),
        est.stderr.to_string(),
        est.n_loss_blocked.to_string(),
    ]
}

pub fn fit_row(p_loss: f64, fit: &ThresholdFit) -> Vec<String> {
    vec![
        p_loss.to_string(),
        fit.p_thr.to_string(),
        fit.p_thr_err.to_string(),
        fit.nu0.to_string(),
        fit.a.to_string(),
        fit.b.to_string(),
        fit.resid.to_string(),
    ]
}

#[derive(Serialize)]
struct Seeding<'a> {
    master: u64,
    mixing: &'a str,
    loss_stream: u64,
    error_stream: u64,
    /// Every table cell runs trial indices `0..n_trials` from the master
    /// seed, so cells share random numbers across parameters.
    trial_indices: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'a str,
    version: &'a str,
    core_version: &'a str,
    config: &'a C,
    seeding: Seeding<'a>,
    workers: usize,
    started_unix: u64,
    wall_time_s: f64,
    outputs: &'a [String],
    summary: &'a serde_json::Value,
}

/// Wall-clock bookkeeping for the manifest.
pub struct Run {
    started: Instant,
    started_unix: u64,
}

impl Run {
    pub fn start() -> Self {
        Self {
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write_manifest<C: Serialize>(
        &self,
        dir: &Path,
        config: &C,
        seed: u64,
        outputs: &[String],
        summary: &serde_json::Value,
    ) -> Result<()> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: toric_loss::VERSION,
            config,
            seeding: Seeding {
                master: seed,
                mixing: SEED_MIXING,
                loss_stream: LOSS_STREAM,
                error_stream: ERROR_STREAM,
                trial_indices: "0..n_trials",
            },
            workers: rayon::current_num_threads(),
            started_unix: self.started_unix,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs,
            summary,
        };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
