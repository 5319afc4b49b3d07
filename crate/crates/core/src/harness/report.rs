//! Plot-ready CSV tables and run directories with manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::experiment::{hex, ExperimentConfig};
use super::reference::hardware;
use super::sweep::SweepPoint;
use crate::error::Result;

pub const REPORT_COLUMNS: [&str; 28] = [
    "sweep",
    "label",
    "r",
    "shots",
    "seed",
    "accepted",
    "acceptance_rate",
    "rejected_parity",
    "n000",
    "n110",
    "n101",
    "n011",
    "tvd",
    "tvd_se",
    "bias_component",
    "incorrect_component",
    "incorrect_se",
    "bias_significance",
    "qubits",
    "zz",
    "gates",
    "depth",
    "duration_s",
    "ancilla_idle_noise",
    "hw_tvd",
    "hw_incorrect",
    "hw_bias_significance",
    "fingerprint",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per point; wall time is left out so equal inputs give equal bytes.
pub fn write_report_csv(points: &[SweepPoint], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(REPORT_COLUMNS)?;
    for p in points {
        let r = &p.record;
        let m = r.metrics;
        let hw = hardware(&p.label);
        let c = |k: &str| r.counts.get(k).copied().unwrap_or(0).to_string();
        wr.write_record([
            p.sweep.clone(),
            p.label.clone(),
            p.r.to_string(),
            r.shots.to_string(),
            r.seed.to_string(),
            r.accepted.to_string(),
            r.acceptance_rate.to_string(),
            r.rejected_parity_count.to_string(),
            c("000"),
            c("110"),
            c("101"),
            c("011"),
            opt(m.map(|m| m.tvd)),
            opt(m.map(|m| m.tvd_se)),
            opt(m.map(|m| m.bias_component)),
            opt(m.map(|m| m.incorrect_component)),
            opt(m.map(|m| m.incorrect_se)),
            opt(m.map(|m| m.bias_significance)),
            r.resources.qubits.to_string(),
            r.resources.zz.to_string(),
            r.resources.gates.to_string(),
            r.resources.depth.to_string(),
            r.resources.duration_s.to_string(),
            r.resources.ancilla_idle_noise.to_string(),
            opt(hw.and_then(|h| h.tvd)),
            opt(hw.map(|h| h.incorrect_component)),
            opt(hw.map(|h| h.bias_significance)),
            r.fingerprint.clone(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex(&Sha256::digest(std::fs::read(path)?)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestConfig {
    pub name: String,
    pub fingerprint: String,
    pub seed: u64,
    pub shots: usize,
}

impl From<&ExperimentConfig> for ManifestConfig {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            name: c.name.clone(),
            fingerprint: c.fingerprint(),
            seed: c.seed,
            shots: c.shots,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Seed of the whole run (sweeps derive per-point seeds from it).
    pub seed: u64,
    pub threads: usize,
    pub configs: Vec<ManifestConfig>,
    pub files: Vec<ManifestFile>,
}

/// Output directory of one command invocation.
#[derive(Clone, Debug)]
pub struct RunDir {
    pub path: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        std::fs::create_dir_all(&path)?;
        Ok(Self { path, files: vec![] })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.file(name);
        std::fs::write(&p, bytes)?;
        self.track(name);
        Ok(p)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, v: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    /// Registers a file written by other means.
    pub fn track(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.into());
        }
    }

    pub fn write_manifest(&mut self, command: &str, seed: u64, threads: usize, configs: &[ExperimentConfig]) -> Result<Manifest> {
        let mut files = vec![];
        for f in &self.files {
            files.push(ManifestFile {
                path: f.clone(),
                sha256: sha256_file(&self.file(f))?,
            });
        }
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            threads,
            configs: configs.iter().map(ManifestConfig::from).collect(),
            files,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        std::fs::write(self.file("manifest.json"), s)?;
        Ok(m)
    }
}
