//! CSV tables and the JSON run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ScenarioConfig, SecrecySummary};
use crate::channel_gen::RNG_ALGORITHM;
use crate::error::{Error, Result};

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn header(summary: &SecrecySummary, config: &ScenarioConfig) -> String {
    format!(
        "# scenario: {}\n# sweep: {}\n# rng: {}\n# master_seed: {}\n# trials: {}\n",
        summary.scenario, summary.sweep_label, RNG_ALGORITHM, summary.master_seed, config.trials
    )
}

impl SecrecySummary {
    /// One row per sweep point and scheme. Comment lines carry the seed
    /// and generator so the file alone is enough to reproduce it.
    pub fn to_csv(&self, config: &ScenarioConfig) -> String {
        let mut out = header(self, config);
        out.push_str("sweep_value,scheme,mean,stderr,trials,mean_t1,mean_beta\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sweep_value,
                r.scheme.name(),
                r.mean,
                r.stderr,
                r.trials,
                r.mean_t1,
                fmt_opt(r.mean_beta)
            ));
        }
        out
    }

    /// Mean XOR sum secrecy at each fixed `t1` of the time profile.
    pub fn profile_csv(&self, config: &ScenarioConfig) -> String {
        let mut out = header(self, config);
        out.push_str("sweep_value,t1,mean,stderr\n");
        for r in &self.profile {
            out.push_str(&format!("{},{},{},{}\n", r.sweep_value, r.t1, r.mean, r.stderr));
        }
        out
    }
}

/// SHA-256 of the configuration's JSON form, hex encoded.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let json = serde_json::to_vec(config).expect("configuration serializes");
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub master_seed: u64,
    pub trials: usize,
    pub config_hash: String,
    pub version: String,
    pub rng: String,
    pub files: Vec<String>,
    pub config: ScenarioConfig,
}

impl Manifest {
    pub fn new(config: &ScenarioConfig, files: Vec<String>) -> Self {
        Self {
            scenario: config.name.clone(),
            master_seed: config.master_seed,
            trials: config.trials,
            config_hash: config_hash(config),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: RNG_ALGORITHM.into(),
            files,
            config: config.clone(),
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// `results.csv` → `results.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

impl SecrecySummary {
    /// Writes the CSV to `out`, the time profile (if any) next to it as
    /// `<stem>.profile.csv`, and the manifest as `<stem>.manifest.json`.
    /// Returns the paths written.
    pub fn write_files(&self, config: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>> {
        let mut written = vec![out.to_path_buf()];
        let mut tables = vec![(out.to_path_buf(), self.to_csv(config))];
        if !self.profile.is_empty() {
            let p = sibling(out, "profile.csv");
            tables.push((p.clone(), self.profile_csv(config)));
            written.push(p);
        }
        let manifest_path = sibling(out, "manifest.json");
        let names = written
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let manifest = Manifest::new(config, names);
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        for (path, body) in &tables {
            write_atomic(path, body.as_bytes())?;
        }
        write_atomic(&manifest_path, format!("{json}\n").as_bytes())?;
        written.push(manifest_path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn hash_tracks_config() {
        let a = scenario_fig2();
        let mut b = scenario_fig2();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.master_seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn writes_csv_profile_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = scenario_fig5();
        c.trials = 2;
        c.sweep = Sweep::FlPowerDbw(vec![0.0]);
        c.search = SearchConfig { time_bins: 4, beta_bins: 4, ..SearchConfig::default() };
        let s = run_experiment_with_workers(&c, Some(1)).unwrap();
        let out = dir.path().join("run.csv");
        let files = s.write_files(&c, &out).unwrap();
        assert_eq!(files.len(), 3);
        let csv = std::fs::read_to_string(&out).unwrap();
        assert!(csv.contains("# master_seed: 42"));
        assert!(csv.contains("sweep_value,scheme,mean,stderr,trials,mean_t1,mean_beta"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["master_seed"], 42);
        assert_eq!(manifest["config_hash"], config_hash(&c));
        assert!(dir.path().join("run.profile.csv").exists());
    }

    #[test]
    fn atomic_write_reports_path() {
        let err = write_atomic(Path::new("/nonexistent-dir/x.csv"), b"x").unwrap_err();
        assert!(err.to_string().contains("nonexistent-dir"));
    }
}
