//! Run manifest: the completion marker of an experiment directory. It is
//! written last, so a directory without one holds partial output. Besides
//! the resolved configuration it records the seed, the code version, the
//! physics evaluation counter, and wall-clock timestamps.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::config::ExperimentConfig;
use crate::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// The seed the run actually used (after any --seed override).
    pub seed: u64,
    /// Code version that produced the directory.
    pub version: String,
    /// Physics evaluations the driver reported spending.
    pub physics_evaluations: usize,
    /// The configured budget; always equals `physics_evaluations`.
    pub total_physics_steps: usize,
    pub started_unix: i64,
    pub finished_unix: i64,
    /// Same instants, RFC 3339 for humans.
    pub started: String,
    pub finished: String,
    /// Checksum of the truth field file, used to refuse cross-truth
    /// comparisons. Empty for forward-only runs without a truth on disk.
    pub truth_sha256: String,
    /// The TV weight that was applied, when the method has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_lambda: Option<f64>,
    /// Full resolved configuration, embedded so a directory can be re-run
    /// byte-identically from its manifest alone.
    pub config: ExperimentConfig,
}

/// Wall-clock pair captured at the start of a run and resolved at the end.
pub struct Stopwatch {
    started: OffsetDateTime,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch { started: OffsetDateTime::now_utc() }
    }

    pub fn stamp(&self) -> (i64, String, i64, String) {
        let finished = OffsetDateTime::now_utc();
        (
            self.started.unix_timestamp(),
            rfc3339(self.started),
            finished.unix_timestamp(),
            rfc3339(finished),
        )
    }
}

fn rfc3339(t: OffsetDateTime) -> String {
    t.format(&Rfc3339).unwrap_or_else(|_| t.unix_timestamp().to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_of_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::malformed(path, format!("not a run manifest: {e}")))
    }
}

/// A configuration source for re-runs: either a plain config file or a
/// manifest from a previous run (recognized by its `[config]` table).
pub fn load_config_or_manifest(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let value: toml::Value = text
        .parse()
        .map_err(|e| CliError::malformed(path, format!("not valid key/value syntax: {e}")))?;
    if value.get("config").is_some() {
        let manifest: RunManifest = value
            .try_into()
            .map_err(|e| CliError::malformed(path, format!("not a run manifest: {e}")))?;
        let errors = manifest.config.validate_collect();
        if !errors.is_empty() {
            return Err(CliError::config(errors));
        }
        Ok(manifest.config)
    } else {
        crate::config::parse_config(&text)
    }
}
