//! Run configuration.
//!
//! A run is described by a TOML file with top-level keys and a `[decoder]`
//! table; command-line flags override individual keys.
//!
//! ```toml
//! code = "surface"
//! d = [3, 5, 7]
//! eps = [0.12, 0.14]
//! trials = 10000
//! seed = 1
//!
//! [decoder]
//! pipeline = "bp+adosd"
//! max_iter = 100
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qosd::codes::{CodeFileBundle, CodeSpec, StabilizerCode};
use qosd::sim::{PipelineConfig, RunOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable that overrides the worker count.
pub const THREADS_ENV: &str = "QOSD_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `surface`, `toric`, `bb:<preset>` or `file:<path>`.
    pub code: String,
    /// Distances for the `surface` and `toric` families.
    pub d: Vec<usize>,
    pub eps: Vec<f64>,
    /// Trials per point. 0 means no cap, which needs a logical-error target.
    pub trials: u64,
    pub target_logical_errors: Option<u64>,
    /// Top-level seed. Files store it as a TOML integer, so it must be below 2^63.
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub trial_log: Option<PathBuf>,
    pub decoder: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            code: "surface".into(),
            d: vec![3],
            eps: Vec::new(),
            trials: 10_000,
            target_logical_errors: None,
            seed: 0,
            workers: 0,
            out: None,
            trial_log: None,
            decoder: PipelineConfig::default(),
        }
    }
}

/// A configuration problem tied to a key, so it can be located in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    pub key: &'static str,
    pub message: String,
}

fn issue(key: &'static str, message: impl Into<String>) -> Issue {
    Issue { key, message: message.into() }
}

/// Where a configuration value came from.
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub file: Option<(PathBuf, String)>,
    /// Keys set on the command line.
    pub flags: Vec<&'static str>,
}

impl Provenance {
    /// `path:line`, `--flag` or `default` for `key`.
    pub fn locate(&self, key: &str) -> String {
        if self.flags.contains(&key) {
            return format!("--{}", key.replace('_', "-"));
        }
        if let Some((path, text)) = &self.file {
            if let Some(line) = line_of(text, key) {
                return format!("{}:{line}", path.display());
            }
        }
        "default".into()
    }
}

/// 1-based line of the first assignment to `key` (or of the `[key]` table).
pub fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        if l.trim_end() == format!("[{key}]") {
            return true;
        }
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow!("{e}"))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing configuration")
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn issues(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        for &e in &self.eps {
            if !(0.0..0.75).contains(&e) {
                out.push(issue("eps", format!("error rate {e} outside [0, 3/4)")));
            }
        }
        if self.trials == 0 && self.target_logical_errors.is_none() {
            out.push(issue("trials", "trials = 0 needs target_logical_errors"));
        }
        if self.seed > i64::MAX as u64 {
            out.push(issue("seed", "seed must be below 2^63"));
        }
        match self.code_specs() {
            Ok(specs) if specs.is_empty() => out.push(issue("d", "no distances given")),
            Ok(_) => {}
            Err(e) => out.push(issue("code", e.to_string())),
        }
        if let Err(e) = self.decoder.validate() {
            out.push(issue("decoder", e.to_string()));
        }
        out
    }

    /// Fails with one line per problem, each prefixed by its location.
    pub fn validate(&self, prov: &Provenance) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = issues
            .iter()
            .map(|i| format!("{}: {}: {}", prov.locate(i.key), i.key, i.message))
            .collect();
        bail!("invalid configuration\n{}", lines.join("\n"))
    }

    pub fn code_specs(&self) -> Result<Vec<CodeSpec>> {
        parse_code(&self.code, &self.d)
    }

    pub fn build_codes(&self) -> Result<Vec<StabilizerCode>> {
        self.code_specs()?
            .iter()
            .map(|s| s.build().map_err(anyhow::Error::from))
            .collect()
    }

    /// SHA-256 of everything that determines results. Output paths and the
    /// worker count are excluded since they do not change any number.
    pub fn config_hash(&self) -> String {
        let canonical = RunConfig {
            out: None,
            trial_log: None,
            workers: 0,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolved_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            max_trials: self.trials,
            target_logical_errors: self.target_logical_errors,
            seed: self.seed,
            workers: self.resolved_workers(),
            keep_records: self.trial_log.is_some(),
        }
    }
}

pub fn parse_code(code: &str, d: &[usize]) -> Result<Vec<CodeSpec>> {
    Ok(match code {
        "surface" => d.iter().map(|&d| CodeSpec::RotatedSurface { d }).collect(),
        "toric" => d.iter().map(|&d| CodeSpec::RotatedToric { d }).collect(),
        other => {
            if let Some(preset) = other.strip_prefix("bb:") {
                vec![CodeSpec::BivariateBicycle { preset: preset.into() }]
            } else if let Some(path) = other.strip_prefix("file:") {
                vec![CodeSpec::FromFile(CodeFileBundle::Qcode(path.into()))]
            } else {
                bail!("unknown code {other:?}; expected surface, toric, bb:<preset> or file:<path>")
            }
        }
    })
}

/// Reads `QOSD_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("{THREADS_ENV}={v:?} is not a thread count")),
        Err(_) => Ok(None),
    }
}
