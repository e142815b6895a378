//! Flat TOML run configuration.
//!
//! Every key is optional at parse time. Each experiment resolves the keys it
//! understands, fills documented defaults and rejects keys it does not use,
//! so the resolved struct written to the manifest is the full record of a
//! run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::ManifoldKind;

pub const OUTPUT_DIR_ENV: &str = "SURFACE_NLS_OUTPUT_DIR";
pub const WORKERS_ENV: &str = "SURFACE_NLS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Evolve,
    AlmostConservation,
    Strichartz,
    Locality,
    AnIdentity,
    Tensorize,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Evolve,
        Experiment::AlmostConservation,
        Experiment::Strichartz,
        Experiment::Locality,
        Experiment::AnIdentity,
        Experiment::Tensorize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::AlmostConservation => "almost-conservation",
            Experiment::Strichartz => "strichartz",
            Experiment::Locality => "locality",
            Experiment::AnIdentity => "an-identity",
            Experiment::Tensorize => "tensorize",
        }
    }

    /// Keys an experiment accepts besides the common ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Evolve => &[
                "manifold", "lambda", "cutoff", "data_decay", "data_mass", "scheme", "dt",
                "t_final", "record_every", "s", "n", "mass_tolerance",
            ],
            Experiment::AlmostConservation => &[
                "s", "n_list", "lambda", "delta", "cutoff", "data_decay", "data_mass", "steps",
                "record_every", "max_slope",
            ],
            Experiment::Strichartz => &[
                "manifold", "lambda", "n1_list", "n2", "trials", "regime", "low_frequency_ball",
                "max_ratio_factor",
            ],
            Experiment::Locality => &[
                "lambda_cluster", "mu_cluster", "k_list", "trials", "quadruples", "cutoff",
                "zero_tolerance",
            ],
            Experiment::AnIdentity => &["quadruples", "n_max", "cutoff", "lambda", "max_error"],
            Experiment::Tensorize => &[
                "s", "n", "l", "block_n2", "block_n3", "block_n4", "alpha", "beta", "mode_cap",
                "extension", "tolerance", "held_out",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// `lambda = "auto"` (`N^{(1−s)/s}`) or an explicit positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaRule {
    Explicit(f64),
    Named(LambdaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaName {
    Auto,
}

impl LambdaRule {
    pub const AUTO: LambdaRule = LambdaRule::Named(LambdaName::Auto);

    pub fn is_auto(&self) -> bool {
        matches!(self, LambdaRule::Named(LambdaName::Auto))
    }
}

/// Raw keys as written in the file. Times are in units of the rescaled
/// surface; frequencies are square roots of Laplace eigenvalues.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,

    pub manifold: Option<ManifoldKind>,
    pub lambda: Option<LambdaRule>,
    pub cutoff: Option<f64>,
    pub s: Option<f64>,
    pub n: Option<f64>,
    pub n_list: Option<Vec<f64>>,
    pub delta: Option<f64>,

    pub scheme: Option<String>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub steps: Option<usize>,
    pub record_every: Option<usize>,
    pub data_decay: Option<f64>,
    pub data_mass: Option<f64>,

    pub n1_list: Option<Vec<u64>>,
    pub n2: Option<u64>,
    pub trials: Option<usize>,
    pub regime: Option<String>,
    pub low_frequency_ball: Option<bool>,

    pub lambda_cluster: Option<f64>,
    pub mu_cluster: Option<f64>,
    pub k_list: Option<Vec<f64>>,
    pub quadruples: Option<usize>,
    pub n_max: Option<u32>,

    pub l: Option<u32>,
    pub block_n2: Option<f64>,
    pub block_n3: Option<f64>,
    pub block_n4: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mode_cap: Option<usize>,
    pub extension: Option<String>,
    pub tolerance: Option<f64>,
    pub held_out: Option<usize>,

    pub mass_tolerance: Option<f64>,
    pub max_slope: Option<f64>,
    pub max_ratio_factor: Option<f64>,
    pub zero_tolerance: Option<f64>,
    pub max_error: Option<f64>,
}

const COMMON_KEYS: [&str; 4] = ["experiment", "seed", "output_dir", "workers"];

/// A parsed config together with its source text, for line-precise errors.
#[derive(Debug, Clone)]
pub struct ConfigSource {
    pub path: Option<PathBuf>,
    pub text: String,
    pub config: RunConfig,
}

impl ConfigSource {
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let label = path.map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{label}: {e}")))?;
        Ok(ConfigSource {
            path: path.map(Path::to_path_buf),
            text: text.to_string(),
            config,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, Some(path))
    }

    /// Empty config, all defaults.
    pub fn empty() -> Self {
        ConfigSource {
            path: None,
            text: String::new(),
            config: RunConfig::default(),
        }
    }

    /// 1-based line on which `key` is assigned.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.text.lines().position(|line| {
            let t = line.trim_start();
            t.strip_prefix(key)
                .map(|rest| rest.trim_start().starts_with('='))
                .unwrap_or(false)
        })
        .map(|i| i + 1)
    }

    /// Config error pointing at the line of `key` when it is present.
    pub fn error(&self, key: &str, msg: impl fmt::Display) -> Error {
        let file = self
            .path
            .as_ref()
            .map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        match self.line_of(key) {
            Some(line) => Error::Config(format!("{file}:{line}: {key}: {msg}")),
            None => Error::Config(format!("{file}: {key}: {msg}")),
        }
    }

    /// Checks the `experiment` key against the subcommand and rejects keys
    /// the experiment does not use.
    pub fn check_for(&self, experiment: Experiment) -> Result<()> {
        if let Some(e) = self.config.experiment {
            if e != experiment {
                return Err(self.error(
                    "experiment",
                    format!("config is for {e}, but the subcommand is {experiment}"),
                ));
            }
        }
        let value = serde_json::to_value(&self.config).expect("config serializes");
        let allowed = experiment.keys();
        for (key, v) in value.as_object().expect("config is a map") {
            if v.is_null() || COMMON_KEYS.contains(&key.as_str()) {
                continue;
            }
            if !allowed.contains(&key.as_str()) {
                return Err(self.error(key, format!("not used by the {experiment} experiment")));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Output directory: environment override, then config, then `out/<experiment>`.
    pub fn output_dir(&self, experiment: Experiment) -> PathBuf {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        self.config
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()))
    }

    /// Worker count: environment override, then config, then 1.
    pub fn workers(&self) -> Result<usize> {
        let w = match std::env::var(WORKERS_ENV) {
            Ok(v) if !v.is_empty() => v.parse::<usize>().map_err(|_| {
                Error::Config(format!("{WORKERS_ENV}={v:?} is not a worker count"))
            })?,
            _ => self.config.workers.unwrap_or(1),
        };
        if w == 0 {
            return Err(self.error("workers", "must be at least 1"));
        }
        Ok(w)
    }

    pub fn positive(&self, key: &str, v: Option<f64>, default: f64) -> Result<f64> {
        let x = v.unwrap_or(default);
        if !(x.is_finite() && x > 0.0) {
            return Err(self.error(key, format!("must be a positive number, got {x}")));
        }
        Ok(x)
    }

    pub fn nonempty<T: Clone>(&self, key: &str, v: &Option<Vec<T>>, default: &[T]) -> Result<Vec<T>> {
        let list = v.clone().unwrap_or_else(|| default.to_vec());
        if list.is_empty() {
            return Err(self.error(key, "sweep list is empty"));
        }
        Ok(list)
    }
}

pub const DEFAULT_SEED: u64 = 20_240_611;
