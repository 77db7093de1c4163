use std::path::{Path, PathBuf};

use bprm::model::PriorConfig;
use bprm::sampler::SamplerConfig;
use bprm::simgen::Censoring;
use bprm::tempering::Ladder;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Binder,
    #[default]
    Pam,
    Vi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    pub method: Method,
    pub k_max: usize,
    /// Stride applied to the sample when computing expected VI.
    pub stride: usize,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            method: Method::Pam,
            k_max: 10,
            stride: 1,
        }
    }
}

/// Everything a fit needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub sampler: SamplerConfig,
    pub prior: PriorConfig,
    pub ladder: Ladder,
    /// Run the single cold chain when false.
    pub tempering: bool,
    pub seed: u64,
    /// One chain per value, each started at that concentration. Empty means
    /// a single chain with `sampler.alpha_init`.
    pub alpha_inits: Vec<f64>,
    pub postprocess: PostprocessConfig,
    pub censoring: Censoring,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            prior: PriorConfig::default(),
            ladder: Ladder::default(),
            tempering: true,
            seed: 1,
            alpha_inits: vec![],
            postprocess: PostprocessConfig::default(),
            censoring: Censoring::default(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.sampler.validate()?;
        self.prior.validate()?;
        self.ladder.validate()?;
        if self.sampler.iterations == 0 {
            return Err(CliError::Config("the sampling phase needs at least one iteration".into()));
        }
        if self.postprocess.k_max < 2 || self.postprocess.stride == 0 {
            return Err(CliError::Config("k_max must be >= 2 and stride >= 1".into()));
        }
        if let Some(a) = self.alpha_inits.iter().find(|a| !(**a > 0.0)) {
            return Err(CliError::Config(format!("initial alpha {a} must be positive")));
        }
        Ok(())
    }

    /// Reads a config file, or the config recorded in a manifest.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) if value.get("command").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Record written next to every output: what ran, with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_cluster: Option<usize>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, seeds: Vec<u64>, inputs: Vec<PathBuf>) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            seeds,
            inputs,
            scenario: None,
            n_per_cluster: None,
        }
    }
}
