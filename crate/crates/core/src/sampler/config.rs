use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Blocks of iterations over which proposal scales are tuned before being frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptationSchedule {
    pub n_blocks: usize,
    pub block_len: usize,
    /// Target acceptance for scalar random-walk proposals.
    pub target_single: f64,
    /// Target acceptance for vector proposals (none of the current moves are joint).
    pub target_vector: f64,
}

impl Default for AdaptationSchedule {
    fn default() -> Self {
        Self {
            n_blocks: 100,
            block_len: 100,
            target_single: 0.40,
            target_vector: 0.20,
        }
    }
}

impl AdaptationSchedule {
    pub fn adaptive_iterations(&self) -> usize {
        self.n_blocks * self.block_len
    }
}

/// Scale multiplier applied at the end of an adaptive block.
pub fn adapted_scale(scale: f64, observed: f64, target: f64) -> f64 {
    scale * (observed - target).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// One independent random stream per individual, evaluated on the rayon pool.
    #[default]
    Parallel,
    /// Individuals scanned in order using the chain's own stream.
    Sequential,
}

/// Everything that controls one chain apart from the priors and temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub adaptation: AdaptationSchedule,
    pub burn_in: usize,
    pub iterations: usize,
    /// Keep every `thin`-th sampling iteration.
    pub thin: usize,
    pub max_clusters: usize,
    /// Number of clusters the exposed individuals are spread over at start.
    pub initial_clusters: usize,
    pub alpha_init: Option<f64>,
    pub xi_tilde_init: Option<f64>,
    pub nu_prime_init: Option<f64>,
    pub allocation: AllocationMode,
    pub label_switching: bool,
    pub initial_scales: InitialScales,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            adaptation: AdaptationSchedule::default(),
            burn_in: 20_000,
            iterations: 40_000,
            thin: 1,
            max_clusters: 100,
            initial_clusters: 20,
            alpha_init: None,
            xi_tilde_init: None,
            nu_prime_init: None,
            allocation: AllocationMode::Parallel,
            label_switching: true,
            initial_scales: InitialScales::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.adaptation.block_len == 0 && self.adaptation.n_blocks > 0 {
            return Err(Error::Config("adaptation block length must be positive".into()));
        }
        for (name, t) in [
            ("target_single", self.adaptation.target_single),
            ("target_vector", self.adaptation.target_vector),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.max_clusters == 0 || self.initial_clusters == 0 {
            return Err(Error::Config("cluster counts must be positive".into()));
        }
        if self.initial_clusters > self.max_clusters {
            return Err(Error::Config("initial_clusters exceeds max_clusters".into()));
        }
        for (name, v) in [
            ("alpha_init", self.alpha_init),
            ("xi_tilde_init", self.xi_tilde_init),
            ("nu_prime_init", self.nu_prime_init),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive")));
                }
            }
        }
        self.initial_scales.validate()
    }

    pub fn total_iterations(&self) -> usize {
        self.adaptation.adaptive_iterations() + self.burn_in + self.iterations
    }
}

/// Starting proposal standard deviations. Scales for `alpha`, `xi_tilde`
/// and `nu_prime` act on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialScales {
    pub alpha: f64,
    pub xi_tilde: f64,
    pub nu_prime: f64,
    pub beta: f64,
}

impl Default for InitialScales {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            xi_tilde: 0.2,
            nu_prime: 0.02,
            beta: 0.5,
        }
    }
}

impl InitialScales {
    fn validate(&self) -> Result<()> {
        if [self.alpha, self.xi_tilde, self.nu_prime, self.beta]
            .iter()
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(Error::Config("proposal scales must be positive".into()));
        }
        Ok(())
    }
}

/// Current proposal scales of one chain; `beta` holds one entry per cluster slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalScales {
    pub alpha: f64,
    pub xi_tilde: f64,
    pub nu_prime: f64,
    pub beta: Vec<f64>,
}

impl ProposalScales {
    pub fn new(initial: &InitialScales, max_clusters: usize) -> Self {
        Self {
            alpha: initial.alpha,
            xi_tilde: initial.xi_tilde,
            nu_prime: initial.nu_prime,
            beta: vec![initial.beta; max_clusters],
        }
    }
}
