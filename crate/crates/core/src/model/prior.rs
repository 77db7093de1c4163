use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, ln_beta_fn};

/// Normal prior on the log-scale mean of one continuous exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

/// Hyperparameters of every prior in the model.
///
/// The Gamma prior on `sigma_shape`/`sigma_rate` is placed on the precision
/// `1 / sigma^2`, which is what makes its full conditional a Gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    pub alpha_shape: f64,
    pub alpha_rate: f64,
    pub mu_mean: f64,
    pub mu_sd: f64,
    /// Per-variable overrides of the mean prior, keyed by 0-based variable index.
    pub mu_by_variable: BTreeMap<usize, NormalPrior>,
    pub sigma_shape: f64,
    pub sigma_rate: f64,
    pub dirichlet_conc: f64,
    pub xi_shape: f64,
    pub xi_rate: f64,
    pub nu_shape: f64,
    pub nu_rate: f64,
    pub pert_min: f64,
    pub pert_mode: f64,
    pub pert_max: f64,
    /// Fixed scale linking the sampled `xi_tilde` to the baseline hazard: `xi = epsilon * xi_tilde`.
    pub epsilon: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            alpha_shape: 2.0,
            alpha_rate: 1.0,
            mu_mean: 0.0,
            mu_sd: 10.0,
            mu_by_variable: BTreeMap::new(),
            sigma_shape: 0.001,
            sigma_rate: 0.001,
            dirichlet_conc: 0.5,
            xi_shape: 1.0,
            xi_rate: 1.0,
            nu_shape: 0.001,
            nu_rate: 0.001,
            pert_min: -1.0,
            pert_mode: 0.0,
            pert_max: 15.0,
            epsilon: 1e-24,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_shape", self.alpha_shape),
            ("alpha_rate", self.alpha_rate),
            ("mu_sd", self.mu_sd),
            ("sigma_shape", self.sigma_shape),
            ("sigma_rate", self.sigma_rate),
            ("dirichlet_conc", self.dirichlet_conc),
            ("xi_shape", self.xi_shape),
            ("xi_rate", self.xi_rate),
            ("nu_shape", self.nu_shape),
            ("nu_rate", self.nu_rate),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (k, p) in &self.mu_by_variable {
            if !(p.sd > 0.0) {
                return Err(Error::Config(format!("mu prior sd for variable {k} must be positive")));
            }
        }
        if self.pert_min < -1.0 {
            return Err(Error::Config("pert_min must be >= -1".into()));
        }
        self.pert()?;
        Ok(())
    }

    pub fn pert(&self) -> Result<BetaPert> {
        BetaPert::new(self.pert_min, self.pert_mode, self.pert_max)
    }

    pub fn mu_prior(&self, variable: usize) -> NormalPrior {
        self.mu_by_variable.get(&variable).copied().unwrap_or(NormalPrior {
            mean: self.mu_mean,
            sd: self.mu_sd,
        })
    }
}

/// Beta-PERT distribution on `[min, max]` with the given mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPert {
    min: f64,
    mode: f64,
    max: f64,
}

impl BetaPert {
    pub fn new(min: f64, mode: f64, max: f64) -> Result<Self> {
        if !(max > min) {
            return Err(Error::DegenerateRange { min, max });
        }
        if !(mode > min && mode < max) {
            return Err(Error::Domain(format!(
                "PERT mode {mode} must lie strictly inside ({min}, {max})"
            )));
        }
        Ok(Self { min, mode, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Beta shapes `1 + 4 (mode - min) / range` and `1 + 4 (max - mode) / range`.
    pub fn shapes(&self) -> (f64, f64) {
        let range = self.max - self.min;
        (
            1.0 + 4.0 * (self.mode - self.min) / range,
            1.0 + 4.0 * (self.max - self.mode) / range,
        )
    }

    pub fn ln_pdf(&self, b: f64) -> f64 {
        if !(b >= self.min && b <= self.max) {
            return f64::NEG_INFINITY;
        }
        let range = self.max - self.min;
        let (a1, a2) = self.shapes();
        let z = (b - self.min) / range;
        (a1 - 1.0) * z.ln() + (a2 - 1.0) * (-z).ln_1p() - ln_beta_fn(a1, a2) - range.ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a1, a2) = self.shapes();
        self.min + (self.max - self.min) * math::sample_beta(rng, a1, a2)
    }
}

/// Log density of a Beta-PERT distribution at `b`.
pub fn beta_pert_log_density(b: f64, min: f64, mode: f64, max: f64) -> Result<f64> {
    Ok(BetaPert::new(min, mode, max)?.ln_pdf(b))
}
