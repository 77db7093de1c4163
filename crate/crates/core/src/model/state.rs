use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::prior::{BetaPert, PriorConfig};

/// Label carried by non-exposed individuals: they sit in the structural
/// zero-risk cluster and never take part in the Dirichlet-process allocation.
pub const RESERVED: usize = usize::MAX;

/// Smallest and largest precision the samplers will store. The default
/// Gamma(0.001, 0.001) prior happily underflows to 0 otherwise.
pub(crate) const PRECISION_FLOOR: f64 = 1e-300;
pub(crate) const PRECISION_CEIL: f64 = 1e300;

/// Parameters of one mixture component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Excess risk; the hazard is multiplied by `1 + beta`.
    pub beta: f64,
    /// Log-scale means of the continuous exposures.
    pub mu: Vec<f64>,
    /// Log-scale standard deviations of the continuous exposures.
    pub sigma: Vec<f64>,
    /// Modality probabilities of each categorical exposure.
    pub p: Vec<Vec<f64>>,
}

impl ClusterParams {
    pub fn check(&self) -> Result<()> {
        if !(self.beta >= -1.0) {
            return Err(Error::Domain(format!("beta {} below -1", self.beta)));
        }
        if self.mu.len() != self.sigma.len() {
            return Err(Error::LengthMismatch {
                left: self.mu.len(),
                right: self.sigma.len(),
            });
        }
        if let Some(s) = self.sigma.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::Domain(format!("sigma {s} must be positive")));
        }
        for probs in &self.p {
            let total: f64 = probs.iter().sum();
            if probs.iter().any(|&q| q < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "categorical probabilities must be a distribution, sum {total}"
                )));
            }
        }
        Ok(())
    }

    /// Draws every parameter from its prior.
    pub fn sample_prior<R: Rng + ?Sized>(
        prior: &PriorConfig,
        pert: &BetaPert,
        modality_counts: &[usize],
        n_continuous: usize,
        rng: &mut R,
    ) -> Self {
        let mut mu = Vec::with_capacity(n_continuous);
        let mut sigma = Vec::with_capacity(n_continuous);
        for k in 0..n_continuous {
            let mp = prior.mu_prior(k);
            mu.push(mp.mean + mp.sd * math::standard_normal(rng));
            let prec = math::sample_gamma(rng, prior.sigma_shape, prior.sigma_rate);
            sigma.push(precision_to_sigma(prec));
        }
        let p = modality_counts
            .iter()
            .map(|&m| math::sample_dirichlet(rng, &vec![prior.dirichlet_conc; m]))
            .collect();
        Self {
            beta: pert.sample(rng),
            mu,
            sigma,
            p,
        }
    }
}

pub(crate) fn precision_to_sigma(prec: f64) -> f64 {
    prec.clamp(PRECISION_FLOOR, PRECISION_CEIL).sqrt().recip()
}

/// Parameters shared by all clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Dirichlet-process concentration.
    pub alpha: f64,
    /// Rescaled baseline-hazard scale, `xi = epsilon * xi_tilde`.
    pub xi_tilde: f64,
    /// Shifted baseline-hazard shape, `nu = nu_prime + 1`.
    pub nu_prime: f64,
    pub epsilon: f64,
}

impl GlobalParams {
    pub fn xi(&self) -> f64 {
        self.epsilon * self.xi_tilde
    }

    pub fn nu(&self) -> f64 {
        self.nu_prime + 1.0
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !(self.xi() > 0.0) || !(self.nu() > 1.0) {
            return Err(Error::Domain(format!("invalid global parameters {self:?}")));
        }
        Ok(())
    }
}

/// Weights `phi_c = V_c prod_{l<c} (1 - V_l)` and the leftover tail mass.
pub fn stick_weights(sticks: &[f64]) -> (Vec<f64>, f64) {
    let mut remaining = 1.0;
    let weights = sticks
        .iter()
        .map(|&v| {
            let w = v * remaining;
            remaining *= 1.0 - v;
            w
        })
        .collect();
    (weights, remaining)
}

/// Full state of one tempered chain, excluding the temperature and the
/// proposal scales, which belong to the chain slot rather than the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    /// Cluster index per individual, or [`RESERVED`] for the non-exposed.
    pub labels: Vec<usize>,
    /// Stick-breaking variables of the represented clusters.
    pub sticks: Vec<f64>,
    /// Slice variables; entries of non-exposed individuals are unused.
    pub slices: Vec<f64>,
    pub clusters: Vec<ClusterParams>,
    /// Structural zero-risk cluster, present when the data has non-exposed individuals.
    pub reserved: Option<ClusterParams>,
    pub globals: GlobalParams,
}

impl ChainState {
    pub fn n_represented(&self) -> usize {
        self.sticks.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        stick_weights(&self.sticks).0
    }

    /// Member count of each represented cluster.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.clusters.len()];
        for &c in &self.labels {
            if c != RESERVED {
                counts[c] += 1;
            }
        }
        counts
    }

    /// Non-empty clusters, counting the structural zero-risk cluster when occupied.
    pub fn n_nonempty(&self) -> usize {
        let dp = self.counts().iter().filter(|&&n| n > 0).count();
        dp + self.labels.iter().any(|&c| c == RESERVED) as usize
    }

    pub fn params_of(&self, label: usize) -> &ClusterParams {
        if label == RESERVED {
            self.reserved.as_ref().expect("reserved cluster missing")
        } else {
            &self.clusters[label]
        }
    }

    /// Checks the stick identity, slice validity and label ranges.
    pub fn check_invariants(&self) -> Result<()> {
        if self.sticks.len() != self.clusters.len() {
            return Err(Error::LengthMismatch {
                left: self.sticks.len(),
                right: self.clusters.len(),
            });
        }
        let (weights, tail) = stick_weights(&self.sticks);
        let total: f64 = weights.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("stick weights sum to {total}")));
        }
        for (i, (&c, &u)) in self.labels.iter().zip(&self.slices).enumerate() {
            if c == RESERVED {
                if self.reserved.is_none() {
                    return Err(Error::Domain(format!("individual {i} reserved without cluster")));
                }
                continue;
            }
            if c >= self.sticks.len() {
                return Err(Error::Domain(format!("individual {i} has label {c} out of range")));
            }
            if !(u > 0.0 && u < weights[c]) {
                return Err(Error::Domain(format!(
                    "slice variable {u} of individual {i} outside (0, {})",
                    weights[c]
                )));
            }
        }
        for cl in self.clusters.iter().chain(self.reserved.as_ref()) {
            cl.check()?;
        }
        self.globals.check()
    }
}
