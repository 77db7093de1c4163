//! Log densities: survival and exposure terms, per-individual mixture
//! components and the tempered target of a chain.
//!
//! The baseline hazard is `h0(t) = xi t^(nu-1)`, so the cumulative hazard
//! of an individual in a cluster with excess risk `beta` is
//! `H(t) = (1 + beta) xi t^nu / nu`. Follow-up starts at the entry time,
//! which makes the survival term `delta log h(y) - (H(y) - H(entry))`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{self, pairwise_sum, LN_SQRT_2PI};
use crate::model::{
    stick_weights, ChainState, ClusterParams, Dataset, GlobalParams, Individual, PriorConfig,
    RESERVED,
};

/// `y^nu - entry^nu`, computed without cancellation when `entry` is close to `y`.
#[inline]
pub(crate) fn power_difference(ln_time: f64, ln_entry: f64, nu: f64) -> f64 {
    (nu * ln_time).exp() * -(nu * (ln_entry - ln_time)).exp_m1()
}

/// Survival log-likelihood of one right-censored, left-truncated record.
pub fn survival_log_lik(
    time: f64,
    event: bool,
    entry: f64,
    beta: f64,
    nu: f64,
    xi: f64,
) -> Result<f64> {
    if !(time > entry && entry >= 0.0) {
        return Err(Error::Domain(format!(
            "need time > entry >= 0, got time {time}, entry {entry}"
        )));
    }
    if !(beta >= -1.0) || !(nu > 1.0) || !(xi > 0.0) {
        return Err(Error::Domain(format!(
            "need beta >= -1, nu > 1, xi > 0; got beta {beta}, nu {nu}, xi {xi}"
        )));
    }
    let ln_time = time.ln();
    let cum = (1.0 + beta) * xi / nu * power_difference(ln_time, entry.ln(), nu);
    if !event {
        return Ok(-cum);
    }
    if beta == -1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(xi.ln() + (nu - 1.0) * ln_time + beta.ln_1p() - cum)
}

/// Log density of the observed exposures of `ind` under cluster `theta`.
pub fn exposure_log_lik(ind: &Individual, theta: &ClusterParams) -> Result<f64> {
    if ind.x_cont.len() != theta.mu.len() || ind.x_cat.len() != theta.p.len() {
        return Err(Error::LengthMismatch {
            left: ind.x_cont.len() + ind.x_cat.len(),
            right: theta.mu.len() + theta.p.len(),
        });
    }
    let mut out = 0.0;
    for (k, x) in ind.x_cont.iter().enumerate() {
        let Some(x) = *x else { continue };
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "record {}: continuous exposure {k} must be positive, got {x}",
                ind.id
            )));
        }
        let lx = x.ln();
        out += math::normal_ln_pdf(lx, theta.mu[k], theta.sigma[k]) - lx;
    }
    for (j, x) in ind.x_cat.iter().enumerate() {
        let Some(m) = *x else { continue };
        let prob = theta.p[j]
            .get(m)
            .ok_or_else(|| Error::Domain(format!("category {m} out of range for variable {j}")))?;
        out += prob.ln();
    }
    Ok(out)
}

/// Full data log-likelihood of `ind` as a member of the cluster `theta`.
pub fn individual_log_lik(
    ind: &Individual,
    theta: &ClusterParams,
    globals: &GlobalParams,
) -> Result<f64> {
    let surv = survival_log_lik(
        ind.time,
        ind.event,
        ind.entry,
        theta.beta,
        globals.nu(),
        globals.xi(),
    )?;
    Ok(surv + exposure_log_lik(ind, theta)?)
}

/// Per-individual data log-likelihood at the state's current allocation.
pub fn data_log_lik_terms(state: &ChainState, data: &Dataset) -> Result<Vec<f64>> {
    data.individuals
        .par_iter()
        .zip(state.labels.par_iter())
        .map(|(ind, &c)| individual_log_lik(ind, state.params_of(c), &state.globals))
        .collect()
}

/// Log prior density of everything in the state except the slice variables.
///
/// Includes the allocation probabilities `log phi_{C_i}`, the stick
/// densities, all cluster parameters (precision parameterization for the
/// spreads) and the hyperpriors of `alpha`, `xi_tilde` and `nu_prime`.
pub fn log_prior(state: &ChainState, prior: &PriorConfig) -> Result<f64> {
    let g = &state.globals;
    let pert = prior.pert()?;
    let mut out = math::gamma_ln_pdf(g.alpha, prior.alpha_shape, prior.alpha_rate)
        + math::gamma_ln_pdf(g.xi_tilde, prior.xi_shape, prior.xi_rate)
        + math::gamma_ln_pdf(g.nu_prime, prior.nu_shape, prior.nu_rate);
    out += state
        .sticks
        .iter()
        .map(|&v| math::beta_ln_pdf(v, 1.0, g.alpha))
        .sum::<f64>();
    let (weights, _) = stick_weights(&state.sticks);
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    out += state
        .labels
        .iter()
        .filter(|&&c| c != RESERVED)
        .map(|&c| log_w[c])
        .sum::<f64>();
    for cl in &state.clusters {
        out += pert.ln_pdf(cl.beta) + exposure_param_log_prior(cl, prior);
    }
    if let Some(cl) = &state.reserved {
        out += exposure_param_log_prior(cl, prior);
    }
    Ok(out)
}

fn exposure_param_log_prior(cl: &ClusterParams, prior: &PriorConfig) -> f64 {
    let mut out = 0.0;
    for (k, (&mu, &sigma)) in cl.mu.iter().zip(&cl.sigma).enumerate() {
        let mp = prior.mu_prior(k);
        out += math::normal_ln_pdf(mu, mp.mean, mp.sd);
        out += math::gamma_ln_pdf(1.0 / (sigma * sigma), prior.sigma_shape, prior.sigma_rate);
    }
    for probs in &cl.p {
        out += math::dirichlet_ln_pdf(probs, &vec![prior.dirichlet_conc; probs.len()]);
    }
    out
}

/// `(1/T) sum_i log[D_i | w] + log[w]`: only the data likelihood is tempered.
pub fn tempered_log_target(
    state: &ChainState,
    data: &Dataset,
    prior: &PriorConfig,
    temperature: f64,
) -> Result<f64> {
    if !(temperature >= 1.0) {
        return Err(Error::Domain(format!("temperature {temperature} below 1")));
    }
    let loglik = pairwise_sum(&data_log_lik_terms(state, data)?);
    Ok(loglik / temperature + log_prior(state, prior)?)
}

/// Untempered log posterior (up to its normalizing constant).
pub fn log_posterior(state: &ChainState, data: &Dataset, prior: &PriorConfig) -> Result<f64> {
    let loglik = pairwise_sum(&data_log_lik_terms(state, data)?);
    Ok(loglik + log_prior(state, prior)?)
}

/// Per-individual log-likelihood at the current parameters and their total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogLikCache {
    values: Vec<f64>,
    total: f64,
}

impl LogLikCache {
    pub fn from_values(values: Vec<f64>) -> Self {
        let total = pairwise_sum(&values);
        Self { values, total }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Replaces one entry, adjusting the running total.
    pub fn set(&mut self, index: usize, value: f64) {
        self.total += value - self.values[index];
        self.values[index] = value;
    }

    /// Replaces every entry and recomputes the total from scratch.
    pub fn refresh(&mut self, values: Vec<f64>) {
        *self = Self::from_values(values);
    }

    pub fn recomputed_total(&self) -> f64 {
        pairwise_sum(&self.values)
    }
}

/// Dataset flattened for the inner loops of the sampler.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub n: usize,
    pub n_continuous: usize,
    pub n_categorical: usize,
    pub modality_counts: Vec<usize>,
    /// Row-major `n x K` log exposures, NaN when absent.
    pub log_x: Vec<f64>,
    /// Row-major `n x J` categories, `u32::MAX` when absent.
    pub cat: Vec<u32>,
    pub ln_time: Vec<f64>,
    pub ln_entry: Vec<f64>,
    pub event: Vec<bool>,
    pub exposed: Vec<bool>,
    /// Cluster-independent part of the exposure density: `sum_k -(ln x + ln sqrt(2 pi))`.
    pub exposure_const: Vec<f64>,
    pub n_events: usize,
}

pub(crate) const CAT_ABSENT: u32 = u32::MAX;

impl PreparedData {
    pub fn new(data: &Dataset) -> Self {
        let n = data.len();
        let kc = data.n_continuous;
        let jc = data.n_categorical;
        let mut log_x = Vec::with_capacity(n * kc);
        let mut cat = Vec::with_capacity(n * jc);
        let mut exposure_const = Vec::with_capacity(n);
        for ind in &data.individuals {
            let mut c = 0.0;
            for x in &ind.x_cont {
                match x {
                    Some(x) => {
                        let lx = x.ln();
                        c -= lx + LN_SQRT_2PI;
                        log_x.push(lx);
                    }
                    None => log_x.push(f64::NAN),
                }
            }
            cat.extend(ind.x_cat.iter().map(|m| m.map_or(CAT_ABSENT, |m| m as u32)));
            exposure_const.push(c);
        }
        Self {
            n,
            n_continuous: kc,
            n_categorical: jc,
            modality_counts: data.modality_counts.clone(),
            log_x,
            cat,
            ln_time: data.individuals.iter().map(|i| i.time.ln()).collect(),
            ln_entry: data.individuals.iter().map(|i| i.entry.ln()).collect(),
            event: data.individuals.iter().map(|i| i.event).collect(),
            exposed: data.individuals.iter().map(|i| i.exposed).collect(),
            exposure_const,
            n_events: data.individuals.iter().filter(|i| i.event).count(),
        }
    }

    #[inline]
    pub fn log_x_row(&self, i: usize) -> &[f64] {
        &self.log_x[i * self.n_continuous..(i + 1) * self.n_continuous]
    }

    #[inline]
    pub fn cat_row(&self, i: usize) -> &[u32] {
        &self.cat[i * self.n_categorical..(i + 1) * self.n_categorical]
    }
}

/// Baseline-hazard quantities that depend only on `(xi, nu)`.
#[derive(Debug, Clone)]
pub(crate) struct SurvivalBase {
    /// `y^nu - entry^nu` per individual.
    pub pow_diff: Vec<f64>,
    pub ln_xi: f64,
    pub nu_minus_one: f64,
    pub xi_over_nu: f64,
}

impl SurvivalBase {
    pub fn new(data: &PreparedData, globals: &GlobalParams) -> Self {
        let nu = globals.nu();
        let pow_diff = data
            .ln_time
            .iter()
            .zip(&data.ln_entry)
            .map(|(&lt, &le)| power_difference(lt, le, nu))
            .collect();
        Self::with_pow_diff(pow_diff, globals)
    }

    pub fn with_pow_diff(pow_diff: Vec<f64>, globals: &GlobalParams) -> Self {
        Self {
            pow_diff,
            ln_xi: globals.xi().ln(),
            nu_minus_one: globals.nu_prime,
            xi_over_nu: globals.xi() / globals.nu(),
        }
    }

    #[inline]
    pub fn log_hazard0(&self, data: &PreparedData, i: usize) -> f64 {
        if data.event[i] {
            self.ln_xi + self.nu_minus_one * data.ln_time[i]
        } else {
            0.0
        }
    }
}

/// Cluster parameters in the form the inner loop wants.
#[derive(Debug, Clone)]
pub(crate) struct ClusterKernel {
    log1p_beta: f64,
    one_plus_beta: f64,
    mu: Vec<f64>,
    half_precision: Vec<f64>,
    ln_sigma: Vec<f64>,
    ln_p: Vec<Vec<f64>>,
}

impl ClusterKernel {
    pub fn new(cl: &ClusterParams) -> Self {
        Self {
            log1p_beta: cl.beta.ln_1p(),
            one_plus_beta: 1.0 + cl.beta,
            mu: cl.mu.clone(),
            half_precision: cl.sigma.iter().map(|s| 0.5 / (s * s)).collect(),
            ln_sigma: cl.sigma.iter().map(|s| s.ln()).collect(),
            ln_p: cl.p.iter().map(|p| p.iter().map(|q| q.ln()).collect()).collect(),
        }
    }

    /// Data log-likelihood of individual `i` in this cluster.
    #[inline]
    pub fn log_lik(&self, data: &PreparedData, base: &SurvivalBase, i: usize) -> f64 {
        let mut out = data.exposure_const[i] - self.one_plus_beta * base.xi_over_nu * base.pow_diff[i];
        if data.event[i] {
            out += base.log_hazard0(data, i) + self.log1p_beta;
        }
        for (k, &lx) in data.log_x_row(i).iter().enumerate() {
            if !lx.is_nan() {
                let d = lx - self.mu[k];
                out -= self.ln_sigma[k] + self.half_precision[k] * d * d;
            }
        }
        for (j, &m) in data.cat_row(i).iter().enumerate() {
            if m != CAT_ABSENT {
                out += self.ln_p[j][m as usize];
            }
        }
        out
    }
}
