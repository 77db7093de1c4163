use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::{power_difference, ClusterKernel, LogLikCache, PreparedData, SurvivalBase};
use crate::math;
use crate::model::{
    stick_weights, BetaPert, ChainState, ClusterParams, Dataset, GlobalParams, PriorConfig,
    RESERVED,
};
use crate::model::precision_to_sigma;
use crate::sampler::conditionals::{
    alpha_step, mh_accept, open_unit, pooled_weibull_mle, sample_mean, sample_precision,
    sample_probabilities, sample_sticks, NormalStats,
};
use crate::sampler::config::{adapted_scale, AllocationMode, ProposalScales, SamplerConfig};
use crate::sampler::moves::label_switching_moves;
use crate::sampler::output::{Counter, Draw, MoveStats, Phase, PosteriorSample, TraceRow};

/// Random stream of chain `index` (0 is the cold chain) for a run seed.
/// Stream 0 of the same key is left to the tempering controller.
pub fn chain_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn phase_of(config: &SamplerConfig, iter: usize) -> Phase {
    let adaptive = config.adaptation.adaptive_iterations();
    if iter < adaptive {
        Phase::Adaptive
    } else if iter < adaptive + config.burn_in {
        Phase::BurnIn
    } else {
        Phase::Sampling
    }
}

#[derive(Debug, Clone, Default)]
struct BlockCounters {
    alpha: Counter,
    xi_tilde: Counter,
    nu_prime: Counter,
    beta: Vec<Counter>,
}

#[derive(Debug, Clone, Default)]
struct ClusterStats {
    n: usize,
    events: usize,
    /// Sum of `y^nu - entry^nu` over members.
    hazard: f64,
    normal: Vec<NormalStats>,
    cats: Vec<Vec<usize>>,
}

/// One Markov chain at a fixed temperature.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    data: &'a PreparedData,
    prior: &'a PriorConfig,
    config: &'a SamplerConfig,
    pert: BetaPert,
    temperature: f64,
    state: ChainState,
    base: SurvivalBase,
    loglik: LogLikCache,
    scales: ProposalScales,
    stats: MoveStats,
    block: BlockCounters,
    rng: ChaCha8Rng,
    iteration: usize,
    ln_t_ref: f64,
    sum_ln_event_time: f64,
    last_allocation_micros: u64,
}

impl<'a> Chain<'a> {
    pub fn new(
        data: &'a PreparedData,
        prior: &'a PriorConfig,
        config: &'a SamplerConfig,
        temperature: f64,
        mut rng: ChaCha8Rng,
    ) -> Result<Self> {
        prior.validate()?;
        config.validate()?;
        if !(temperature >= 1.0 && temperature.is_finite()) {
            return Err(Error::Config(format!("temperature {temperature} must be >= 1")));
        }
        let pert = prior.pert()?;

        let alpha = config
            .alpha_init
            .unwrap_or_else(|| math::sample_gamma(&mut rng, prior.alpha_shape, prior.alpha_rate));
        let mle = pooled_weibull_mle(&data.ln_time, &data.ln_entry, &data.event);
        let (xi_tilde0, nu_prime0) = match mle {
            Some((xi, nu)) => (xi / prior.epsilon, (nu - 1.0).max(1e-3)),
            None => (1.0, 1.0),
        };
        let globals = GlobalParams {
            alpha,
            xi_tilde: config.xi_tilde_init.unwrap_or(xi_tilde0),
            nu_prime: config.nu_prime_init.unwrap_or(nu_prime0),
            epsilon: prior.epsilon,
        };
        globals.check()?;

        let k0 = config.initial_clusters;
        let labels: Vec<usize> = data
            .exposed
            .iter()
            .map(|&e| if e { rng.random_range(0..k0) } else { RESERVED })
            .collect();
        let clusters: Vec<ClusterParams> = (0..k0)
            .map(|_| {
                ClusterParams::sample_prior(prior, &pert, &data.modality_counts, data.n_continuous, &mut rng)
            })
            .collect();
        let reserved = data.exposed.iter().any(|&e| !e).then(|| {
            let mut cl = ClusterParams::sample_prior(
                prior,
                &pert,
                &data.modality_counts,
                data.n_continuous,
                &mut rng,
            );
            cl.beta = 0.0;
            cl
        });
        let mut state = ChainState {
            labels,
            sticks: vec![],
            slices: vec![0.0; data.n],
            clusters,
            reserved,
            globals,
        };
        let counts = state.counts();
        state.sticks = sample_sticks(&counts, 0, alpha, &mut rng);
        let (w, _) = stick_weights(&state.sticks);
        for (u, &c) in state.slices.iter_mut().zip(&state.labels) {
            if c != RESERVED {
                *u = 0.5 * w[c];
            }
        }

        let event_times: Vec<f64> = data
            .ln_time
            .iter()
            .zip(&data.event)
            .filter(|(_, &e)| e)
            .map(|(&l, _)| l)
            .collect();
        let ln_t_ref = if event_times.is_empty() {
            math::mean(&data.ln_time)
        } else {
            math::mean(&event_times)
        };
        let sum_ln_event_time = event_times.iter().sum();

        let base = SurvivalBase::new(data, &state.globals);
        let mut chain = Self {
            data,
            prior,
            config,
            pert,
            temperature,
            state,
            base,
            loglik: LogLikCache::default(),
            scales: ProposalScales::new(&config.initial_scales, config.max_clusters),
            stats: MoveStats::default(),
            block: BlockCounters {
                beta: vec![Counter::default(); config.max_clusters],
                ..BlockCounters::default()
            },
            rng,
            iteration: 0,
            ln_t_ref,
            sum_ln_event_time,
            last_allocation_micros: 0,
        };
        // A few parameter sweeps so the random initial clusters describe their members.
        for _ in 0..5 {
            chain.update_cluster_params();
        }
        chain.stats = MoveStats::default();
        chain.block = BlockCounters {
            beta: vec![Counter::default(); config.max_clusters],
            ..BlockCounters::default()
        };
        chain.refresh_loglik();
        Ok(chain)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Untempered data log-likelihood at the current state.
    pub fn loglik(&self) -> f64 {
        self.loglik.total()
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn scales(&self) -> &ProposalScales {
        &self.scales
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Exchanges the full states of two chains, leaving temperatures,
    /// proposal scales, counters and random streams in place.
    pub fn swap_states(&mut self, other: &mut Chain<'a>) {
        std::mem::swap(&mut self.state, &mut other.state);
        std::mem::swap(&mut self.base, &mut other.base);
        std::mem::swap(&mut self.loglik, &mut other.loglik);
    }

    /// Runs one full sweep and the adaptation bookkeeping.
    pub fn step(&mut self) -> Result<()> {
        if self.config.label_switching {
            label_switching_moves(&mut self.state, &mut self.rng, &mut self.stats);
        }
        self.update_sticks_and_slices()?;
        let start = Instant::now();
        self.update_allocations()?;
        self.last_allocation_micros = start.elapsed().as_micros() as u64;
        self.update_cluster_params();
        self.update_alpha();
        let risk = self.risk_factors();
        self.update_xi_tilde(&risk);
        self.update_nu_prime(&risk);
        self.refresh_loglik();
        self.adapt();
        self.iteration += 1;
        Ok(())
    }

    fn update_sticks_and_slices(&mut self) -> Result<()> {
        let mut counts = self.state.counts();
        let keep = counts.iter().rposition(|&n| n > 0).map_or(0, |p| p + 1);
        counts.truncate(keep);
        self.state.clusters.truncate(keep);
        self.state.sticks = sample_sticks(&counts, 0, self.state.globals.alpha, &mut self.rng);
        let (mut w, mut tail) = stick_weights(&self.state.sticks);
        let mut min_u = 1.0f64;
        for (u, &c) in self.state.slices.iter_mut().zip(&self.state.labels) {
            if c == RESERVED {
                *u = 0.0;
            } else {
                *u = w[c] * open_unit(&mut self.rng);
                min_u = min_u.min(*u);
            }
        }
        while tail >= min_u {
            if self.state.sticks.len() >= self.config.max_clusters {
                return Err(Error::CapExceeded {
                    cap: self.config.max_clusters,
                });
            }
            let v = math::sample_beta(&mut self.rng, 1.0, self.state.globals.alpha);
            self.state.sticks.push(v);
            w.push(v * tail);
            tail *= 1.0 - v;
            self.state.clusters.push(ClusterParams::sample_prior(
                self.prior,
                &self.pert,
                &self.data.modality_counts,
                self.data.n_continuous,
                &mut self.rng,
            ));
        }
        Ok(())
    }

    fn update_allocations(&mut self) -> Result<()> {
        let labels = allocate(
            self.data,
            &self.state,
            &self.base,
            self.temperature,
            self.config.allocation,
            &mut self.rng,
        )?;
        self.state.labels = labels;
        Ok(())
    }

    fn cluster_stats(&self) -> Vec<ClusterStats> {
        let k = self.state.n_represented();
        let template = ClusterStats {
            normal: vec![NormalStats::default(); self.data.n_continuous],
            cats: self.data.modality_counts.iter().map(|&m| vec![0; m]).collect(),
            ..ClusterStats::default()
        };
        let mut stats = vec![template; k + 1];
        for (i, &c) in self.state.labels.iter().enumerate() {
            let s = &mut stats[if c == RESERVED { k } else { c }];
            s.n += 1;
            s.events += self.data.event[i] as usize;
            s.hazard += self.base.pow_diff[i];
            for (ns, &lx) in s.normal.iter_mut().zip(self.data.log_x_row(i)) {
                if !lx.is_nan() {
                    ns.push(lx);
                }
            }
            for (counts, &m) in s.cats.iter_mut().zip(self.data.cat_row(i)) {
                if m != crate::likelihood::CAT_ABSENT {
                    counts[m as usize] += 1;
                }
            }
        }
        stats
    }

    fn update_cluster_params(&mut self) {
        let inv_t = 1.0 / self.temperature;
        let mut stats = self.cluster_stats();
        let reserved_stats = stats.pop().expect("reserved slot");
        for (c, s) in stats.iter().enumerate() {
            if s.n == 0 {
                self.state.clusters[c] = ClusterParams::sample_prior(
                    self.prior,
                    &self.pert,
                    &self.data.modality_counts,
                    self.data.n_continuous,
                    &mut self.rng,
                );
                continue;
            }
            let mut cl = std::mem::take(&mut self.state.clusters[c]);
            update_exposure_params(&mut cl, s, self.prior, inv_t, &mut self.rng);
            let accepted = self.update_beta(&mut cl, c, s, inv_t);
            self.stats.beta.record(accepted);
            self.block.beta[c].record(accepted);
            self.state.clusters[c] = cl;
        }
        if let Some(mut cl) = self.state.reserved.take() {
            update_exposure_params(&mut cl, &reserved_stats, self.prior, inv_t, &mut self.rng);
            self.state.reserved = Some(cl);
        }
    }

    fn update_beta(&mut self, cl: &mut ClusterParams, c: usize, s: &ClusterStats, inv_t: f64) -> bool {
        let beta = cl.beta;
        let prop = beta + self.scales.beta[c] * math::standard_normal(&mut self.rng);
        if !(prop >= self.pert.min() && prop <= self.pert.max()) {
            return false;
        }
        let mut ll = -(prop - beta) * self.base.xi_over_nu * s.hazard;
        if s.events > 0 {
            ll += s.events as f64 * (prop.ln_1p() - beta.ln_1p());
        }
        let ratio = inv_t * ll + self.pert.ln_pdf(prop) - self.pert.ln_pdf(beta);
        let accepted = mh_accept(ratio, &mut self.rng);
        if accepted {
            cl.beta = prop;
        }
        accepted
    }

    fn update_alpha(&mut self) {
        let sum_log1m: f64 = self.state.sticks.iter().map(|&v| (-v).ln_1p()).sum();
        let (alpha, accepted) = alpha_step(
            self.state.globals.alpha,
            self.state.sticks.len(),
            sum_log1m,
            (self.prior.alpha_shape, self.prior.alpha_rate),
            self.scales.alpha,
            &mut self.rng,
        );
        self.state.globals.alpha = alpha;
        self.stats.alpha.record(accepted);
        self.block.alpha.record(accepted);
    }

    /// `1 + beta` of each individual's current cluster.
    fn risk_factors(&self) -> Vec<f64> {
        self.state
            .labels
            .iter()
            .map(|&c| 1.0 + if c == RESERVED { 0.0 } else { self.state.clusters[c].beta })
            .collect()
    }

    fn update_xi_tilde(&mut self, risk: &[f64]) {
        let inv_t = 1.0 / self.temperature;
        let g = self.state.globals;
        let d = self.data.n_events as f64;
        let a = math::pairwise_sum(
            &risk.iter().zip(&self.base.pow_diff).map(|(r, p)| r * p).collect::<Vec<_>>(),
        );
        let (eps, nu) = (g.epsilon, g.nu());
        let (shape, rate) = (self.prior.xi_shape, self.prior.xi_rate);
        let target = |x: f64| {
            inv_t * (d * (eps * x).ln() - eps * x * a / nu) + math::gamma_ln_pdf(x, shape, rate) + x.ln()
        };
        let prop = g.xi_tilde * (self.scales.xi_tilde * math::standard_normal(&mut self.rng)).exp();
        let accepted = prop > 0.0 && prop.is_finite() && mh_accept(target(prop) - target(g.xi_tilde), &mut self.rng);
        if accepted {
            self.state.globals.xi_tilde = prop;
            self.base = SurvivalBase::with_pow_diff(std::mem::take(&mut self.base.pow_diff), &self.state.globals);
        }
        self.stats.xi_tilde.record(accepted);
        self.block.xi_tilde.record(accepted);
    }

    /// Log-scale walk on `nu_prime`, with `xi_tilde` shifted so that the
    /// baseline cumulative hazard at the reference time is unchanged. The
    /// shift is a shear in `(log nu_prime, log xi_tilde)` with unit Jacobian
    /// and is its own reverse, so the proposal stays symmetric there.
    fn update_nu_prime(&mut self, risk: &[f64]) {
        let inv_t = 1.0 / self.temperature;
        let g = self.state.globals;
        let d = self.data.n_events as f64;
        let nu = g.nu();
        let prop_nu_prime = g.nu_prime * (self.scales.nu_prime * math::standard_normal(&mut self.rng)).exp();
        let prop_nu = prop_nu_prime + 1.0;
        let prop_xi_tilde = g.xi_tilde * ((prop_nu / nu).ln() - (prop_nu - nu) * self.ln_t_ref).exp();
        let mut accepted = false;
        if prop_nu_prime > 0.0 && prop_nu_prime.is_finite() && prop_xi_tilde > 0.0 && prop_xi_tilde.is_finite() {
            let pow_diff: Vec<f64> = self
                .data
                .ln_time
                .iter()
                .zip(&self.data.ln_entry)
                .map(|(&lt, &le)| power_difference(lt, le, prop_nu))
                .collect();
            let weighted = |pd: &[f64]| {
                math::pairwise_sum(&risk.iter().zip(pd).map(|(r, p)| r * p).collect::<Vec<_>>())
            };
            let eps = g.epsilon;
            let ll = |xt: f64, v: f64, a: f64| {
                let xi = eps * xt;
                d * xi.ln() + (v - 1.0) * self.sum_ln_event_time - xi / v * a
            };
            let p = self.prior;
            let ratio = inv_t * (ll(prop_xi_tilde, prop_nu, weighted(&pow_diff)) - ll(g.xi_tilde, nu, weighted(&self.base.pow_diff)))
                + math::gamma_ln_pdf(prop_nu_prime, p.nu_shape, p.nu_rate)
                - math::gamma_ln_pdf(g.nu_prime, p.nu_shape, p.nu_rate)
                + math::gamma_ln_pdf(prop_xi_tilde, p.xi_shape, p.xi_rate)
                - math::gamma_ln_pdf(g.xi_tilde, p.xi_shape, p.xi_rate)
                + (prop_nu_prime / g.nu_prime).ln()
                + (prop_xi_tilde / g.xi_tilde).ln();
            accepted = mh_accept(ratio, &mut self.rng);
            if accepted {
                self.state.globals.nu_prime = prop_nu_prime;
                self.state.globals.xi_tilde = prop_xi_tilde;
                self.base = SurvivalBase::with_pow_diff(pow_diff, &self.state.globals);
            }
        }
        self.stats.nu_prime.record(accepted);
        self.block.nu_prime.record(accepted);
    }

    fn refresh_loglik(&mut self) {
        let kernels: Vec<ClusterKernel> = self.state.clusters.iter().map(ClusterKernel::new).collect();
        let reserved = self.state.reserved.as_ref().map(ClusterKernel::new);
        let kernel = |c: usize| if c == RESERVED { reserved.as_ref().expect("reserved cluster") } else { &kernels[c] };
        let (data, base, labels) = (self.data, &self.base, &self.state.labels);
        let values: Vec<f64> = match self.config.allocation {
            AllocationMode::Parallel => labels
                .par_iter()
                .enumerate()
                .map(|(i, &c)| kernel(c).log_lik(data, base, i))
                .collect(),
            AllocationMode::Sequential => labels
                .iter()
                .enumerate()
                .map(|(i, &c)| kernel(c).log_lik(data, base, i))
                .collect(),
        };
        self.loglik.refresh(values);
    }

    fn adapt(&mut self) {
        let sched = &self.config.adaptation;
        if self.iteration >= sched.adaptive_iterations() || (self.iteration + 1) % sched.block_len != 0 {
            return;
        }
        let target = sched.target_single;
        let tune = |scale: &mut f64, counter: &mut Counter| {
            if let Some(rate) = counter.rate() {
                *scale = adapted_scale(*scale, rate, target);
            }
            *counter = Counter::default();
        };
        tune(&mut self.scales.alpha, &mut self.block.alpha);
        tune(&mut self.scales.xi_tilde, &mut self.block.xi_tilde);
        tune(&mut self.scales.nu_prime, &mut self.block.nu_prime);
        for (s, c) in self.scales.beta.iter_mut().zip(self.block.beta.iter_mut()) {
            tune(s, c);
        }
    }

    /// Snapshot of the current state with empty clusters dropped.
    pub fn draw(&self) -> Draw {
        let counts = self.state.counts();
        let mut map = vec![usize::MAX; counts.len()];
        let mut clusters = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            if n > 0 {
                map[c] = clusters.len();
                clusters.push(self.state.clusters[c].clone());
            }
        }
        let has_reserved = self.state.labels.iter().any(|&c| c == RESERVED);
        let reserved_label = has_reserved.then(|| {
            clusters.push(self.state.reserved.clone().expect("reserved cluster"));
            clusters.len() - 1
        });
        let partition = self
            .state
            .labels
            .iter()
            .map(|&c| if c == RESERVED { reserved_label.unwrap() } else { map[c] })
            .collect();
        let g = self.state.globals;
        Draw {
            iter: self.iteration.saturating_sub(1),
            partition,
            alpha: g.alpha,
            xi: g.xi(),
            nu: g.nu(),
            clusters,
            loglik: self.loglik.total(),
            reserved_label,
        }
    }

    pub fn trace_row(&self) -> TraceRow {
        let g = self.state.globals;
        let iter = self.iteration.saturating_sub(1);
        TraceRow {
            iter,
            phase: phase_of(self.config, iter),
            loglik: self.loglik.total(),
            alpha: g.alpha,
            xi: g.xi(),
            nu: g.nu(),
            n_nonempty: self.state.n_nonempty(),
            n_represented: self.state.n_represented(),
        }
    }

    pub fn last_allocation_micros(&self) -> u64 {
        self.last_allocation_micros
    }
}

fn update_exposure_params<R: Rng + ?Sized>(
    cl: &mut ClusterParams,
    s: &ClusterStats,
    prior: &PriorConfig,
    inv_t: f64,
    rng: &mut R,
) {
    for (k, ns) in s.normal.iter().enumerate() {
        let tau = 1.0 / (cl.sigma[k] * cl.sigma[k]);
        let mu = sample_mean(ns, tau, prior.mu_prior(k), inv_t, rng);
        let tau = sample_precision(ns, mu, prior.sigma_shape, prior.sigma_rate, inv_t, rng);
        cl.mu[k] = mu;
        cl.sigma[k] = precision_to_sigma(tau);
    }
    for (j, counts) in s.cats.iter().enumerate() {
        cl.p[j] = sample_probabilities(counts, prior.dirichlet_conc, inv_t, rng);
    }
}

/// Draws every exposed individual's allocation given weights, slices and
/// cluster parameters: `P(C_i = c) ~ 1{phi_c > u_i} exp(l_ic / T)`.
///
/// In parallel mode each individual consumes one uniform from its own
/// stream `i` under a key drawn from `rng`, so the result does not depend
/// on the number of worker threads.
fn allocate<R: Rng + ?Sized>(
    data: &PreparedData,
    state: &ChainState,
    base: &SurvivalBase,
    temperature: f64,
    mode: AllocationMode,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let kernels: Vec<ClusterKernel> = state.clusters.iter().map(ClusterKernel::new).collect();
    let (weights, _) = stick_weights(&state.sticks);
    let inv_t = 1.0 / temperature;
    let draw = |i: usize, uniform: f64, buf: &mut Vec<f64>| -> Result<usize> {
        let u = state.slices[i];
        buf.clear();
        let mut max = f64::NEG_INFINITY;
        for (c, k) in kernels.iter().enumerate() {
            let v = if weights[c] > u {
                inv_t * k.log_lik(data, base, i)
            } else {
                f64::NEG_INFINITY
            };
            max = max.max(v);
            buf.push(v);
        }
        if max == f64::NEG_INFINITY {
            return Err(Error::EmptySliceSet { index: i });
        }
        let mut total = 0.0;
        for v in buf.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        let mut target = uniform * total;
        let mut last = 0;
        for (c, &v) in buf.iter().enumerate() {
            if v > 0.0 {
                last = c;
                if target < v {
                    return Ok(c);
                }
                target -= v;
            }
        }
        Ok(last)
    };
    match mode {
        AllocationMode::Sequential => {
            let mut buf = Vec::with_capacity(kernels.len());
            (0..data.n)
                .map(|i| {
                    if !data.exposed[i] {
                        return Ok(RESERVED);
                    }
                    let x = open_unit(rng);
                    draw(i, x, &mut buf)
                })
                .collect()
        }
        AllocationMode::Parallel => {
            let key: [u8; 32] = rng.random();
            (0..data.n)
                .into_par_iter()
                .map_init(
                    || Vec::with_capacity(kernels.len()),
                    |buf, i| {
                        if !data.exposed[i] {
                            return Ok(RESERVED);
                        }
                        let mut stream = ChaCha8Rng::from_seed(key);
                        stream.set_stream(i as u64);
                        let x = open_unit(&mut stream);
                        draw(i, x, buf)
                    },
                )
                .collect()
        }
    }
}

/// One allocation step on a given state, for testing and benchmarking.
pub fn sample_allocations<R: Rng + ?Sized>(
    data: &PreparedData,
    state: &ChainState,
    temperature: f64,
    mode: AllocationMode,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let base = SurvivalBase::new(data, &state.globals);
    allocate(data, state, &base, temperature, mode, rng)
}

/// Collects draws, trace rows and timings while a chain runs.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    draws: Vec<Draw>,
    trace: Vec<TraceRow>,
    sweep_micros: Vec<u64>,
    allocation_micros: Vec<u64>,
}

impl Recorder {
    /// Records the chain right after a completed step.
    pub fn record(&mut self, chain: &Chain<'_>, sweep_micros: u64) {
        let row = chain.trace_row();
        if row.phase == Phase::Sampling {
            let config = chain.config;
            let s = row.iter - config.adaptation.adaptive_iterations() - config.burn_in;
            if s % config.thin == 0 {
                self.draws.push(chain.draw());
            }
        }
        self.trace.push(row);
        self.sweep_micros.push(sweep_micros);
        self.allocation_micros.push(chain.last_allocation_micros());
    }

    pub fn finish(self, chain: &Chain<'_>) -> PosteriorSample {
        PosteriorSample {
            temperature: chain.temperature,
            n_individuals: chain.data.n,
            draws: self.draws,
            trace: self.trace,
            stats: chain.stats.clone(),
            final_scales: chain.scales.clone(),
            sweep_micros: self.sweep_micros,
            allocation_micros: self.allocation_micros,
        }
    }
}

/// Runs a single chain through the adaptive, burn-in and sampling phases.
pub fn run_chain(
    data: &Dataset,
    prior: &PriorConfig,
    config: &SamplerConfig,
    temperature: f64,
    seed: u64,
) -> Result<PosteriorSample> {
    let prepared = PreparedData::new(data);
    let mut chain = Chain::new(&prepared, prior, config, temperature, chain_rng(seed, 0))?;
    let mut recorder = Recorder::default();
    for _ in 0..config.total_iterations() {
        let start = Instant::now();
        chain.step()?;
        recorder.record(&chain, start.elapsed().as_micros() as u64);
    }
    Ok(recorder.finish(&chain))
}
