//! Metropolis-coupled chains at a ladder of temperatures, with state
//! exchanges between a random adjacent pair every `n_pt` iterations.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::PreparedData;
use crate::model::{Dataset, PriorConfig};
use crate::sampler::conditionals::mh_accept;
use crate::sampler::{chain_rng, Chain, PosteriorSample, Recorder, SamplerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub temperatures: Vec<f64>,
    pub n_pt: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Self {
            temperatures: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            n_pt: 1000,
        }
    }
}

impl Ladder {
    pub fn new(temperatures: Vec<f64>, n_pt: usize) -> Result<Self> {
        let ladder = Self { temperatures, n_pt };
        ladder.validate()?;
        Ok(ladder)
    }

    /// A single chain at temperature 1.
    pub fn cold_only() -> Self {
        Self {
            temperatures: vec![1.0],
            n_pt: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.first() != Some(&1.0) {
            return Err(Error::Config("the ladder must start at temperature 1".into()));
        }
        if self.temperatures.windows(2).any(|w| !(w[1] > w[0])) || self.temperatures.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("temperatures must be finite and strictly increasing".into()));
        }
        if self.n_pt == 0 {
            return Err(Error::Config("n_pt must be at least 1".into()));
        }
        Ok(())
    }
}

/// Log acceptance probability of exchanging the states of the chains at
/// `t_l < t_next`: `min(0, (1/t_l - 1/t_next) (loglik_next - loglik_l))`.
/// Prior terms are untempered and cancel.
pub fn swap_log_probability(loglik_l: f64, loglik_next: f64, t_l: f64, t_next: f64) -> Result<f64> {
    if !(t_l < t_next) {
        return Err(Error::Domain(format!(
            "swap needs increasing temperatures, got {t_l} and {t_next}"
        )));
    }
    let diff = loglik_next - loglik_l;
    if diff == 0.0 {
        return Ok(0.0);
    }
    Ok(((1.0 / t_l - 1.0 / t_next) * diff).min(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSwapStats {
    /// Index `l` of the pair `(l, l + 1)`, 0-based.
    pub pair: usize,
    pub attempts: u64,
    pub accepts: u64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperingOutput {
    pub cold: PosteriorSample,
    pub swaps: Vec<PairSwapStats>,
}

impl TemperingOutput {
    /// Accepted over attempted swaps, pooled over all pairs.
    pub fn overall_swap_rate(&self) -> Option<f64> {
        let (a, n) = self
            .swaps
            .iter()
            .fold((0, 0), |(a, n), s| (a + s.accepts, n + s.attempts));
        (n > 0).then(|| a as f64 / n as f64)
    }
}

/// Random stream of the exchange controller, distinct from every chain stream.
pub fn controller_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

fn steps(chain: &mut Chain<'_>, n: usize, mut recorder: Option<&mut Recorder>) -> Result<()> {
    for _ in 0..n {
        let start = Instant::now();
        chain.step()?;
        if let Some(rec) = recorder.as_deref_mut() {
            rec.record(chain, start.elapsed().as_micros() as u64);
        }
    }
    Ok(())
}

/// Runs one chain per temperature; only the cold chain is recorded.
pub fn run_parallel_tempering(
    data: &Dataset,
    prior: &PriorConfig,
    config: &SamplerConfig,
    ladder: &Ladder,
    seed: u64,
) -> Result<TemperingOutput> {
    ladder.validate()?;
    let prepared = PreparedData::new(data);
    let mut chains = ladder
        .temperatures
        .iter()
        .enumerate()
        .map(|(l, &t)| Chain::new(&prepared, prior, config, t, chain_rng(seed, l)))
        .collect::<Result<Vec<_>>>()?;
    let mut controller = controller_rng(seed);
    let n_pairs = chains.len() - 1;
    let mut counts = vec![(0u64, 0u64); n_pairs];
    let mut recorder = Recorder::default();
    let total = config.total_iterations();
    let mut done = 0;
    while done < total {
        let block = (ladder.n_pt - done % ladder.n_pt).min(total - done);
        let (cold, hot) = chains.split_first_mut().expect("ladder is non-empty");
        let (a, b) = rayon::join(
            || steps(cold, block, Some(&mut recorder)),
            || hot.par_iter_mut().try_for_each(|c| steps(c, block, None)),
        );
        a?;
        b?;
        done += block;
        if n_pairs > 0 && done % ladder.n_pt == 0 && done < total {
            let l = controller.random_range(0..n_pairs);
            let (left, right) = chains.split_at_mut(l + 1);
            let (lo, hi) = (&mut left[l], &mut right[0]);
            let log_p = swap_log_probability(lo.loglik(), hi.loglik(), lo.temperature(), hi.temperature())?;
            let accepted = mh_accept(log_p, &mut controller);
            counts[l].0 += 1;
            counts[l].1 += accepted as u64;
            if accepted {
                lo.swap_states(hi);
            }
        }
    }
    let cold = recorder.finish(&chains[0]);
    let swaps = counts
        .iter()
        .enumerate()
        .map(|(pair, &(attempts, accepts))| PairSwapStats {
            pair,
            attempts,
            accepts,
            rate: (attempts > 0).then(|| accepts as f64 / attempts as f64),
        })
        .collect();
    Ok(TemperingOutput { cold, swaps })
}
