//! Joint-distribution checks: draws of (theta, y) from the prior and the
//! data model must match a chain alternating the full conditional
//! theta | y with fresh data y | theta. Each check returns named z-scores.

use bprm::model::NormalPrior;
use bprm::sampler::conditionals::{
    alpha_step, sample_mean, sample_precision, sample_probabilities, sample_sticks, NormalStats,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

pub const DRAWS: usize = 10_000;

pub type Scores = Vec<(String, f64)>;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

/// z-score of the difference in means, with batch means for the
/// autocorrelated successive-conditional sequence.
pub fn geweke_z(marginal: &[f64], successive: &[f64]) -> f64 {
    let (m1, v1) = mean_var(marginal);
    let batches = 50;
    let size = successive.len() / batches;
    let means: Vec<f64> = successive.chunks(size).take(batches).map(|c| mean_var(c).0).collect();
    let (m2, vb) = mean_var(&means);
    (m1 - m2) / (v1 / marginal.len() as f64 + vb / batches as f64).sqrt()
}

fn scores(name: &str, marginal: &[Vec<f64>], successive: &[Vec<f64>]) -> Scores {
    marginal
        .iter()
        .zip(successive)
        .enumerate()
        .map(|(g, (a, b))| (format!("{name} g{g}"), geweke_z(a, b)))
        .collect()
}

fn normal_stats(ys: &[f64]) -> NormalStats {
    let mut s = NormalStats::default();
    ys.iter().for_each(|&y| s.push(y));
    s
}

pub fn normal_mean(temperature: f64, seed: u64) -> Scores {
    let prior = NormalPrior { mean: 1.0, sd: 2.0 };
    let (tau, n) = (4.0, 3);
    // y^(1/T) under N(mu, 1/tau) is N(mu, T/tau) up to a constant in mu
    let data_sd = (temperature / tau).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_y = |mu: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| Normal::new(mu, data_sd).unwrap().sample(rng)).collect()
    };
    let prior_dist = Normal::new(prior.mean, prior.sd).unwrap();
    let marginal: Vec<f64> = (0..DRAWS).map(|_| prior_dist.sample(&mut rng)).collect();
    let mut mu = prior_dist.sample(&mut rng);
    let mut y = draw_y(mu, &mut rng);
    let mut successive = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        mu = sample_mean(&normal_stats(&y), tau, prior, 1.0 / temperature, &mut rng);
        y = draw_y(mu, &mut rng);
        successive.push(mu);
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    scores(
        &format!("mean T={temperature}"),
        &[marginal.clone(), sq(&marginal)],
        &[successive.clone(), sq(&successive)],
    )
}

pub fn normal_precision(seed: u64) -> Scores {
    let (shape, rate, mu, n) = (2.0, 3.0, 0.5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rand_distr parameterizes the Gamma by scale
    let prior = Gamma::new(shape, 1.0 / rate).unwrap();
    let draw_y = |tau: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| Normal::new(mu, 1.0 / tau.sqrt()).unwrap().sample(rng)).collect()
    };
    let marginal: Vec<f64> = (0..DRAWS).map(|_| prior.sample(&mut rng)).collect();
    let mut tau = prior.sample(&mut rng);
    let mut y = draw_y(tau, &mut rng);
    let mut successive = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        tau = sample_precision(&normal_stats(&y), mu, shape, rate, 1.0, &mut rng);
        y = draw_y(tau, &mut rng);
        successive.push(tau);
    }
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    scores("precision", &[marginal.clone(), ln(&marginal)], &[successive.clone(), ln(&successive)])
}

fn categorical(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.random();
    for (j, &q) in p.iter().enumerate() {
        if u < q {
            return j;
        }
        u -= q;
    }
    p.len() - 1
}

fn dirichlet(conc: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g: Vec<f64> = conc.iter().map(|&a| Gamma::new(a, 1.0).unwrap().sample(rng)).collect();
    let s: f64 = g.iter().sum();
    g.iter().map(|x| x / s).collect()
}

pub fn categorical_probabilities(seed: u64) -> Scores {
    let (conc, m, n) = (0.5, 3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_counts = |p: &[f64], rng: &mut ChaCha8Rng| {
        let mut c = vec![0usize; m];
        (0..n).for_each(|_| c[categorical(p, rng)] += 1);
        c
    };
    let marginal: Vec<Vec<f64>> = (0..DRAWS).map(|_| dirichlet(&[conc; 3], &mut rng)).collect();
    let mut p = dirichlet(&[conc; 3], &mut rng);
    let mut counts = draw_counts(&p, &mut rng);
    let mut successive = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        p = sample_probabilities(&counts, conc, 1.0, &mut rng);
        counts = draw_counts(&p, &mut rng);
        successive.push(p.clone());
    }
    let g = |v: &[Vec<f64>]| {
        vec![
            v.iter().map(|p| p[0]).collect::<Vec<_>>(),
            v.iter().map(|p| p[2] * p[2]).collect(),
        ]
    };
    scores("dirichlet", &g(&marginal), &g(&successive))
}

pub fn stick_variables(seed: u64) -> Scores {
    let (alpha, k, n) = (1.5, 3, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prior = Beta::new(1.0, alpha).unwrap();
    let draw_sticks = |rng: &mut ChaCha8Rng| (0..k).map(|_| prior.sample(rng)).collect::<Vec<f64>>();
    // allocations under the infinite stick process, lumping everything past
    // the represented sticks into `beyond`
    let draw_counts = |v: &[f64], rng: &mut ChaCha8Rng| {
        let mut counts = vec![0usize; k];
        let mut beyond = 0;
        for _ in 0..n {
            match v.iter().position(|&vc| rng.random::<f64>() < vc) {
                Some(c) => counts[c] += 1,
                None => beyond += 1,
            }
        }
        (counts, beyond)
    };
    let marginal: Vec<Vec<f64>> = (0..DRAWS).map(|_| draw_sticks(&mut rng)).collect();
    let mut v = draw_sticks(&mut rng);
    let mut successive = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        let (counts, beyond) = draw_counts(&v, &mut rng);
        v = sample_sticks(&counts, beyond, alpha, &mut rng);
        successive.push(v.clone());
    }
    let g = |s: &[Vec<f64>]| {
        vec![
            s.iter().map(|v| v[0]).collect::<Vec<_>>(),
            s.iter().map(|v| v[2]).collect(),
            s.iter().map(|v| v[0] * v[1]).collect(),
        ]
    };
    scores("sticks", &g(&marginal), &g(&successive))
}

pub fn concentration(seed: u64) -> Scores {
    let (shape, rate, k) = (2.0, 1.0, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prior = Gamma::new(shape, 1.0 / rate).unwrap();
    let draw_sticks = |alpha: f64, rng: &mut ChaCha8Rng| {
        let b = Beta::new(1.0, alpha).unwrap();
        (0..k).map(|_| b.sample(rng)).collect::<Vec<f64>>()
    };
    let marginal: Vec<f64> = (0..DRAWS).map(|_| prior.sample(&mut rng)).collect();
    let mut alpha = prior.sample(&mut rng);
    let mut v = draw_sticks(alpha, &mut rng);
    let mut successive = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        let sum_log1m: f64 = v.iter().map(|&x| (-x).ln_1p()).sum();
        for _ in 0..5 {
            alpha = alpha_step(alpha, k, sum_log1m, (shape, rate), 0.8, &mut rng).0;
        }
        v = draw_sticks(alpha, &mut rng);
        successive.push(alpha);
    }
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    scores("alpha", &[marginal.clone(), ln(&marginal)], &[successive.clone(), ln(&successive)])
}

/// Every check with the seeds used by the test suite.
pub fn all() -> Scores {
    [
        normal_mean(1.0, 11),
        normal_mean(5.0, 12),
        normal_precision(13),
        categorical_probabilities(14),
        stick_variables(15),
        concentration(16),
    ]
    .concat()
}
