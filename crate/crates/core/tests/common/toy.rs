use std::collections::HashMap;

use bprm::likelihood::{individual_log_lik, log_posterior, tempered_log_target, PreparedData};
use bprm::model::{
    stick_weights, validate_dataset, ChainState, ClusterParams, Dataset, GlobalParams, Individual,
    PriorConfig, RESERVED,
};
use bprm::sampler::{sample_allocations, AllocationMode, SamplerConfig};
use bprm::simgen::{generate_scenario_dataset, Scenario, ScenarioSpec};
use bprm::tempering::{run_parallel_tempering, Ladder, TemperingOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn person(id: &str, time: f64, event: bool, x: f64, cat: usize) -> Individual {
    Individual {
        id: id.into(),
        time,
        event,
        entry: 0.0,
        x_cont: vec![Some(x)],
        x_cat: vec![Some(cat)],
        exposed: true,
    }
}

pub fn toy_data() -> Dataset {
    validate_dataset(Dataset {
        individuals: vec![
            person("a", 2.0, true, 1.5, 0),
            person("b", 3.5, false, 4.0, 1),
            person("c", 1.2, true, 0.7, 1),
        ],
        n_continuous: 1,
        n_categorical: 1,
        modality_counts: vec![2],
    })
    .unwrap()
}

pub fn toy_state() -> ChainState {
    let cl = |beta: f64, mu: f64, sigma: f64, p0: f64| ClusterParams {
        beta,
        mu: vec![mu],
        sigma: vec![sigma],
        p: vec![vec![p0, 1.0 - p0]],
    };
    ChainState {
        labels: vec![0, 1, 2],
        sticks: vec![0.45, 0.5, 0.6],
        slices: vec![0.05, 0.1, 0.02],
        clusters: vec![cl(0.5, 0.2, 0.8, 0.7), cl(3.0, 1.0, 0.5, 0.3), cl(-0.4, 0.0, 1.2, 0.5)],
        reserved: None,
        globals: GlobalParams {
            alpha: 1.0,
            xi_tilde: 0.3,
            nu_prime: 0.8,
            epsilon: 1.0,
        },
    }
}

/// Exact allocation distribution from the reference likelihood path.
pub fn exact_allocation(data: &Dataset, state: &ChainState, temperature: f64) -> Vec<Vec<f64>> {
    let (w, _) = stick_weights(&state.sticks);
    data.individuals
        .iter()
        .enumerate()
        .map(|(i, ind)| {
            let un: Vec<f64> = state
                .clusters
                .iter()
                .enumerate()
                .map(|(c, cl)| {
                    if w[c] > state.slices[i] {
                        (individual_log_lik(ind, cl, &state.globals).unwrap() / temperature).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let s: f64 = un.iter().sum();
            un.iter().map(|u| u / s).collect()
        })
        .collect()
}

pub fn cell(labels: &[usize], k: usize) -> usize {
    labels.iter().fold(0, |acc, &c| acc * k + c)
}

pub fn tv(a: &HashMap<usize, f64>, b: &HashMap<usize, f64>) -> f64 {
    let keys: std::collections::HashSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

pub fn empirical(samples: impl Iterator<Item = usize>, n: usize) -> HashMap<usize, f64> {
    let mut h = HashMap::new();
    for s in samples {
        *h.entry(s).or_insert(0.0) += 1.0 / n as f64;
    }
    h
}


pub fn random_state(data: &Dataset, prior: &PriorConfig, rng: &mut ChaCha8Rng) -> ChainState {
    let pert = prior.pert().unwrap();
    let k = rng.random_range(1..6);
    let sticks: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    let clusters = (0..k)
        .map(|_| ClusterParams::sample_prior(prior, &pert, &data.modality_counts, data.n_continuous, rng))
        .collect();
    let mut reserved = ClusterParams::sample_prior(prior, &pert, &data.modality_counts, data.n_continuous, rng);
    reserved.beta = 0.0;
    ChainState {
        labels: data
            .individuals
            .iter()
            .map(|ind| if ind.exposed { rng.random_range(0..k) } else { RESERVED })
            .collect(),
        sticks,
        slices: vec![0.0; data.len()],
        clusters,
        reserved: Some(reserved),
        globals: GlobalParams {
            alpha: rng.random_range(0.1..5.0),
            xi_tilde: rng.random_range(0.1..10.0),
            nu_prime: rng.random_range(0.5..6.0),
            epsilon: prior.epsilon,
        },
    }
}


/// Total variation distances (parallel/sequential, parallel/exact,
/// sequential/exact) between joint allocations of the toy data.
pub fn allocation_tvs(temperature: f64, n: usize, seed: u64) -> (f64, f64, f64) {
    let data = toy_data();
    let prepared = PreparedData::new(&data);
    let state = toy_state();
    let k = state.clusters.len();
    let exact = exact_allocation(&data, &state, temperature);
    let mut exact_cells = HashMap::new();
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                let p = exact[0][a] * exact[1][b] * exact[2][c];
                if p > 0.0 {
                    exact_cells.insert(cell(&[a, b, c], k), p);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = |mode| {
        let draws: Vec<usize> = (0..n)
            .map(|_| cell(&sample_allocations(&prepared, &state, temperature, mode, &mut rng).unwrap(), k))
            .collect();
        empirical(draws.into_iter(), n)
    };
    let par = run(AllocationMode::Parallel);
    let seq = run(AllocationMode::Sequential);
    (tv(&par, &seq), tv(&par, &exact_cells), tv(&seq, &exact_cells))
}

/// Random states where the T = 1 tempered target differs in any bit from
/// the posterior, or the T = 2 target is not finite.
pub fn tempered_identity_failures(states: usize, seed: u64) -> usize {
    let sim = generate_scenario_dataset(&ScenarioSpec::named(Scenario::S3).with_n_per_cluster(20), 8).unwrap();
    let prior = PriorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..states)
        .filter(|_| {
            let state = random_state(&sim.dataset, &prior, &mut rng);
            let a = tempered_log_target(&state, &sim.dataset, &prior, 1.0).unwrap();
            let b = log_posterior(&state, &sim.dataset, &prior).unwrap();
            let hot = tempered_log_target(&state, &sim.dataset, &prior, 2.0).unwrap();
            a.to_bits() != b.to_bits() || !hot.is_finite()
        })
        .count()
}

pub fn small_config(iterations: usize) -> SamplerConfig {
    let mut c = SamplerConfig::default();
    c.adaptation.n_blocks = 2;
    c.adaptation.block_len = 25;
    c.burn_in = 50;
    c.iterations = iterations;
    c
}

/// Runs the same tempered fit inside rayon pools of each size.
pub fn fits_by_worker_count(
    data: &Dataset,
    config: &SamplerConfig,
    ladder: &Ladder,
    seed: u64,
    workers: &[usize],
) -> Vec<TemperingOutput> {
    let prior = PriorConfig::default();
    workers
        .iter()
        .map(|&threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_parallel_tempering(data, &prior, config, ladder, seed).unwrap())
        })
        .collect()
}
