mod common;

use bprm::io::{align_truth, read_dataset_csv, read_truth_csv, write_dataset_csv, write_truth_csv};
use bprm::sampler::Draw;
use bprm::simgen::{
    cluster_count_summary, generate_scenario_dataset, misclassification_rates, relative_bias,
    sample_event_time, Scenario, ScenarioSpec, TruthRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::ks::{event_time_fits, ks_p_value, ks_statistic};

#[test]
fn event_times_follow_the_survivor_function() {
    for (beta, d, p) in event_time_fits() {
        println!("beta {beta}: D = {d:.5}, p = {p:.3}");
        assert!(p > 0.01);
    }
}

#[test]
fn ks_p_value_is_calibrated() {
    // a visibly wrong survivor function is rejected
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ts: Vec<f64> = (0..100_000).map(|_| sample_event_time(0.0, 5.0, 5e-25, &mut rng).unwrap()).collect();
    let d = ks_statistic(ts, |t| 1.0 - (-1.1 * 5e-25 * t.powi(5) / 5.0).exp());
    assert!(ks_p_value(d, 100_000) < 1e-6);
}

#[test]
fn log_covariates_recover_their_parameters() {
    for scenario in Scenario::ALL {
        let spec = ScenarioSpec::named(scenario).with_n_per_cluster(10_000);
        let sim = generate_scenario_dataset(&spec, 6).unwrap();
        for (c, cl) in spec.clusters.iter().enumerate() {
            let rows: Vec<_> = sim
                .dataset
                .individuals
                .iter()
                .zip(&sim.truth)
                .filter(|(_, t)| t.true_cluster == c)
                .map(|(ind, _)| ind)
                .collect();
            for (k, (mu, sigma)) in cl.mu.iter().zip(&cl.sigma).enumerate() {
                let logs: Vec<f64> = rows.iter().filter_map(|ind| ind.x_cont[k]).map(f64::ln).collect();
                match (mu, sigma) {
                    (Some(mu), Some(sigma)) => {
                        assert_eq!(logs.len(), 10_000);
                        let m = logs.iter().sum::<f64>() / logs.len() as f64;
                        assert!(
                            (m - mu).abs() < 3.0 * sigma / 100.0,
                            "{scenario} {} x{}: {m} vs {mu}",
                            cl.name,
                            k + 1
                        );
                    }
                    _ => assert!(logs.is_empty()),
                }
            }
        }
    }
}

#[test]
fn records_are_consistent_with_latent_times() {
    let sim = generate_scenario_dataset(&ScenarioSpec::named(Scenario::S1).with_n_per_cluster(300), 7).unwrap();
    for ((ind, &t), &w) in sim.dataset.individuals.iter().zip(&sim.event_times).zip(&sim.censoring_times) {
        assert_eq!(ind.event, t <= w);
        assert_eq!(ind.time, t.min(w));
        assert_eq!(ind.entry, 0.0);
    }
    let events = sim.dataset.individuals.iter().filter(|i| i.event).count();
    assert!(events > 0 && events < sim.dataset.len());
    for (ind, t) in sim.dataset.individuals.iter().zip(&sim.truth) {
        assert_eq!(ind.id, t.id);
        assert_eq!(ind.exposed, t.true_cluster != 3);
    }
}

#[test]
fn csv_round_trip_keeps_records_and_truth_aligned() {
    let sim = generate_scenario_dataset(&ScenarioSpec::named(Scenario::S4).with_n_per_cluster(20), 8).unwrap();
    let (mut data_buf, mut truth_buf) = (Vec::new(), Vec::new());
    write_dataset_csv(&mut data_buf, &sim.dataset).unwrap();
    write_truth_csv(&mut truth_buf, &sim.truth).unwrap();
    let data = read_dataset_csv(data_buf.as_slice(), None).unwrap();
    let truth = read_truth_csv(truth_buf.as_slice()).unwrap();
    assert_eq!(data, sim.dataset);
    let mut shuffled = truth.clone();
    shuffled.reverse();
    assert_eq!(align_truth(&data, &shuffled).unwrap(), sim.truth);
}

fn truth(betas: &[f64]) -> Vec<TruthRecord> {
    betas
        .iter()
        .enumerate()
        .map(|(i, &b)| TruthRecord {
            id: format!("i{i}"),
            true_cluster: (b > 0.0) as usize,
            true_beta: b,
        })
        .collect()
}

#[test]
fn misclassification_examples() {
    let t = truth(&[0.0, 0.0, 2.5, 2.5]);
    let perfect = misclassification_rates(&[0, 0, 1, 1], &[-0.5, 1.0], &t).unwrap();
    assert_eq!((perfect.false_risk, perfect.missed_risk), (0.0, 0.0));
    let lumped = misclassification_rates(&[0, 0, 0, 0], &[-0.2], &t).unwrap();
    assert_eq!((lumped.false_risk, lumped.missed_risk), (0.0, 0.5));
    // an interval reaching below zero is not at risk
    let touching = misclassification_rates(&[0, 0, 1, 1], &[-0.5, -0.1], &t).unwrap();
    assert_eq!(touching.missed_risk, 0.5);
}

fn constant_draws(beta: f64, n: usize) -> Vec<Draw> {
    (0..5)
        .map(|iter| Draw {
            iter,
            partition: vec![0; n],
            alpha: 1.0,
            xi: 1.0,
            nu: 2.0,
            clusters: vec![bprm::model::ClusterParams { beta, ..Default::default() }],
            loglik: 0.0,
            reserved_label: None,
        })
        .collect()
}

#[test]
fn bias_examples() {
    let rb = relative_bias(&constant_draws(3.0, 2), &truth(&[2.5, 2.5])).unwrap();
    assert!((rb[1].unwrap() - 0.2).abs() < 1e-12);
    let rb = relative_bias(&constant_draws(0.6, 2), &truth(&[0.0, 0.0])).unwrap();
    assert!((rb[0].unwrap() - 0.6).abs() < 1e-12);
    let rb = relative_bias(&constant_draws(2.5, 2), &truth(&[2.5, 2.5])).unwrap();
    assert_eq!(rb[1], Some(0.0));
}

#[test]
fn count_summary_examples() {
    assert_eq!(cluster_count_summary(&[4; 10]).unwrap().to_string(), "4.00 (4-4)");
    let s = cluster_count_summary(&[3, 3, 3, 5]).unwrap();
    assert_eq!((s.mean, s.q1, s.q3), (3.5, 3.0, 3.5));
}
