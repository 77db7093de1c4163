//! Simulation scenarios with four clusters (three exposed, one non-exposed)
//! and the metrics used to score fitted models against the truth.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{Dataset, Individual};
use crate::sampler::conditionals::open_unit;
use crate::sampler::Draw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scenario::S1),
            "S2" => Ok(Scenario::S2),
            "S3" => Ok(Scenario::S3),
            "S4" => Ok(Scenario::S4),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

/// One true cluster. `None` entries are variables the cluster does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub name: String,
    pub beta: f64,
    pub mu: Vec<Option<f64>>,
    pub sigma: Vec<Option<f64>>,
    pub exposed: bool,
}

/// Censoring time distribution `W ~ Uniform(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Censoring {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Censoring {
    /// Chosen so that, with `xi = 5e-25` and `nu = 5`, roughly a third of
    /// records end in an event and the event share grows with `beta`.
    fn default() -> Self {
        Self {
            lower: 40_000.0,
            upper: 90_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub clusters: Vec<ClusterSpec>,
    pub xi: f64,
    pub nu: f64,
    pub n_per_cluster: usize,
    pub censoring: Censoring,
}

fn cluster(name: &str, beta: f64, mu: [f64; 4], sigma: [f64; 4]) -> ClusterSpec {
    ClusterSpec {
        name: name.into(),
        beta,
        mu: mu.iter().map(|&m| Some(m)).collect(),
        sigma: sigma.iter().map(|&s| Some(s)).collect(),
        exposed: true,
    }
}

fn non_exposed(mu4: f64, sigma4: f64) -> ClusterSpec {
    ClusterSpec {
        name: "D".into(),
        beta: 0.0,
        mu: vec![None, None, None, Some(mu4)],
        sigma: vec![None, None, None, Some(sigma4)],
        exposed: false,
    }
}

impl ScenarioSpec {
    /// Parameter values of the named scenario, 500 individuals per cluster.
    pub fn named(scenario: Scenario) -> Self {
        const MU_A: [f64; 4] = [1.41, 0.74, 6.9, 3.31];
        const MU_B: [f64; 4] = [3.09, 1.89, 7.54, 3.27];
        const MU_C: [f64; 4] = [4.18, 2.92, 8.17, 3.33];
        let clusters = match scenario {
            Scenario::S1 => vec![
                cluster("A", 0.0, MU_A, [0.81, 0.57, 0.46, 0.22]),
                cluster("B", 2.5, MU_B, [0.37, 0.40, 0.36, 0.19]),
                cluster("C", 5.0, MU_C, [0.33, 0.38, 0.33, 0.19]),
                non_exposed(3.30, 0.19),
            ],
            Scenario::S2 => vec![
                cluster("A", 0.0, MU_A, [0.24, 0.17, 0.14, 0.07]),
                cluster("B", 2.5, MU_B, [0.11, 0.12, 0.11, 0.06]),
                cluster("C", 5.0, MU_C, [0.10, 0.11, 0.10, 0.06]),
                non_exposed(3.30, 0.06),
            ],
            Scenario::S3 => vec![
                cluster("A", 0.0, MU_A, [1.38, 0.97, 0.78, 0.37]),
                cluster("B", 1.5, MU_B, [0.63, 0.68, 0.61, 0.32]),
                cluster("C", 3.0, MU_C, [0.56, 0.65, 0.56, 0.32]),
                non_exposed(3.30, 0.32),
            ],
            Scenario::S4 => vec![
                cluster("A", 0.0, MU_A, [1.38, 0.97, 0.78, 0.37]),
                cluster("B", 3.0, [4.18, 2.92, 8.17, 3.22], [0.63, 0.68, 0.61, 0.32]),
                cluster("C", 3.0, MU_C, [0.56, 0.65, 0.56, 0.32]),
                non_exposed(3.30, 0.32),
            ],
        };
        Self {
            name: scenario.to_string(),
            clusters,
            xi: 5e-25,
            nu: 5.0,
            n_per_cluster: 500,
            censoring: Censoring::default(),
        }
    }

    pub fn with_n_per_cluster(mut self, n: usize) -> Self {
        self.n_per_cluster = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() || self.n_per_cluster == 0 {
            return Err(Error::Config("scenario needs clusters and individuals".into()));
        }
        let k = self.clusters[0].mu.len();
        for c in &self.clusters {
            if c.mu.len() != k || c.sigma.len() != k {
                return Err(Error::Config(format!("cluster {} has the wrong number of variables", c.name)));
            }
            if !(c.beta > -1.0) {
                return Err(Error::Config(format!("cluster {} has beta <= -1", c.name)));
            }
            for (m, s) in c.mu.iter().zip(&c.sigma) {
                match (m, s) {
                    (Some(_), Some(s)) if *s > 0.0 => {}
                    (None, None) => {}
                    _ => return Err(Error::Config(format!("cluster {} has inconsistent exposures", c.name))),
                }
            }
        }
        let cens = self.censoring;
        if !(cens.lower > 0.0 && cens.upper > cens.lower) {
            return Err(Error::DegenerateRange {
                min: cens.lower,
                max: cens.upper,
            });
        }
        if !(self.xi > 0.0 && self.nu > 1.0) {
            return Err(Error::Config("need xi > 0 and nu > 1".into()));
        }
        Ok(())
    }
}

/// Inverts the cumulative hazard at a unit-exponential draw `e`:
/// `T = (nu e / (xi (1 + beta)))^(1/nu)`.
pub fn event_time_from_exponential(e: f64, beta: f64, nu: f64, xi: f64) -> f64 {
    (nu * e / (xi * (1.0 + beta))).powf(1.0 / nu)
}

pub fn sample_event_time<R: Rng + ?Sized>(beta: f64, nu: f64, xi: f64, rng: &mut R) -> Result<f64> {
    if !(beta > -1.0 && nu > 1.0 && xi > 0.0) {
        return Err(Error::Domain(format!(
            "need beta > -1, nu > 1, xi > 0; got beta {beta}, nu {nu}, xi {xi}"
        )));
    }
    let e = -open_unit(rng).ln();
    Ok(event_time_from_exponential(e, beta, nu, xi))
}

/// Ground truth of one simulated individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: String,
    pub true_cluster: usize,
    pub true_beta: f64,
}

/// Simulated dataset with its ground truth, plus the latent times for checks.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub dataset: Dataset,
    pub truth: Vec<TruthRecord>,
    pub event_times: Vec<f64>,
    pub censoring_times: Vec<f64>,
}

pub fn generate_scenario_dataset(spec: &ScenarioSpec, seed: u64) -> Result<Simulated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.clusters[0].mu.len();
    let total = spec.clusters.len() * spec.n_per_cluster;
    let width = total.to_string().len().max(4);
    let mut individuals = Vec::with_capacity(total);
    let mut truth = Vec::with_capacity(total);
    let mut event_times = Vec::with_capacity(total);
    let mut censoring_times = Vec::with_capacity(total);
    for (c, cl) in spec.clusters.iter().enumerate() {
        for _ in 0..spec.n_per_cluster {
            let id = format!("i{:0width$}", individuals.len() + 1);
            let x_cont = cl
                .mu
                .iter()
                .zip(&cl.sigma)
                .map(|(m, s)| match (m, s) {
                    (Some(m), Some(s)) => Some((m + s * math::standard_normal(&mut rng)).exp()),
                    _ => None,
                })
                .collect();
            let t = sample_event_time(cl.beta, spec.nu, spec.xi, &mut rng)?;
            let w = spec.censoring.lower + (spec.censoring.upper - spec.censoring.lower) * open_unit(&mut rng);
            individuals.push(Individual {
                id: id.clone(),
                time: t.min(w),
                event: t <= w,
                entry: 0.0,
                x_cont,
                x_cat: vec![],
                exposed: cl.exposed,
            });
            truth.push(TruthRecord {
                id,
                true_cluster: c,
                true_beta: cl.beta,
            });
            event_times.push(t);
            censoring_times.push(w);
        }
    }
    let dataset = crate::model::validate_dataset(Dataset {
        individuals,
        n_continuous: k,
        n_categorical: 0,
        modality_counts: vec![],
    })?;
    Ok(Simulated {
        dataset,
        truth,
        event_times,
        censoring_times,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisclassificationRates {
    /// Share of all individuals that are risk-free but sit in an at-risk cluster.
    pub false_risk: f64,
    /// Share of all individuals that are at risk but sit in a cluster not at risk.
    pub missed_risk: f64,
}

/// A cluster is at risk when the lower end of its 95% credible interval
/// for `beta` is strictly positive. `beta_lower[c]` is that bound for label `c`.
pub fn misclassification_rates(
    partition: &[usize],
    beta_lower: &[f64],
    truth: &[TruthRecord],
) -> Result<MisclassificationRates> {
    if partition.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: partition.len(),
            right: truth.len(),
        });
    }
    let (mut false_risk, mut missed) = (0usize, 0usize);
    for (&c, t) in partition.iter().zip(truth) {
        let lower = *beta_lower
            .get(c)
            .ok_or_else(|| Error::Domain(format!("no credible interval for cluster {c}")))?;
        let at_risk = lower > 0.0;
        if t.true_beta > 0.0 {
            missed += !at_risk as usize;
        } else {
            false_risk += at_risk as usize;
        }
    }
    let n = truth.len().max(1) as f64;
    Ok(MisclassificationRates {
        false_risk: false_risk as f64 / n,
        missed_risk: missed as f64 / n,
    })
}

/// Mean bias on `beta` per true cluster, averaged over draws and members:
/// relative to the true value, or plain difference when the truth is 0.
/// Entry `c` is `None` when true cluster `c` has no members.
pub fn relative_bias(draws: &[Draw], truth: &[TruthRecord]) -> Result<Vec<Option<f64>>> {
    if draws.is_empty() {
        return Err(Error::EmptySample);
    }
    let n_true = truth.iter().map(|t| t.true_cluster + 1).max().unwrap_or(0);
    let mut sums = vec![0.0; n_true];
    let mut counts = vec![0usize; n_true];
    for d in draws {
        if d.partition.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: d.partition.len(),
                right: truth.len(),
            });
        }
        for (i, t) in truth.iter().enumerate() {
            let b = d.beta_of(i);
            let rb = if t.true_beta == 0.0 {
                b
            } else {
                (b - t.true_beta) / t.true_beta
            };
            sums[t.true_cluster] += rb;
            counts[t.true_cluster] += 1;
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
}

impl fmt::Display for CountSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ({}-{})", self.mean, self.q1, self.q3)
    }
}

/// Mean and first/third quartiles (linear interpolation) of cluster counts across runs.
pub fn cluster_count_summary(counts: &[usize]) -> Result<CountSummary> {
    if counts.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    xs.sort_by(f64::total_cmp);
    Ok(CountSummary {
        mean: math::mean(&xs),
        q1: math::quantile_sorted(&xs, 0.25),
        q3: math::quantile_sorted(&xs, 0.75),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_points() {
        assert_eq!(event_time_from_exponential(0.0, 0.0, 5.0, 1e-3), 0.0);
        assert!((event_time_from_exponential(1.0, 0.0, 5.0, 5.0) - 1.0).abs() < 1e-15);
        // H(T) = E exactly
        let t = event_time_from_exponential(0.7, 2.5, 5.0, 5e-25);
        let h = 3.5 * 5e-25 * t.powi(5) / 5.0;
        assert!((h - 0.7).abs() < 1e-12);
    }

    #[test]
    fn domain_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_event_time(-1.0, 5.0, 1.0, &mut rng).is_err());
        assert!(sample_event_time(0.0, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn named_values() {
        let s1 = ScenarioSpec::named(Scenario::S1);
        let c = &s1.clusters[2];
        assert_eq!((c.beta, c.mu[0], c.sigma[0]), (5.0, Some(4.18), Some(0.33)));
        let s4 = ScenarioSpec::named(Scenario::S4);
        let (b, c) = (&s4.clusters[1], &s4.clusters[2]);
        assert_eq!((b.mu[3], c.mu[3]), (Some(3.22), Some(3.33)));
        assert_eq!(b.mu[..3], c.mu[..3]);
        assert_ne!(b.sigma, c.sigma);
        for s in Scenario::ALL {
            let spec = ScenarioSpec::named(s);
            let d = &spec.clusters[3];
            assert!(!d.exposed && d.beta == 0.0 && d.mu[..3].iter().all(Option::is_none));
            spec.validate().unwrap();
        }
    }

    #[test]
    fn counts_summary_examples() {
        let s = cluster_count_summary(&[3, 3, 3, 5]).unwrap();
        assert_eq!((s.mean, s.q1, s.q3), (3.5, 3.0, 3.5));
        let s = cluster_count_summary(&[4; 10]).unwrap();
        assert_eq!(s.to_string(), "4.00 (4-4)");
    }

    fn truth(betas: &[f64]) -> Vec<TruthRecord> {
        betas
            .iter()
            .enumerate()
            .map(|(i, &b)| TruthRecord {
                id: i.to_string(),
                true_cluster: (b > 0.0) as usize,
                true_beta: b,
            })
            .collect()
    }

    #[test]
    fn misclassification_examples() {
        let t = truth(&[0.0, 0.0, 2.5, 2.5]);
        let perfect = misclassification_rates(&[0, 0, 1, 1], &[-0.5, 0.8], &t).unwrap();
        assert_eq!((perfect.false_risk, perfect.missed_risk), (0.0, 0.0));
        let lumped = misclassification_rates(&[0, 0, 0, 0], &[-0.2], &t).unwrap();
        assert_eq!((lumped.false_risk, lumped.missed_risk), (0.0, 0.5));
        // interval touching zero does not count as at risk
        let touching = misclassification_rates(&[0, 0, 1, 1], &[-0.5, 0.0], &t).unwrap();
        assert_eq!(touching.missed_risk, 0.5);
        let wrong = misclassification_rates(&[1, 1, 0, 0], &[-0.5, 0.8], &t).unwrap();
        assert_eq!((wrong.false_risk, wrong.missed_risk), (0.5, 0.5));
    }

    fn constant_draws(n: usize, beta: f64) -> Vec<Draw> {
        vec![
            Draw {
                iter: 0,
                partition: vec![0; n],
                alpha: 1.0,
                xi: 1.0,
                nu: 2.0,
                clusters: vec![crate::model::ClusterParams {
                    beta,
                    ..Default::default()
                }],
                loglik: 0.0,
                reserved_label: None,
            };
            3
        ]
    }

    #[test]
    fn bias_examples() {
        let t: Vec<TruthRecord> = (0..4)
            .map(|i| TruthRecord {
                id: i.to_string(),
                true_cluster: 0,
                true_beta: 2.5,
            })
            .collect();
        assert_eq!(relative_bias(&constant_draws(4, 2.5), &t).unwrap(), vec![Some(0.0)]);
        let rb = relative_bias(&constant_draws(4, 3.0), &t).unwrap()[0].unwrap();
        assert!((rb - 0.2).abs() < 1e-12);
        let t0: Vec<TruthRecord> = t.iter().map(|r| TruthRecord { true_beta: 0.0, ..r.clone() }).collect();
        let ab = relative_bias(&constant_draws(4, 0.6), &t0).unwrap()[0].unwrap();
        assert!((ab - 0.6).abs() < 1e-12);
    }
}
