use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{ClusterParams, Dataset};
use crate::sampler::Draw;

/// Ordinal comparison code of a cluster against the whole population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeatCode {
    #[serde(rename = "--")]
    MuchLower,
    #[serde(rename = "-")]
    Lower,
    #[serde(rename = "+")]
    Higher,
    #[serde(rename = "++")]
    MuchHigher,
}

impl fmt::Display for HeatCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeatCode::MuchLower => "--",
            HeatCode::Lower => "-",
            HeatCode::Higher => "+",
            HeatCode::MuchHigher => "++",
        })
    }
}

/// Code of a value against population quartiles `(q1, median, q3)`.
pub fn quartile_code(value: f64, quartiles: (f64, f64, f64)) -> HeatCode {
    let (q1, q2, q3) = quartiles;
    if value < q1 {
        HeatCode::MuchLower
    } else if value < q2 {
        HeatCode::Lower
    } else if value < q3 {
        HeatCode::Higher
    } else {
        HeatCode::MuchHigher
    }
}

/// Code of a cluster posterior against the mean over clusters: the double
/// codes require the 95% interval to lie strictly on one side of it.
pub fn interval_code(q: &Quantiles, reference: f64) -> HeatCode {
    if q.lower > reference {
        HeatCode::MuchHigher
    } else if q.upper < reference {
        HeatCode::MuchLower
    } else if q.median > reference {
        HeatCode::Higher
    } else {
        HeatCode::Lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub mean: f64,
    /// 2.5% quantile.
    pub lower: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// 97.5% quantile.
    pub upper: f64,
}

impl Quantiles {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut xs = values.to_vec();
        xs.sort_by(f64::total_cmp);
        let q = |p| math::quantile_sorted(&xs, p);
        Some(Self {
            mean: math::mean(&xs),
            lower: q(0.025),
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            upper: q(0.975),
        })
    }

    fn stats(&self) -> [(&'static str, f64); 6] {
        [
            ("mean", self.mean),
            ("lower", self.lower),
            ("q1", self.q1),
            ("median", self.median),
            ("q3", self.q3),
            ("upper", self.upper),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub beta: Quantiles,
    /// Posterior of `exp(mu)` for each continuous exposure.
    pub exp_mu: Vec<Quantiles>,
    /// Posterior of `sigma^2` for each continuous exposure.
    pub sigma_sq: Vec<Quantiles>,
    /// Posterior of each modality probability, by variable then modality.
    pub p: Vec<Vec<Quantiles>>,
    /// Within-cluster empirical mean of each continuous exposure against the
    /// population quartiles; `None` when no member has the variable.
    pub heatmap: Vec<Option<HeatCode>>,
    /// Posterior of `exp(mu)` against the mean over clusters.
    pub posterior_codes: Vec<HeatCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub n_draws: usize,
    pub clusters: Vec<ClusterSummary>,
}

impl ClusterReport {
    /// Lower 95% bound of `beta` by cluster label.
    pub fn beta_lower(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.beta.lower).collect()
    }

    /// One row per cluster, parameter and statistic.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cluster", "size", "parameter", "statistic", "value"])?;
        for c in &self.clusters {
            let mut rows: Vec<(String, &Quantiles)> = vec![("beta".into(), &c.beta)];
            for (k, q) in c.exp_mu.iter().enumerate() {
                rows.push((format!("exp_mu_{}", k + 1), q));
            }
            for (k, q) in c.sigma_sq.iter().enumerate() {
                rows.push((format!("sigma2_{}", k + 1), q));
            }
            for (j, var) in c.p.iter().enumerate() {
                for (m, q) in var.iter().enumerate() {
                    rows.push((format!("p_{}_{}", j + 1, m), q));
                }
            }
            for (name, q) in rows {
                for (stat, v) in q.stats() {
                    w.write_record([
                        c.cluster.to_string(),
                        c.size.to_string(),
                        name.clone(),
                        stat.to_string(),
                        v.to_string(),
                    ])?;
                }
            }
            for (k, code) in c.heatmap.iter().enumerate() {
                if let Some(code) = code {
                    let name = format!("x_{}", k + 1);
                    w.write_record([&c.cluster.to_string(), &c.size.to_string(), &name, "heatmap", &code.to_string()])?;
                }
            }
            for (k, code) in c.posterior_codes.iter().enumerate() {
                let name = format!("exp_mu_{}", k + 1);
                w.write_record([&c.cluster.to_string(), &c.size.to_string(), &name, "code", &code.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Label of each final cluster in draw `d`: the draw cluster sharing the
/// most members with it, the smallest label on ties.
pub fn match_clusters(d: &Draw, members: &[Vec<usize>]) -> Vec<usize> {
    let mut counts = vec![0usize; d.clusters.len()];
    members
        .iter()
        .map(|m| {
            counts.iter_mut().for_each(|c| *c = 0);
            for &i in m {
                counts[d.partition[i]] += 1;
            }
            let mut best = 0;
            for (c, &n) in counts.iter().enumerate() {
                if n > counts[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Posterior summaries of every cluster of `p_star`, pooling at each draw
/// the parameters of the draw cluster matched to it.
pub fn summarize_clusters(draws: &[Draw], p_star: &Partition, data: &Dataset) -> Result<ClusterReport> {
    if draws.is_empty() {
        return Err(Error::EmptySample);
    }
    if p_star.len() != data.len() {
        return Err(Error::LengthMismatch { left: p_star.len(), right: data.len() });
    }
    if let Some(d) = draws.iter().find(|d| d.partition.len() != data.len()) {
        return Err(Error::LengthMismatch { left: d.partition.len(), right: data.len() });
    }
    let members = p_star.members();
    let matched: Vec<Vec<usize>> = draws.par_iter().map(|d| match_clusters(d, &members)).collect();
    let k_cont = data.n_continuous;

    let population: Vec<Option<(f64, f64, f64)>> = (0..k_cont)
        .map(|k| {
            let mut xs: Vec<f64> = data.individuals.iter().filter_map(|ind| ind.x_cont[k]).collect();
            xs.sort_by(f64::total_cmp);
            (!xs.is_empty()).then(|| {
                let q = |p| math::quantile_sorted(&xs, p);
                (q(0.25), q(0.5), q(0.75))
            })
        })
        .collect();

    let mut clusters = Vec::with_capacity(members.len());
    for (g, m) in members.iter().enumerate() {
        let params: Vec<&ClusterParams> = draws
            .iter()
            .zip(&matched)
            .map(|(d, labels)| &d.clusters[labels[g]])
            .collect();
        let collect = |f: &dyn Fn(&ClusterParams) -> f64| -> Quantiles {
            let xs: Vec<f64> = params.iter().map(|p| f(p)).collect();
            Quantiles::from_values(&xs).expect("draws are non-empty")
        };
        let beta = collect(&|p| p.beta);
        let exp_mu = (0..k_cont).map(|k| collect(&|p| p.mu[k].exp())).collect();
        let sigma_sq = (0..k_cont).map(|k| collect(&|p| p.sigma[k] * p.sigma[k])).collect();
        let p = data
            .modality_counts
            .iter()
            .enumerate()
            .map(|(j, &mj)| (0..mj).map(|v| collect(&|p| p.p[j][v])).collect())
            .collect();
        let heatmap = (0..k_cont)
            .map(|k| {
                let xs: Vec<f64> = m.iter().filter_map(|&i| data.individuals[i].x_cont[k]).collect();
                match (population[k], xs.is_empty()) {
                    (Some(q), false) => Some(quartile_code(math::mean(&xs), q)),
                    _ => None,
                }
            })
            .collect();
        clusters.push(ClusterSummary {
            cluster: g,
            size: m.len(),
            beta,
            exp_mu,
            sigma_sq,
            p,
            heatmap,
            posterior_codes: vec![],
        });
    }
    for k in 0..k_cont {
        let reference =
            clusters.iter().map(|c| c.exp_mu[k].mean).sum::<f64>() / clusters.len() as f64;
        for c in clusters.iter_mut() {
            let code = interval_code(&c.exp_mu[k], reference);
            c.posterior_codes.push(code);
        }
    }
    Ok(ClusterReport { n_draws: draws.len(), clusters })
}
