use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster labels numbered by order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: &[usize]) -> Self {
        let mut map = HashMap::new();
        let labels = labels
            .iter()
            .map(|&c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Member indices of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (i, &c) in self.labels.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Distinct partitions of a sample, in order of first occurrence, with
/// their multiplicities and the index of their first occurrence.
#[derive(Debug, Clone)]
pub struct UniquePartitions {
    pub partitions: Vec<Partition>,
    pub weights: Vec<usize>,
    pub first_index: Vec<usize>,
    pub total: usize,
}

impl UniquePartitions {
    pub fn from_samples(samples: &[Partition]) -> Result<Self> {
        let n = samples.first().ok_or(Error::EmptySample)?.len();
        let mut index: HashMap<&Partition, usize> = HashMap::new();
        let mut out = Self {
            partitions: vec![],
            weights: vec![],
            first_index: vec![],
            total: samples.len(),
        };
        for (t, p) in samples.iter().enumerate() {
            if p.len() != n {
                return Err(Error::LengthMismatch { left: p.len(), right: n });
            }
            match index.get(p) {
                Some(&u) => out.weights[u] += 1,
                None => {
                    index.insert(p, out.partitions.len());
                    out.partitions.push(p.clone());
                    out.weights.push(1);
                    out.first_index.push(t);
                }
            }
        }
        Ok(out)
    }
}

/// Symmetric `n x n` matrix of co-clustering frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) || v != values[j * n + i] {
                    return Err(Error::Domain(format!("invalid similarity at ({i}, {j})")));
                }
            }
            if values[i * n + i] != 1.0 {
                return Err(Error::Domain(format!("diagonal entry {i} is not 1")));
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// `1 - S` as a flat row-major matrix.
    pub fn dissimilarity(&self) -> Vec<f64> {
        self.values.iter().map(|v| 1.0 - v).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for i in 0..self.n {
            w.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut values = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec?;
            for field in rec.iter() {
                values.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("similarity entry {field:?}: {e}")))?,
                );
            }
            rows += 1;
        }
        Self::from_values(rows, values)
    }
}

/// Entrywise mean of the co-clustering indicator matrices of the sample.
pub fn mean_similarity(samples: &[Partition]) -> Result<SimilarityMatrix> {
    let unique = UniquePartitions::from_samples(samples)?;
    let n = unique.partitions[0].len();
    let total = unique.total as f64;
    // Integer co-occurrence counts make the result independent of summation order.
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut counts = vec![0usize; n];
            for (p, &w) in unique.partitions.iter().zip(&unique.weights) {
                let li = p.labels[i];
                for (c, &lj) in counts.iter_mut().zip(&p.labels) {
                    if lj == li {
                        *c += w;
                    }
                }
            }
            counts.into_iter().map(move |c| c as f64 / total)
        })
        .collect();
    Ok(SimilarityMatrix { n, values })
}

/// Squared Frobenius distance between `S` and the indicator matrix of `p`.
pub fn binder_loss(s: &SimilarityMatrix, p: &Partition) -> f64 {
    // sum_ij (S_ij - I_ij)^2 = sum S^2 - 2 sum_{same} S_ij + sum_c n_c^2
    let mut same = 0.0;
    for members in p.members() {
        for &i in &members {
            let row = s.row(i);
            same += members.iter().map(|&j| row[j]).sum::<f64>();
        }
    }
    let sq: f64 = s.values.iter().map(|v| v * v).sum();
    let sizes: f64 = p.sizes().iter().map(|&c| (c * c) as f64).sum();
    sq - 2.0 * same + sizes
}

/// Sampled partition closest to the mean similarity matrix; ties go to
/// the earliest draw. Returns the draw index and the partition.
pub fn select_partition_binder(samples: &[Partition]) -> Result<(usize, Partition)> {
    let s = mean_similarity(samples)?;
    let unique = UniquePartitions::from_samples(samples)?;
    let losses: Vec<f64> = unique
        .partitions
        .par_iter()
        .map(|p| binder_loss(&s, p))
        .collect();
    // Losses equal up to rounding count as ties and keep the earlier draw.
    let tol = 1e-10 * losses.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let mut best = 0;
    for u in 1..losses.len() {
        if losses[u] < losses[best] - tol {
            best = u;
        }
    }
    Ok((unique.first_index[best], unique.partitions[best].clone()))
}
