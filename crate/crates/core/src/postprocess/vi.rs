use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::{Partition, SimilarityMatrix, UniquePartitions};
use crate::error::{Error, Result};

/// Variation of information in bits, `H(P) + H(Q) - 2 I(P, Q)`.
pub fn vi_distance(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    Ok(vi_unchecked(p, q))
}

fn vi_unchecked(p: &Partition, q: &Partition) -> f64 {
    let xlogx = XLogX::new(p.len());
    Compact::new(p, &xlogx).distance(&Compact::new(q, &xlogx), &xlogx, &mut Scratch::default())
}

/// `m log2 m` for `m = 0..=n`.
struct XLogX(Vec<f64>);

impl XLogX {
    fn new(n: usize) -> Self {
        Self((0..=n).map(|m| if m == 0 { 0.0 } else { m as f64 * (m as f64).log2() }).collect())
    }
}

struct Compact {
    labels: Vec<u32>,
    k: usize,
    margin: f64,
}

impl Compact {
    fn new(p: &Partition, xlogx: &XLogX) -> Self {
        let margin = p.sizes().iter().map(|&s| xlogx.0[s]).sum();
        Self {
            labels: p.labels().iter().map(|&c| c as u32).collect(),
            k: p.n_clusters(),
            margin,
        }
    }

    // n VI = sum_a f(n_a) + sum_b f(n_b) - 2 sum_ab f(n_ab), f(m) = m log2 m
    fn distance(&self, other: &Compact, xlogx: &XLogX, scratch: &mut Scratch) -> f64 {
        let n = self.labels.len();
        if n == 0 {
            return 0.0;
        }
        let kq = other.k;
        scratch.table.clear();
        scratch.table.resize(self.k * kq, 0);
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            scratch.table[a as usize * kq + b as usize] += 1;
        }
        scratch.cells.clear();
        scratch.cells.extend(scratch.table.iter().copied().filter(|&c| c > 1));
        // Summing cells in count order makes the distance exactly symmetric.
        scratch.cells.sort_unstable();
        let joint: f64 = scratch.cells.iter().map(|&c| xlogx.0[c as usize]).sum();
        ((self.margin + other.margin - 2.0 * joint) / n as f64).max(0.0)
    }
}

#[derive(Default)]
struct Scratch {
    table: Vec<u32>,
    cells: Vec<u32>,
}

/// Complete-linkage agglomeration of a dissimilarity matrix by the
/// nearest-neighbour chain. Returns merges `(a, b, height)` sorted by
/// height, where `a` and `b` are members of the two merged groups.
pub fn complete_linkage(d: &[f64], n: usize) -> Result<Vec<(usize, usize, f64)>> {
    if d.len() != n * n {
        return Err(Error::LengthMismatch { left: d.len(), right: n * n });
    }
    let mut dist = d.to_vec();
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    while merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("two groups remain"));
        }
        let a = *chain.last().unwrap();
        let prev = chain.len().checked_sub(2).map(|i| chain[i]);
        let mut best = prev.unwrap_or(usize::MAX);
        let mut best_d = prev.map_or(f64::INFINITY, |p| dist[a * n + p]);
        for j in 0..n {
            if active[j] && j != a && dist[a * n + j] < best_d {
                best = j;
                best_d = dist[a * n + j];
            }
        }
        if Some(best) == prev {
            chain.truncate(chain.len() - 2);
            let (keep, drop) = (a.min(best), a.max(best));
            merges.push((keep, drop, best_d));
            active[drop] = false;
            for k in 0..n {
                if active[k] && k != keep {
                    let v = dist[keep * n + k].max(dist[drop * n + k]);
                    dist[keep * n + k] = v;
                    dist[k * n + keep] = v;
                }
            }
        } else {
            chain.push(best);
        }
    }
    merges.sort_by(|x, y| x.2.total_cmp(&y.2));
    Ok(merges)
}

/// Partitions obtained by cutting the complete-linkage tree of `1 - S`
/// at each distinct merge height, finest first, starting from singletons.
pub fn linkage_cuts(s: &SimilarityMatrix) -> Result<Vec<Partition>> {
    let n = s.n();
    let merges = complete_linkage(&s.dissimilarity(), n)?;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let snapshot = |parent: &mut Vec<usize>| {
        let roots: Vec<usize> = (0..n).map(|i| find(parent, i)).collect();
        Partition::new(&roots)
    };
    let mut cuts = vec![snapshot(&mut parent)];
    for (u, &(a, b, h)) in merges.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
        if merges.get(u + 1).is_none_or(|next| next.2 != h) {
            cuts.push(snapshot(&mut parent));
        }
    }
    Ok(cuts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViSelection {
    pub partition: Partition,
    pub expected_vi: f64,
    pub n_candidates: usize,
}

/// Expected VI of `candidate` against every `stride`-th sample.
pub fn expected_vi(candidate: &Partition, samples: &[Partition], stride: usize) -> Result<f64> {
    let thinned = thin(samples, stride)?;
    let unique = UniquePartitions::from_samples(&thinned)?;
    score(candidate, &unique)
}

fn thin(samples: &[Partition], stride: usize) -> Result<Vec<Partition>> {
    if stride == 0 {
        return Err(Error::Config("thinning stride must be at least 1".into()));
    }
    Ok(samples.iter().step_by(stride).cloned().collect())
}

fn score(candidate: &Partition, unique: &UniquePartitions) -> Result<f64> {
    let xlogx = XLogX::new(candidate.len());
    let reference = compact_all(unique, candidate.len(), &xlogx)?;
    Ok(score_compact(&Compact::new(candidate, &xlogx), &reference, unique, &xlogx))
}

fn compact_all(unique: &UniquePartitions, n: usize, xlogx: &XLogX) -> Result<Vec<Compact>> {
    if unique.partitions[0].len() != n {
        return Err(Error::LengthMismatch { left: n, right: unique.partitions[0].len() });
    }
    Ok(unique.partitions.iter().map(|p| Compact::new(p, xlogx)).collect())
}

fn score_compact(c: &Compact, reference: &[Compact], unique: &UniquePartitions, xlogx: &XLogX) -> f64 {
    let mut scratch = Scratch::default();
    let mut total = 0.0;
    for (p, &w) in reference.iter().zip(&unique.weights) {
        total += w as f64 * c.distance(p, xlogx, &mut scratch);
    }
    total / unique.total as f64
}

/// Minimizes the expected VI over the sampled partitions, the cuts of the
/// complete-linkage tree of `1 - S` and any `extra` candidates. Ties go to
/// the candidate with fewer clusters, then to the earlier one.
pub fn select_partition_vi(
    samples: &[Partition],
    extra: &[Partition],
    stride: usize,
) -> Result<ViSelection> {
    let all = UniquePartitions::from_samples(samples)?;
    let s = super::partition::mean_similarity(samples)?;
    let mut seen = HashSet::new();
    let candidates: Vec<Partition> = all
        .partitions
        .iter()
        .cloned()
        .chain(linkage_cuts(&s)?)
        .chain(extra.iter().cloned())
        .filter(|p| seen.insert(p.clone()))
        .collect();
    let thinned = UniquePartitions::from_samples(&thin(samples, stride)?)?;
    let n = all.partitions[0].len();
    let xlogx = XLogX::new(n);
    let reference = compact_all(&thinned, n, &xlogx)?;
    for c in extra {
        if c.len() != n {
            return Err(Error::LengthMismatch { left: c.len(), right: n });
        }
    }
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|c| score_compact(&Compact::new(c, &xlogx), &reference, &thinned, &xlogx))
        .collect();
    let tol = 1e-12 * scores.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let mut best = 0;
    for u in 1..candidates.len() {
        let better = scores[u] < scores[best] - tol
            || (scores[u] <= scores[best] + tol
                && candidates[u].n_clusters() < candidates[best].n_clusters());
        if better {
            best = u;
        }
    }
    Ok(ViSelection {
        partition: candidates[best].clone(),
        expected_vi: scores[best],
        n_candidates: candidates.len(),
    })
}
