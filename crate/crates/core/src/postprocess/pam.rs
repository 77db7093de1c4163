use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::{Partition, SimilarityMatrix};
use crate::error::{Error, Result};

/// k-medoids solution on a flat row-major dissimilarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Medoids {
    pub medoids: Vec<usize>,
    pub labels: Vec<usize>,
    pub cost: f64,
}

fn assign(d: &[f64], n: usize, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut labels = vec![0; n];
    let mut cost = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let row = &d[i * n..(i + 1) * n];
        let mut best = 0;
        for (m, &med) in medoids.iter().enumerate().skip(1) {
            if row[med] < row[medoids[best]] {
                best = m;
            }
        }
        *label = best;
        cost += row[medoids[best]];
    }
    (labels, cost)
}

/// Partitioning around medoids: greedy BUILD followed by best-improvement
/// SWAP until no swap lowers the total dissimilarity. Ties resolve to the
/// lowest index, so the result is a pure function of the input.
pub fn pam(d: &[f64], n: usize, k: usize) -> Result<Medoids> {
    if d.len() != n * n {
        return Err(Error::LengthMismatch { left: d.len(), right: n * n });
    }
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
    }
    // nearest[i]: dissimilarity from i to its closest medoid so far.
    let mut nearest = vec![f64::INFINITY; n];
    let mut medoids = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];
    for _ in 0..k {
        let mut best = (f64::INFINITY, usize::MAX);
        for h in (0..n).filter(|&h| !is_medoid[h]) {
            let row = &d[h * n..(h + 1) * n];
            let cost: f64 = (0..n).map(|i| nearest[i].min(row[i])).sum();
            if cost < best.0 {
                best = (cost, h);
            }
        }
        let h = best.1;
        medoids.push(h);
        is_medoid[h] = true;
        for i in 0..n {
            nearest[i] = nearest[i].min(d[h * n + i]);
        }
    }

    let (_, mut cost) = assign(d, n, &medoids);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for m in 0..k {
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                let mut trial = medoids.clone();
                trial[m] = h;
                let (_, c) = assign(d, n, &trial);
                if c < cost && best.is_none_or(|(bc, _, _)| c < bc) {
                    best = Some((c, m, h));
                }
            }
        }
        match best {
            // Relative guard against cycling on rounding noise.
            Some((c, m, h)) if c < cost - 1e-12 * cost.abs().max(1.0) => {
                is_medoid[medoids[m]] = false;
                is_medoid[h] = true;
                medoids[m] = h;
                cost = c;
            }
            _ => break,
        }
    }
    let (labels, cost) = assign(d, n, &medoids);
    Ok(Medoids { medoids, labels, cost })
}

/// Mean silhouette width of a labelling; members of singleton clusters
/// score 0.
pub fn mean_silhouette(d: &[f64], n: usize, labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in labels {
        sizes[c] += 1;
    }
    let total: f64 = (0..n)
        .map(|i| {
            let own = labels[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += d[i * n + j];
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if !b.is_finite() || denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .sum();
    total / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PamSelection {
    pub partition: Partition,
    pub k: usize,
    /// `(k, mean silhouette)` for every k tried.
    pub silhouettes: Vec<(usize, f64)>,
    /// Set when every dissimilarity is zero; the single cluster is returned.
    pub degenerate: bool,
}

/// Runs PAM on `1 - S` for k = 2..=k_max and keeps the k with the largest
/// mean silhouette, the smallest such k on ties.
pub fn select_partition_pam(s: &SimilarityMatrix, k_max: usize) -> Result<PamSelection> {
    if k_max < 2 {
        return Err(Error::Config(format!("k_max must be at least 2, got {k_max}")));
    }
    let n = s.n();
    let d = s.dissimilarity();
    if n < 2 || d.iter().all(|&v| v == 0.0) {
        return Ok(PamSelection {
            partition: Partition::new(&vec![0; n]),
            k: 1,
            silhouettes: vec![],
            degenerate: true,
        });
    }
    let fits = (2..=k_max.min(n))
        .into_par_iter()
        .map(|k| {
            let fit = pam(&d, n, k)?;
            let sil = mean_silhouette(&d, n, &fit.labels);
            Ok((k, fit, sil))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (u, f) in fits.iter().enumerate() {
        if f.2 > fits[best].2 {
            best = u;
        }
    }
    let (k, fit, _) = &fits[best];
    Ok(PamSelection {
        partition: Partition::new(&fit.labels),
        k: *k,
        silhouettes: fits.iter().map(|(k, _, s)| (*k, *s)).collect(),
        degenerate: false,
    })
}
