use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClusterParams;
use crate::sampler::config::ProposalScales;

/// Proposal and acceptance counts of one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counter {
    pub proposals: u64,
    pub accepts: u64,
}

impl Counter {
    pub fn record(&mut self, accepted: bool) {
        self.proposals += 1;
        self.accepts += accepted as u64;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.accepts as f64 / self.proposals as f64)
    }

    pub fn merge(&mut self, other: &Counter) {
        self.proposals += other.proposals;
        self.accepts += other.accepts;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveStats {
    pub alpha: Counter,
    pub xi_tilde: Counter,
    pub nu_prime: Counter,
    /// Summed over clusters.
    pub beta: Counter,
    pub swap_contents: Counter,
    pub swap_adjacent: Counter,
    pub swap_weights: Counter,
}

/// One stored iteration of a chain.
///
/// Partitions use 0-based labels; the structural zero-risk cluster, when
/// present, takes the label `clusters.len() - 1` and is flagged by
/// `reserved_label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iter: usize,
    pub partition: Vec<usize>,
    pub alpha: f64,
    pub xi: f64,
    pub nu: f64,
    pub clusters: Vec<ClusterParams>,
    pub loglik: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserved_label: Option<usize>,
}

impl Draw {
    /// Excess risk of individual `i` at this iteration.
    pub fn beta_of(&self, i: usize) -> f64 {
        self.clusters[self.partition[i]].beta
    }

    pub fn n_nonempty(&self) -> usize {
        let mut seen = vec![false; self.clusters.len()];
        for &c in &self.partition {
            seen[c] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Adaptive,
    BurnIn,
    Sampling,
}

/// Scalar summaries recorded at every iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub phase: Phase,
    pub loglik: f64,
    pub alpha: f64,
    pub xi: f64,
    pub nu: f64,
    pub n_nonempty: usize,
    pub n_represented: usize,
}

/// Output of one chain (the cold chain when tempering).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub temperature: f64,
    pub n_individuals: usize,
    pub draws: Vec<Draw>,
    pub trace: Vec<TraceRow>,
    pub stats: MoveStats,
    pub final_scales: ProposalScales,
    /// Wall-clock microseconds per sweep and per allocation step. Not part
    /// of the reproducible output.
    #[serde(default)]
    pub sweep_micros: Vec<u64>,
    #[serde(default)]
    pub allocation_micros: Vec<u64>,
}

impl PosteriorSample {
    /// Partitions of the stored draws.
    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.draws.iter().map(|d| d.partition.clone()).collect()
    }

    /// Trace rows of the sampling phase.
    pub fn sampling_trace(&self) -> impl Iterator<Item = &TraceRow> {
        self.trace.iter().filter(|r| r.phase == Phase::Sampling)
    }
}

/// Writes draws as JSON lines.
pub fn write_draws_jsonl<W: Write>(mut out: W, draws: &[Draw]) -> Result<()> {
    for d in draws {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads draws written by [`write_draws_jsonl`]; blank lines are skipped.
pub fn read_draws_jsonl<R: BufRead>(input: R) -> Result<Vec<Draw>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Draw = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("draw on line {}: {e}", lineno + 1)))?;
        if d.partition.iter().any(|&c| c >= d.clusters.len()) {
            return Err(Error::Parse(format!(
                "draw on line {}: partition label without cluster parameters",
                lineno + 1
            )));
        }
        out.push(d);
    }
    Ok(out)
}
