//! Convergence diagnostics across chains.

use crate::error::{Error, Result};
use crate::math;

/// Potential scale reduction factor over the second halves of the chains,
/// `sqrt(((m-1)/m W + B/m) / W)` with `m` the half length.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::Config("at least two chains are needed".into()));
    }
    let len = chains[0].len();
    if let Some(c) = chains.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch { left: c.len(), right: len });
    }
    if len < 10 {
        return Err(Error::TooShort { len, min: 10 });
    }
    let halves: Vec<&[f64]> = chains.iter().map(|c| &c[len - len / 2..]).collect();
    let m = (len / 2) as f64;
    let means: Vec<f64> = halves.iter().map(|h| math::mean(h)).collect();
    let w = halves.iter().map(|h| math::variance(h)).sum::<f64>() / halves.len() as f64;
    let b = m * math::variance(&means);
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok((((m - 1.0) / m * w + b / m) / w).sqrt())
}
