//! Full conditionals with closed forms, written on sufficient statistics so
//! they can be checked in isolation.
//!
//! `inv_temp` is `1/T`; a tempered likelihood scales every data-derived
//! statistic by it.

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::math;
use crate::model::NormalPrior;

/// Count, sum and sum of squares of the present log exposures of one variable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormalStats {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl NormalStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// `sum (x - m)^2`, clamped at zero against rounding.
    pub fn squared_deviation(&self, m: f64) -> f64 {
        (self.sum_sq - 2.0 * m * self.sum + self.n as f64 * m * m).max(0.0)
    }
}

/// Mean of a normal with known precision `tau` under a normal prior.
pub fn sample_mean<R: Rng + ?Sized>(
    stats: &NormalStats,
    tau: f64,
    prior: NormalPrior,
    inv_temp: f64,
    rng: &mut R,
) -> f64 {
    let prior_prec = 1.0 / (prior.sd * prior.sd);
    let prec = prior_prec + inv_temp * stats.n as f64 * tau;
    let mean = (prior_prec * prior.mean + inv_temp * tau * stats.sum) / prec;
    mean + math::standard_normal(rng) / prec.sqrt()
}

/// Precision of a normal with known mean under a Gamma(shape, rate) prior.
pub fn sample_precision<R: Rng + ?Sized>(
    stats: &NormalStats,
    mean: f64,
    shape: f64,
    rate: f64,
    inv_temp: f64,
    rng: &mut R,
) -> f64 {
    let a = shape + 0.5 * inv_temp * stats.n as f64;
    let b = rate + 0.5 * inv_temp * stats.squared_deviation(mean);
    math::sample_gamma(rng, a, b)
}

/// Categorical probabilities under a symmetric Dirichlet prior.
pub fn sample_probabilities<R: Rng + ?Sized>(
    counts: &[usize],
    conc: f64,
    inv_temp: f64,
    rng: &mut R,
) -> Vec<f64> {
    let post: Vec<f64> = counts.iter().map(|&c| conc + inv_temp * c as f64).collect();
    math::sample_dirichlet(rng, &post)
}

/// Stick variables given the allocation counts of the represented clusters.
///
/// `beyond` counts individuals allocated past the last represented cluster.
/// `V_c ~ Beta(1 + n_c, alpha + sum_{l > c} n_l)`.
pub fn sample_sticks<R: Rng + ?Sized>(
    counts: &[usize],
    beyond: usize,
    alpha: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut after = beyond;
    let mut out = vec![0.0; counts.len()];
    for c in (0..counts.len()).rev() {
        out[c] = math::sample_beta(rng, 1.0 + counts[c] as f64, alpha + after as f64);
        after += counts[c];
    }
    out
}

/// Log-scale random-walk update of the concentration given `k` sticks with
/// `sum_log1m = sum log(1 - V_c)` and a Gamma(shape, rate) prior. Returns
/// the new value and whether the proposal was accepted.
pub fn alpha_step<R: Rng + ?Sized>(
    alpha: f64,
    k: usize,
    sum_log1m: f64,
    (shape, rate): (f64, f64),
    scale: f64,
    rng: &mut R,
) -> (f64, bool) {
    // the target includes the Jacobian `log alpha` of the log-scale walk
    let target = |a: f64| math::gamma_ln_pdf(a, shape, rate) + (k as f64 + 1.0) * a.ln() + (a - 1.0) * sum_log1m;
    let prop = alpha * (scale * math::standard_normal(rng)).exp();
    if prop > 0.0 && prop.is_finite() && mh_accept(target(prop) - target(alpha), rng) {
        (prop, true)
    } else {
        (alpha, false)
    }
}

/// Uniform draw on the open interval `(0, 1)`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Metropolis-Hastings accept step for a log acceptance ratio.
pub fn mh_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    open_unit(rng).ln() < log_ratio
}

/// Maximum-likelihood Weibull-type baseline `(xi, nu)` for the pooled data,
/// used to start the chains somewhere sensible.
///
/// For fixed `nu` the scale has the closed form `xi = D nu / sum(y^nu - e^nu)`,
/// leaving a one-dimensional profile maximized by golden-section search
/// over `log(nu - 1)`.
pub fn pooled_weibull_mle(ln_time: &[f64], ln_entry: &[f64], event: &[bool]) -> Option<(f64, f64)> {
    let d = event.iter().filter(|&&e| e).count() as f64;
    if d == 0.0 {
        return None;
    }
    let sum_ln_event: f64 = ln_time.iter().zip(event).filter(|(_, &e)| e).map(|(l, _)| l).sum();
    // Work with exposures rescaled by the largest time so powers stay finite.
    let shift = ln_time.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let profile = |log_nu_m1: f64| -> (f64, f64) {
        let nu = log_nu_m1.exp() + 1.0;
        let scaled: f64 = ln_time
            .iter()
            .zip(ln_entry)
            .map(|(&lt, &le)| crate::likelihood::power_difference(lt - shift, le - shift, nu))
            .sum();
        // log xi = log(D nu) - log(scaled) - nu * shift
        let ln_xi = (d * nu).ln() - scaled.ln() - nu * shift;
        let ll = d * ln_xi + (nu - 1.0) * sum_ln_event - d;
        (ll, ln_xi)
    };
    let (mut lo, mut hi) = ((1e-3f64).ln(), (60f64).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = profile(x1).0;
    let mut f2 = profile(x2).0;
    for _ in 0..100 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = profile(x2).0;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = profile(x1).0;
        }
    }
    let best = 0.5 * (lo + hi);
    let (_, ln_xi) = profile(best);
    Some((ln_xi.exp(), best.exp() + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirichlet_update_shapes() {
        // counts (3, 1) with concentration 1/2: Dirichlet(3.5, 1.5), mean 0.7.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let m = (0..n)
            .map(|_| sample_probabilities(&[3, 1], 0.5, 1.0, &mut rng)[0])
            .sum::<f64>()
            / n as f64;
        assert!((m - 0.7).abs() < 0.003, "{m}");
    }

    #[test]
    fn mean_update_matches_conjugate_algebra() {
        let mut stats = NormalStats::default();
        for x in [1.0, 2.0, 4.5, 3.5] {
            stats.push(x);
        }
        let tau = 2.0;
        let prior = NormalPrior { mean: 0.0, sd: 10.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_mean(&stats, tau, prior, 1.0, &mut rng)).collect();
        let expected = (4.0 * tau * 2.75) / (4.0 * tau + 0.01);
        let sd = (1.0 / (4.0 * tau + 0.01)).sqrt();
        assert!((math::mean(&draws) - expected).abs() < 4.0 * sd / (n as f64).sqrt());
        assert!((math::variance(&draws).sqrt() / sd - 1.0).abs() < 0.01);
    }

    #[test]
    fn sticks_with_single_cluster() {
        // everyone in cluster 1: V_1 ~ Beta(1 + n, alpha)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, alpha) = (20usize, 1.5);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_sticks(&[n], 0, alpha, &mut rng)[0])
            .collect();
        let a = 1.0 + n as f64;
        let expected = a / (a + alpha);
        assert!((math::mean(&draws) - expected).abs() < 1e-3);
    }

    #[test]
    fn accept_on_equal_posterior() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!((0..1000).all(|_| mh_accept(0.0, &mut rng)));
        assert!(!mh_accept(f64::NEG_INFINITY, &mut rng));
        assert!(!mh_accept(f64::NAN, &mut rng));
    }

    #[test]
    fn two_state_detailed_balance() {
        // Flip proposal between two states of mass 0.3 and 0.7.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let logp = [0.3f64.ln(), 0.7f64.ln()];
        let mut s = 0usize;
        let mut visits = [0usize; 2];
        let steps = 1_000_000;
        for _ in 0..steps {
            let t = 1 - s;
            if mh_accept(logp[t] - logp[s], &mut rng) {
                s = t;
            }
            visits[s] += 1;
        }
        let freq = visits[0] as f64 / steps as f64;
        assert!((freq - 0.3).abs() / 0.3 < 0.005, "{freq}");
    }

    #[test]
    fn weibull_mle_recovers_simulated_baseline() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (xi, nu) = (5e-25f64, 5.0f64);
        let mut lt = Vec::new();
        let mut ev = Vec::new();
        for _ in 0..20_000 {
            let e: f64 = -open_unit(&mut rng).ln();
            let t = (nu * e / xi).powf(1.0 / nu);
            let w = 40_000.0 + 50_000.0 * open_unit(&mut rng);
            lt.push(t.min(w).ln());
            ev.push(t <= w);
        }
        let le = vec![f64::NEG_INFINITY; lt.len()];
        let (xi_hat, nu_hat) = pooled_weibull_mle(&lt, &le, &ev).unwrap();
        assert!((nu_hat - nu).abs() < 0.2, "{nu_hat}");
        assert!((xi_hat.ln() - xi.ln()).abs() < 2.5, "{xi_hat}");
    }
}
