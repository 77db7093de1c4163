use bprm::simgen::sample_event_time;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `(beta, D, p)` for 10^5 generated event times against the analytic
/// survivor function at each excess hazard level.
pub fn event_time_fits() -> Vec<(f64, f64, f64)> {
    let (xi, nu) = (5e-25, 5.0);
    [(1u64, 0.0), (2, 2.5), (3, 5.0)]
        .into_iter()
        .map(|(seed, beta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 100_000;
            let ts: Vec<f64> = (0..n).map(|_| sample_event_time(beta, nu, xi, &mut rng).unwrap()).collect();
            let survivor = |t: f64| (-(1.0 + beta) * xi * t.powf(nu) / nu).exp();
            let d = ks_statistic(ts, |t| 1.0 - survivor(t));
            (beta, d, ks_p_value(d, n))
        })
        .collect()
}
