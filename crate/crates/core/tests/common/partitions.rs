use bprm::postprocess::{
    expected_vi, mean_similarity, select_partition_binder, select_partition_pam, select_partition_vi,
    vi_distance, Partition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All partitions of `n` items in canonical form.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = vec![];
        for p in &out {
            let k = p.iter().max().map_or(0, |m: &usize| m + 1);
            for c in 0..=k {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        out = next;
    }
    out.iter().map(|l| Partition::new(l)).collect()
}

pub fn random_sample(rng: &mut ChaCha8Rng, pool: &[Partition], len: usize) -> Vec<Partition> {
    (0..len).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect()
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    Partition::new(&(0..n).map(|_| rng.random_range(0..5)).collect::<Vec<_>>())
}

/// Blocks `i % k` with each label replaced by a random one w.p. 0.1.
pub fn noisy_blocks(rng: &mut ChaCha8Rng, n: usize, k: usize, draws: usize) -> Vec<Partition> {
    (0..draws)
        .map(|_| {
            let labels: Vec<usize> = (0..n)
                .map(|i| if rng.random::<f64>() < 0.1 { rng.random_range(0..k) } else { i % k })
                .collect();
            Partition::new(&labels)
        })
        .collect()
}

/// Squared Frobenius distance computed entrywise from the raw sample.
pub fn frobenius(samples: &[Partition], p: &Partition) -> f64 {
    let n = p.len();
    let t = samples.len() as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: f64 = samples.iter().filter(|q| q.labels()[i] == q.labels()[j]).count() as f64 / t;
            let ind = (p.labels()[i] == p.labels()[j]) as u8 as f64;
            total += (s - ind) * (s - ind);
        }
    }
    total
}

/// Number of random triples violating any metric axiom or the log2(n) bound.
pub fn vi_axiom_violations(cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .filter(|_| {
            let n = rng.random_range(1..=12);
            let [a, b, c] = [0; 3].map(|_| random_partition(&mut rng, n));
            let ab = vi_distance(&a, &b).unwrap();
            let bc = vi_distance(&b, &c).unwrap();
            let ac = vi_distance(&a, &c).unwrap();
            let ok = ab >= 0.0
                && ab == vi_distance(&b, &a).unwrap()
                && (ab == 0.0) == (a == b)
                && ac <= ab + bc + 1e-12
                && ab <= (n as f64).log2() + 1e-12;
            !ok
        })
        .count()
}

/// Largest gap between the selected expected VI and the minimum over all
/// five partitions of three items, over random samples.
pub fn vi_brute_force_gap(trials: usize, seed: u64) -> f64 {
    let all = all_partitions(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        // four distinct partitions with random multiplicities
        let mut pool = all.clone();
        pool.remove(rng.random_range(0..5));
        let mut samples = vec![];
        for p in &pool {
            samples.extend(std::iter::repeat_n(p.clone(), rng.random_range(1..20)));
        }
        let brute = all
            .iter()
            .map(|p| expected_vi(p, &samples, 1).unwrap())
            .fold(f64::INFINITY, f64::min);
        let sel = select_partition_vi(&samples, &[], 1).unwrap();
        worst = worst.max((sel.expected_vi - brute).abs());
    }
    worst
}

/// Number of random samples where the Binder choice is not the earliest
/// draw attaining the brute-force minimum.
pub fn binder_mismatches(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for n in [3, 5, 8] {
        let all = all_partitions(n);
        for _ in 0..50 {
            let len = rng.random_range(1..30);
            let samples = random_sample(&mut rng, &all, len);
            let losses: Vec<f64> = samples.iter().map(|p| frobenius(&samples, p)).collect();
            let min = losses.iter().cloned().fold(f64::INFINITY, f64::min);
            let (t, p) = select_partition_binder(&samples).unwrap();
            let ok = samples[t] == p
                && losses[t] <= min + 1e-9
                && losses[..t].iter().all(|&l| l > min + 1e-9);
            bad += !ok as usize;
        }
    }
    bad
}

/// Whether `reps` PAM selections on the same matrix agree bit for bit.
pub fn pam_repeats_identical(reps: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = noisy_blocks(&mut rng, 60, 3, 200);
    let s = mean_similarity(&samples).unwrap();
    let bits = |v: &[(usize, f64)]| v.iter().map(|(k, s)| (*k, s.to_bits())).collect::<Vec<_>>();
    let first = select_partition_pam(&s, 8).unwrap();
    (1..reps).all(|_| {
        let again = select_partition_pam(&s, 8).unwrap();
        again.partition == first.partition
            && again.k == first.k
            && bits(&again.silhouettes) == bits(&first.silhouettes)
    })
}
