mod common;

use bprm::postprocess::{
    expected_vi, mean_similarity, select_partition_binder, select_partition_pam,
    select_partition_vi, vi_distance, Partition,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::partitions::{
    all_partitions, binder_mismatches, noisy_blocks, pam_repeats_identical, random_sample, vi_brute_force_gap,
};

fn partition_strategy(n: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0usize..5, n).prop_map(|l| Partition::new(&l))
}

fn triple() -> impl Strategy<Value = (Partition, Partition, Partition)> {
    (1usize..=12).prop_flat_map(|n| (partition_strategy(n), partition_strategy(n), partition_strategy(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn vi_is_a_metric((a, b, c) in triple()) {
        let ab = vi_distance(&a, &b).unwrap();
        let bc = vi_distance(&b, &c).unwrap();
        let ac = vi_distance(&a, &c).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, vi_distance(&b, &a).unwrap());
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(ab <= (a.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn similarity_is_permutation_equivariant(
        labels in prop::collection::vec(prop::collection::vec(0usize..3, 6), 1..8),
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let samples: Vec<Partition> = labels.iter().map(|l| Partition::new(l)).collect();
        let permuted: Vec<Partition> = labels
            .iter()
            .map(|l| Partition::new(&perm.iter().map(|&i| l[i]).collect::<Vec<_>>()))
            .collect();
        let s = mean_similarity(&samples).unwrap();
        let sp = mean_similarity(&permuted).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                prop_assert_eq!(sp.get(i, j), s.get(perm[i], perm[j]));
            }
        }
    }
}

#[test]
fn vi_selection_matches_exhaustive_search_on_three_items() {
    let gap = vi_brute_force_gap(200, 1);
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn binder_selection_matches_brute_force() {
    assert_eq!(binder_mismatches(2), 0);
}

#[test]
fn vi_choice_is_no_worse_than_binder_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let all = all_partitions(6);
    for _ in 0..30 {
        let samples = random_sample(&mut rng, &all[..40], 25);
        let (_, binder) = select_partition_binder(&samples).unwrap();
        let vi = select_partition_vi(&samples, &[], 1).unwrap();
        assert!(vi.expected_vi <= expected_vi(&binder, &samples, 1).unwrap() + 1e-12);
    }
}

#[test]
fn pam_is_bitwise_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = mean_similarity(&noisy_blocks(&mut rng, 60, 3, 200)).unwrap();
    assert_eq!(select_partition_pam(&s, 8).unwrap().k, 3);
    assert!(pam_repeats_identical(5, 4));
}

#[test]
fn selectors_do_not_depend_on_worker_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = noisy_blocks(&mut rng, 40, 4, 150);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let s = mean_similarity(&samples).unwrap();
            (
                s,
                select_partition_pam(&mean_similarity(&samples).unwrap(), 6).unwrap(),
                select_partition_vi(&samples, &[], 2).unwrap(),
                select_partition_binder(&samples).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn vi_selection_recovers_noisy_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples = noisy_blocks(&mut rng, 40, 4, 150);
    let sel = select_partition_vi(&samples, &[], 1).unwrap();
    let truth = Partition::new(&(0..40).map(|i| i % 4).collect::<Vec<_>>());
    assert_eq!(sel.partition, truth);
}
