//! Label-switching moves. Each one is a deterministic involution on the
//! labelled state (or a symmetric random choice of one), so the acceptance
//! ratio is the posterior ratio times the Jacobian of the map. The data
//! likelihood and cluster-parameter priors are invariant under relabelling,
//! which leaves only stick-breaking terms, and tempering plays no part.

use rand::Rng;

use crate::model::{stick_weights, ChainState, RESERVED};
use crate::sampler::conditionals::mh_accept;
use crate::sampler::output::MoveStats;

/// Log acceptance ratio of exchanging the members and parameters of
/// clusters `a` and `b` while their weights stay in place:
/// `(n_b - n_a) log(phi_a / phi_b)`.
pub fn swap_contents_log_ratio(phi_a: f64, phi_b: f64, n_a: usize, n_b: usize) -> f64 {
    if n_a == n_b {
        return 0.0;
    }
    (n_b as f64 - n_a as f64) * (phi_a.ln() - phi_b.ln())
}

/// Log acceptance ratio of exchanging adjacent labels `c`, `c+1` together
/// with their stick variables: `n_c log(1 - V_{c+1}) - n_{c+1} log(1 - V_c)`.
pub fn swap_adjacent_log_ratio(v_c: f64, v_next: f64, n_c: usize, n_next: usize) -> f64 {
    n_c as f64 * (-v_next).ln_1p() - n_next as f64 * (-v_c).ln_1p()
}

/// Stick variables that exchange the weights of clusters `c` and `c+1`
/// while leaving every other weight unchanged.
pub fn swapped_weight_sticks(v_c: f64, v_next: f64) -> (f64, f64) {
    let new_c = v_next * (1.0 - v_c);
    let new_next = (v_c / (1.0 - new_c)).min(1.0 - f64::EPSILON / 2.0);
    (new_c, new_next)
}

/// Exchanges members and parameters of two represented clusters.
pub(crate) fn relabel(state: &mut ChainState, a: usize, b: usize) {
    state.clusters.swap(a, b);
    for c in state.labels.iter_mut() {
        if *c == a {
            *c = b;
        } else if *c == b {
            *c = a;
        }
    }
}

/// Applies the contents swap, a sweep of adjacent swaps and the weight
/// swap, in that order. Skipped with fewer than two represented clusters.
pub fn label_switching_moves<R: Rng + ?Sized>(
    state: &mut ChainState,
    rng: &mut R,
    stats: &mut MoveStats,
) {
    let k = state.n_represented();
    if k < 2 {
        return;
    }
    let mut counts = state.counts();

    // Contents swap between two non-empty clusters.
    let nonempty: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    if nonempty.len() >= 2 {
        let i = rng.random_range(0..nonempty.len());
        let mut j = rng.random_range(0..nonempty.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (nonempty[i], nonempty[j]);
        let (w, _) = stick_weights(&state.sticks);
        let ratio = swap_contents_log_ratio(w[a], w[b], counts[a], counts[b]);
        let accepted = mh_accept(ratio, rng);
        stats.swap_contents.record(accepted);
        if accepted {
            relabel(state, a, b);
            counts.swap(a, b);
        }
    }

    // Adjacent label swaps carrying the sticks along, one per pair in label order.
    for c in 0..k - 1 {
        let ratio = swap_adjacent_log_ratio(state.sticks[c], state.sticks[c + 1], counts[c], counts[c + 1]);
        let accepted = mh_accept(ratio, rng);
        stats.swap_adjacent.record(accepted);
        if accepted {
            relabel(state, c, c + 1);
            state.sticks.swap(c, c + 1);
            counts.swap(c, c + 1);
        }
    }

    // Adjacent label swap that also exchanges the two weights.
    let c = rng.random_range(0..k - 1);
    let (v_c, v_next) = (state.sticks[c], state.sticks[c + 1]);
    let (new_c, new_next) = swapped_weight_sticks(v_c, v_next);
    let ratio = (-v_c).ln_1p() - (-new_c).ln_1p();
    let accepted = mh_accept(ratio, rng);
    stats.swap_weights.record(accepted);
    if accepted {
        relabel(state, c, c + 1);
        state.sticks[c] = new_c;
        state.sticks[c + 1] = new_next;
    }
    debug_assert!(state.labels.iter().all(|&c| c == RESERVED || c < k));
}
