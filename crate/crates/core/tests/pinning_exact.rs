//! Exact expectations of pinning steps by branch enumeration.

use hotgibbs::choice::Replay;
use hotgibbs::monomial::Horizon;
use hotgibbs::oracle::{self, Dense};
use hotgibbs::pinning::{pin_step, PinState};
use hotgibbs::stabilizer::sample_state;
use hotgibbs::{models, CriticalMode, Hamiltonian};
use num_complex::Complex64;

/// `E[σ]` after the first pinning step equals `T† T` with
/// `T = T_{t_max, β/2}(H, H_Q)` and `Q` the closed neighbourhood of the first term.
fn check_first_step(h: &Hamiltonian, beta: f64, t_max: usize) {
    let root = PinState::new(h, beta, Horizon::Finite(t_max));
    let (a_star, _) = root.next_term(h).unwrap();
    let mut q: Vec<usize> = std::iter::once(a_star).chain(h.neighbors(a_star).iter().copied()).collect();
    q.sort_unstable();
    let branches = Replay::enumerate(200_000, |r| {
        let mut st = root.clone();
        pin_step(h, &mut st, r).unwrap();
        st.config
    })
    .unwrap();
    let dim = 1 << h.n();
    let mut mean = Dense::zeros(dim, dim);
    let mut total = 0.0;
    for (p, config) in &branches {
        mean += config.to_dense().unwrap() * Complex64::new(*p, 0.0);
        total += p;
    }
    assert!((total - 1.0).abs() < 1e-12);
    let t = oracle::truncated_series_dense(h, None, &q, beta / 2.0, t_max).unwrap();
    let expected = t.adjoint() * &t;
    let diff = oracle::max_abs_diff(&mean, &expected);
    assert!(diff < 1e-12, "max difference {diff}");
}

#[test]
fn first_step_mean_two_site_chain() {
    let h = models::chain_tfim(2).unwrap();
    check_first_step(&h, 0.05, 2);
}

#[test]
fn first_step_mean_random_instances() {
    for seed in [3, 8, 21] {
        let h = models::random_klocal(3, 3, 2, -1.0, 1.0, seed).unwrap();
        check_first_step(&h, 0.1, 1);
    }
}

#[test]
fn complete_run_is_exact_when_one_step_pins_everything() {
    // With every term in the first Q, E[σ] → e^{-βH} as the horizon grows.
    let h = models::chain_tfim(2).unwrap();
    let beta = 0.05;
    let t = oracle::truncated_series_dense(&h, None, &[0, 1, 2], beta / 2.0, 40).unwrap();
    let exact = oracle::gibbs_operator(&h, beta).unwrap();
    assert!(oracle::max_abs_diff(&(t.adjoint() * &t), &exact) < 1e-12);
}

#[test]
fn emitted_states_average_to_normalized_configuration() {
    // Two-step runs: enumerate pinning and emission jointly on a 3-site chain.
    let h = models::chain_tfim(3).unwrap();
    let beta = h.critical_beta(CriticalMode::Sampling);
    let root = PinState::new(&h, beta, Horizon::Finite(1));
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    let mut st = root.clone();
    while !st.is_done() {
        pin_step(&h, &mut st, &mut rng).unwrap();
    }
    let config = st.config;
    let branches = Replay::enumerate(1 << 16, |r| sample_state(&config, r).unwrap()).unwrap();
    let mut acc = Dense::zeros(8, 8);
    for (p, s) in branches {
        acc += s.to_dense().unwrap() * Complex64::new(p, 0.0);
    }
    let target = config.to_dense().unwrap() * Complex64::new(1.0 / config.trace(), 0.0);
    assert!(oracle::max_abs_diff(&acc, &target) < 1e-12);
}
