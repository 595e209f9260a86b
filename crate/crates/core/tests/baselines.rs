use tbm_core::baselines::{fit_full_bm, fit_rbm_pcd1, matched_hidden_units, RbmConfig};
use tbm_core::metrics::reconstruction_error_proxy;
use tbm_core::miner::mine_parameter_domain;
use tbm_core::*;

fn two_mode_data() -> TransactionDataset {
    let a = Pattern::from([0, 1, 2]);
    let b = Pattern::from([3, 4, 5]);
    TransactionDataset::from_counts([(a, 60), (b, 40)]).unwrap().with_n_variables(6).unwrap()
}

#[test]
fn rbm_prefers_observed_patterns() {
    let d = two_mode_data();
    let cfg = RbmConfig { learning_rate: 0.05, updates: 3000, chains: 50, seed: 7 };
    let m = fit_rbm_pcd1(&d, 4, &cfg).unwrap();
    let observed: Vec<f64> = d.unique_patterns().map(|x| m.free_energy(x)).collect();
    for unobserved in [Pattern::empty(), Pattern::from([0, 3]), Pattern::from([1, 2, 4, 5])] {
        let f = m.free_energy(&unobserved);
        assert!(observed.iter().all(|&o| o < f), "{observed:?} vs {f}");
    }
}

#[test]
fn rbm_training_reduces_proxy_error() {
    let d = two_mode_data();
    // Mix in a third, rarer pattern so the proxy is not trivially zero.
    let d = TransactionDataset::from_counts(
        d.entries().map(|(x, c)| (x.clone(), c)).chain([(Pattern::from([0, 5]), 10)]),
    )
    .unwrap();
    let short = fit_rbm_pcd1(&d, 3, &RbmConfig { learning_rate: 0.05, updates: 10, chains: 20, seed: 1 }).unwrap();
    let long = fit_rbm_pcd1(&d, 3, &RbmConfig { learning_rate: 0.05, updates: 3000, chains: 20, seed: 1 }).unwrap();
    let e_short = reconstruction_error_proxy(|x| short.free_energy(x), &d);
    let e_long = reconstruction_error_proxy(|x| long.free_energy(x), &d);
    assert!(e_long < e_short, "{e_long} !< {e_short}");
}

#[test]
fn matched_rbm_has_at_least_as_many_parameters() {
    for (b, n) in [(305, 41), (45, 15), (23, 119), (210, 20), (1350, 20)] {
        let h = matched_hidden_units(b, n);
        let count = n + h + n * h;
        assert!(count >= b || h == 1);
        if h > 1 {
            assert!(n + (h - 1) + n * (h - 1) < b);
        }
    }
}

#[test]
fn full_bm_matches_transductive_fit_on_data_space_when_data_covers_everything() {
    // With every pattern of 2^V observed, S is the power set and both
    // learners solve the same problem.
    let n = 3u32;
    let txs: Vec<Pattern> =
        (0u32..8).flat_map(|m| vec![(0..n).filter(|i| m >> i & 1 == 1).collect::<Pattern>(); 1 + m as usize]).collect();
    let d = TransactionDataset::from_transactions(txs).unwrap().with_n_variables(3).unwrap();
    let b = mine_parameter_domain(&d, 0.1, 2).unwrap();
    let cfg = FitConfig { tol: 1e-12, ..FitConfig::default() };
    let (bm, _) = fit_full_bm(&d, &b, &cfg).unwrap();
    let (tbm, _) = fit(&d, &b, &cfg).unwrap();
    assert_eq!(tbm.space().len(), 8);
    for x in tbm.space().outcomes() {
        assert!((bm.log_prob(x) - tbm.log_prob(x).unwrap()).abs() < 1e-9);
    }
}
