use clusterx::expansion::{truncated_log_z, ExpansionConfig};
use clusterx::model::{build_lr_tfi, build_nn_tfi, random_two_body, ProductState};
use clusterx::oracle::{cumulants, DEFAULT_DENSE_CAP};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn assert_matches_cumulants(h: &clusterx::model::Hamiltonian, rho: &ProductState, m: usize) {
    let series = truncated_log_z(h, rho, m, &ExpansionConfig::default()).unwrap();
    let kappa = cumulants(h, rho, m, DEFAULT_DENSE_CAP).unwrap();
    for n in 1..=m {
        let expected = if n % 2 == 0 { 1.0 } else { -1.0 } * kappa[n - 1] / factorial(n);
        let got = series.coefficient(n);
        let tol = if expected.abs() < 1e-12 { 1e-12 } else { 1e-8 * expected.abs() };
        assert!((got.re - expected).abs() <= tol, "n = {n}: {got} vs {expected}");
        assert!(got.im.abs() < 1e-10, "n = {n}: {got}");
    }
}

#[test]
fn long_range_chain_coefficients_are_scaled_cumulants() {
    for n in [4, 6] {
        for alpha in [1.5, 2.5] {
            let h = build_lr_tfi(n, alpha, 1.0, 0.25).unwrap();
            assert_matches_cumulants(&h, &ProductState::maximally_mixed(n, 2), 4);
        }
    }
}

#[test]
fn nearest_neighbour_chain_coefficients_are_scaled_cumulants() {
    let h = build_nn_tfi(6, 1.0, 0.25).unwrap();
    assert_matches_cumulants(&h, &ProductState::maximally_mixed(6, 2), 5);
}

#[test]
fn random_models_under_tilted_states() {
    for seed in 0..3 {
        let h = random_two_body(5, 6, 3, 1.0, seed).unwrap();
        let rho = ProductState::uniform_ket(5, &[clusterx::linalg::C64::new(0.8, 0.0), clusterx::linalg::C64::new(0.36, 0.48)]).unwrap();
        assert_matches_cumulants(&h, &rho, 5);
    }
}

#[test]
fn chain_of_eight_to_fifth_order() {
    let h = build_lr_tfi(8, 1.5, 1.0, 0.25).unwrap();
    let t = std::time::Instant::now();
    assert_matches_cumulants(&h, &ProductState::maximally_mixed(8, 2), 5);
    eprintln!("N=8 m=5: {:?}", t.elapsed());
}
