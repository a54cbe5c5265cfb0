use mttdl_core::allocation::{
    average_failure_rate, horizontal_system_mttdl, node_steady_state, node_steady_state_generator,
    node_steady_state_product_form, system_mttdl, vertical_epg_mttdl, vertical_mttdl_from, weibull_rate,
    AllocationScenario, Policy,
};
use mttdl_core::growth::{build_lambda_vector, GrowthSpec};
use mttdl_core::markov::mttdl_linear_solve;
use mttdl_core::numeric::relative_difference as rel;
use mttdl_core::FailureModel;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};

/// Stationary vector of the node chain by a dense solve of `πQ = 0` with
/// one balance equation replaced by normalization.
fn dense_stationary(z: usize, lambda: &[f64], mu: &[f64]) -> Vec<f64> {
    let s = z + 1;
    let mut q = DMatrix::<f64>::zeros(s, s);
    for j in 0..z {
        q[(j, j + 1)] = (z - j) as f64 * lambda[j];
        q[(j + 1, j)] = mu[j];
    }
    for i in 0..s {
        let out: f64 = (0..s).filter(|&k| k != i).map(|k| q[(i, k)]).sum();
        q[(i, i)] = -out;
    }
    let mut a = q.transpose();
    let mut b = DVector::zeros(s);
    for k in 0..s {
        a[(s - 1, k)] = 1.0;
    }
    b[s - 1] = 1.0;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

fn node_rates(max_z: usize) -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1..=max_z).prop_flat_map(|z| {
        (
            Just(z),
            prop::collection::vec((-2.0f64..0.0).prop_map(|e| 10f64.powf(e)), z),
            prop::collection::vec((-1.0f64..1.0).prop_map(|e| 10f64.powf(e)), z),
        )
    })
}

proptest! {
    #[test]
    fn steady_state_forms_agree((z, lambda, mu) in node_rates(8)) {
        let g = node_steady_state_generator(z, &lambda, &mu).unwrap();
        let p = node_steady_state_product_form(z, &lambda, &mu).unwrap();
        let d = dense_stationary(z, &lambda, &mu);
        for j in 0..=z {
            prop_assert!(rel(g.pi[j], p.pi[j]) <= 1e-6);
            prop_assert!(rel(g.pi[j], d[j]) <= 1e-6);
        }
        prop_assert!((p.pi.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!((p.theta.iter().sum::<f64>() + p.theta_f - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn horizontal_decreases_with_more_groups(z in 1usize..500, k in 0.3f64..3.0) {
        prop_assert!(horizontal_system_mttdl(1e9, z + 1, k) < horizontal_system_mttdl(1e9, z, k));
    }

    #[test]
    fn vertical_non_increasing_in_failure_probability(a in 1e-6f64..0.2, b in 1e-6f64..0.2) {
        let model = FailureModel::uniform(20, 4, 1e-5, 0.5).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let x = vertical_mttdl_from(&model, 1e-5, lo).unwrap();
        let y = vertical_mttdl_from(&model, 1e-5, hi).unwrap();
        prop_assert!(y <= x * (1.0 + 1e-12));
    }
}

#[test]
fn large_node_chain_sums_to_one() {
    let g = GrowthSpec::new(4e-6, 5.0, Some(3e-2)).unwrap();
    let lambda = mttdl_core::growth::lambda_sequence(&g, 200);
    let s = node_steady_state(200, &lambda, &vec![4.0; 200]).unwrap();
    assert!((s.pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(s.pi.iter().chain(&s.theta).all(|x| (0.0..=1.0).contains(x)));
}

#[test]
fn table_rows_follow_definitions() {
    let z = 6;
    let lambda = [0.01, 0.02, 0.04, 0.08, 0.16, 0.32];
    let mu = [1.0; 6];
    let s = node_steady_state(z, &lambda, &mu).unwrap();
    for i in 0..z {
        assert!(rel(s.theta[i], (z - i) as f64 * s.pi[i] / z as f64) < 1e-15);
    }
    let fail: f64 = (0..=z).map(|i| i as f64 * s.pi[i] / z as f64).sum();
    assert!(rel(s.theta_f, fail) < 1e-14);
    let avg = average_failure_rate(&s, &lambda).unwrap();
    let want: f64 = (0..z).map(|j| lambda[j] * s.theta[j]).sum();
    assert!(rel(avg, want) < 1e-14);
}

#[test]
fn vanishing_failures_leave_nodes_healthy() {
    let s = node_steady_state(10, &[1e-14; 10], &[1.0; 10]).unwrap();
    assert!(s.pi[0] > 1.0 - 1e-12);
    assert!(s.theta_f < 1e-13);
}

#[test]
fn minimum_of_weibull_lifetimes() {
    let (mean, k, z) = (1000.0, 0.9, 5usize);
    let omega = weibull_rate(mean, k);
    let dist = Weibull::new(1.0 / omega, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 1_000_000;
    let mut total = 0.0;
    for _ in 0..samples {
        let first = (0..z).map(|_| dist.sample(&mut rng)).fold(f64::INFINITY, f64::min);
        total += first;
    }
    let empirical = total / samples as f64;
    let formula = horizontal_system_mttdl(mean, z, k);
    assert!(rel(empirical, formula) < 0.01, "{empirical} vs {formula}");
}

#[test]
fn flat_rates_make_policies_agree() {
    let (m, p, lambda0, mu) = (200usize, 5usize, 4e-6, 4.0);
    let g = GrowthSpec::constant(lambda0).unwrap();
    let model = FailureModel::new(m + p, m, build_lambda_vector(&g, p).unwrap(), vec![mu; p], vec![0.0; p]).unwrap();
    let vert = AllocationScenario::new(m + p, Policy::Vertical, 0.9, model.clone(), g).unwrap();
    let hor = AllocationScenario::new(m + p, Policy::Horizontal, 0.9, model.clone(), g).unwrap();
    let per_group = mttdl_linear_solve(&model).unwrap().hours;
    assert!(rel(vertical_epg_mttdl(&vert).unwrap(), per_group) < 0.01);
    assert!(rel(system_mttdl(&vert).unwrap(), system_mttdl(&hor).unwrap()) < 0.01);
}

#[test]
fn single_horizontal_group_is_plain_mttdl() {
    let model = FailureModel::uniform(10, 2, 1e-4, 0.1).unwrap();
    let g = GrowthSpec::constant(1e-4).unwrap();
    let s = AllocationScenario::new(1, Policy::Horizontal, 1.0, model.clone(), g).unwrap();
    let direct = mttdl_linear_solve(&model).unwrap().hours;
    assert!(rel(system_mttdl(&s).unwrap(), direct) < 1e-14);
}
