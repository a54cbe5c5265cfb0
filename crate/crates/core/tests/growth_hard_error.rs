use mttdl_core::growth::{logistic_lambda, repair_rate, GrowthSpec, RepairSpec};
use mttdl_core::hard_error::{apply_hard_error, eta, p_ucer, UcerSpec};
use mttdl_core::markov::{mttdl_linear_solve, mttdl_upper_bound};
use mttdl_core::numeric::relative_difference as rel;
use mttdl_core::FailureModel;
use proptest::prelude::*;

proptest! {
    #[test]
    fn logistic_bounded_and_non_decreasing(l0e in -8.0f64..-3.0, r in 0.0f64..30.0, span in 0.0f64..6.0) {
        let l0 = 10f64.powf(l0e);
        let cap = l0 * 10f64.powf(span);
        let g = GrowthSpec::new(l0, r, Some(cap)).unwrap();
        let mut prev = 0.0;
        for i in 0..60 {
            let v = logistic_lambda(&g, i);
            prop_assert!(v >= prev);
            prop_assert!(v <= cap * (1.0 + 1e-15));
            prev = v;
        }
    }

    #[test]
    fn huge_cap_is_exponential(l0e in -8.0f64..-3.0, r in 0.0f64..3.0, i in 0usize..8) {
        let l0 = 10f64.powf(l0e);
        let capped = GrowthSpec::new(l0, r, Some(1e12 * l0)).unwrap();
        let free = GrowthSpec::new(l0, r, None).unwrap();
        prop_assert!(rel(logistic_lambda(&capped, i), l0 * (1.0 + r).powi(i as i32)) <= 1e-6);
        prop_assert!(rel(logistic_lambda(&free, i), l0 * (1.0 + r).powi(i as i32)) <= 1e-12);
    }

    #[test]
    fn identical_tables_give_nominal_rate(table in prop::collection::vec(1.0f64..10.0, 2..8), mu in 1e-4f64..1.0) {
        let s = RepairSpec::new(mu, 20.0, table.clone(), table.clone()).unwrap();
        for j in 0..table.len() - 1 {
            prop_assert_eq!(repair_rate(&s, j).unwrap(), 20.0 * mu);
        }
    }

    #[test]
    fn hard_errors_never_help(a in 0.0f64..0.5, b in 0.0f64..0.5, p in 1usize..6) {
        let model = FailureModel::uniform(12, p, 1e-5, 0.01).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let x = mttdl_linear_solve(&apply_hard_error(&model, lo).unwrap()).unwrap().hours;
        let y = mttdl_linear_solve(&apply_hard_error(&model, hi).unwrap()).unwrap().hours;
        prop_assert!(y <= x * (1.0 + 1e-12));
    }

    #[test]
    fn exit_rate_of_critical_state_preserved(eta_v in 0.0f64..1.0, m in 1usize..100, p in 1usize..6) {
        let model = FailureModel::uniform(m, p, 3e-5, 0.02).unwrap();
        let h = apply_hard_error(&model, eta_v).unwrap();
        let total = h.forward_rate(p - 1) + h.gamma()[p - 1];
        prop_assert!(rel(total, model.forward_rate(p - 1)) <= 1e-14);
    }
}

#[test]
fn zero_eta_is_identity() {
    let model = FailureModel::uniform(12, 6, 1.0 / 2e5, 1.0 / 168.0).unwrap();
    let same = apply_hard_error(&model, 0.0).unwrap();
    assert_eq!(
        mttdl_linear_solve(&same).unwrap().hours,
        mttdl_linear_solve(&model).unwrap().hours
    );
}

#[test]
fn critical_state_errors_keep_bound_exact() {
    // With only the critical state carrying an error rate, xi_3 = gamma_0 mu_0
    // vanishes and the bound is exact.
    let model = FailureModel::uniform(10, 3, 1e-4, 0.05).unwrap();
    let h = apply_hard_error(&model, 1e-3).unwrap();
    let bound = mttdl_upper_bound(&h).unwrap().hours;
    assert!(rel(bound, mttdl_linear_solve(&h).unwrap().hours) < 1e-12);
}

#[test]
fn eta_of_a_terabyte_drive() {
    let e = eta(&UcerSpec::new(1e-15, 1e12).unwrap());
    assert!(rel(e, 1.0 - (-1e-3f64).exp()) < 1e-12);
    assert!(rel(p_ucer(1e-3, 12), 1.0 - 0.999f64.powi(12)) < 1e-12);
}
