use mttdl_core::overhead::{asymptotic_overhead, avg_read_overhead, overhead_table, AccessPattern};
use mttdl_core::numeric::relative_difference as rel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Average per-data-block read cost over every set of `j` failed blocks.
/// Blocks `0..m` are data; a failed data block costs its set size, any
/// other data block costs one read.
fn brute_force(n: usize, m: usize, sizes: &[usize], j: usize) -> f64 {
    let mut total = 0.0;
    let mut count = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != j {
            continue;
        }
        let cost: usize = (0..m)
            .map(|k| if mask & (1 << k) != 0 { sizes[k] } else { 1 })
            .sum();
        total += cost as f64 / m as f64;
        count += 1;
    }
    total / count as f64
}

#[test]
fn matches_exhaustive_enumeration_up_to_sixteen_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0usize;
    for n in 2..=16usize {
        for m in 1..n {
            let sizes: Vec<usize> = (0..m).map(|_| rng.random_range(1..n)).collect();
            let pat = AccessPattern::new(n, m, sizes.clone()).unwrap();
            for j in 0..=n - m {
                let want = brute_force(n, m, &sizes, j);
                let got = avg_read_overhead(&pat, j).unwrap();
                assert!(rel(got, want) <= 1e-9, "n={n} m={m} j={j}: {got} vs {want}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, (2..=16).map(|n: usize| (1..n).map(|m| n - m + 1).sum::<usize>()).sum::<usize>());
}

#[test]
fn mds_matches_enumeration() {
    let pat = AccessPattern::mds(12, 8).unwrap();
    for j in 0..=4 {
        let want = brute_force(12, 8, &[8; 8], j);
        assert!(rel(avg_read_overhead(&pat, j).unwrap(), want) <= 1e-12);
    }
}

#[test]
fn exact_and_asymptotic_forms_converge() {
    // The hypergeometric mean of the failed data-block count is j m / n and
    // the per-block cost is linear in it, so the exact value is
    // 1 + (m - 1) j / n and the gap to the limit form is j / n.
    for j in 1..=6 {
        let gaps: Vec<f64> = [18usize, 180, 1800]
            .iter()
            .map(|&n| {
                let pat = AccessPattern::mds(n, 2 * n / 3).unwrap();
                (avg_read_overhead(&pat, j).unwrap() - asymptotic_overhead(&pat, j)).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "j={j}: {gaps:?}");
        for (g, n) in gaps.iter().zip([18.0, 180.0, 1800.0]) {
            assert!((g - j as f64 / n).abs() <= 1e-12, "j={j}: {gaps:?}");
        }
    }
}

#[test]
fn large_code_single_failure_within_one_percent() {
    let pat = AccessPattern::mds(1800, 1200).unwrap();
    let exact = avg_read_overhead(&pat, 1).unwrap();
    assert!(rel(exact, asymptotic_overhead(&pat, 1)) < 0.01);
    assert!(rel(exact, 1.0 + 1199.0 / 1800.0) < 1e-12);
    assert_eq!(asymptotic_overhead(&pat, 1), 1.0 + 1200.0 / 1800.0);
}

#[test]
fn constant_access_sets_approach_one() {
    let vals: Vec<f64> = [20usize, 200, 2000]
        .iter()
        .map(|&n| asymptotic_overhead(&AccessPattern::new(n, n / 2, vec![4; n / 2]).unwrap(), 3))
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals[2] - 1.0 < 0.01);
}

proptest! {
    #[test]
    fn mds_overhead_non_decreasing(n in 2usize..300, frac in 0.05f64..0.95) {
        let m = ((n as f64 * frac) as usize).clamp(1, n - 1);
        let row = overhead_table(&AccessPattern::mds(n, m).unwrap());
        prop_assert_eq!(row[0], 1.0);
        prop_assert!(row.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
