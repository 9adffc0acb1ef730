mod common;

use std::sync::Arc;

use common::*;
use gmrf_core::linalg::{cholesky, eigenvalues_sym, project_to_pattern, spd_inverse};
use gmrf_core::{SparseSpd, SupportPattern, SymmetricDense};
use proptest::prelude::*;
use rand::Rng;

fn random_pattern(seed: u64, n: usize, fill: f64) -> SupportPattern {
    let mut r = rng(seed);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|_| r.random::<f64>() < fill)
        .collect();
    SupportPattern::from_pairs(n, pairs).unwrap()
}

#[test]
fn factor_inverse_matches_gauss_jordan() {
    let mut r = rng(1);
    for n in 1..12 {
        let m = random_dense_spd(&mut r, n);
        let ours = cholesky(&m).unwrap().inverse();
        let oracle = naive_inverse(&to_rows(&m)).concat();
        assert!(max_abs_diff(ours.as_slice(), &oracle) < 1e-10);
    }
}

#[test]
fn log_det_matches_textbook_cholesky() {
    let mut r = rng(2);
    for n in 1..12 {
        let m = random_dense_spd(&mut r, n);
        let l = naive_cholesky(&to_rows(&m)).unwrap();
        let oracle: f64 = (0..n).map(|i| 2.0 * l[i][i].ln()).sum();
        assert!((cholesky(&m).unwrap().log_det() - oracle).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_of_inverse_round_trips(seed in 0u64..100_000, n in 1usize..16) {
        let m = random_dense_spd(&mut rng(seed), n);
        let inv = SparseSpd::from_dense(&cholesky(&m).unwrap().inverse()).unwrap();
        let back = spd_inverse(&inv);
        prop_assert!(max_abs_diff(back.as_slice(), m.as_slice()) <= 1e-8);
    }

    #[test]
    fn cholesky_fails_exactly_on_non_positive_spectra(seed in 0u64..100_000, n in 1usize..=20, shift in -1.5f64..1.5) {
        let m = random_symmetric(&mut rng(seed), n).shifted(shift);
        let min = eigenvalues_sym(&m)[0];
        prop_assume!(min.abs() > 1e-8);
        prop_assert_eq!(cholesky(&m).is_ok(), min > 0.0);
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in 0u64..100_000, n in 1usize..16) {
        let m = random_symmetric(&mut rng(seed), n);
        let ev = eigenvalues_sym(&m);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((ev.iter().sum::<f64>() - m.trace()).abs() <= 1e-10 * n as f64);
    }

    #[test]
    fn projection_is_idempotent_and_linear(seed in 0u64..100_000, n in 1usize..10, fill in 0.0f64..1.0, a in -3.0f64..3.0) {
        let mut r = rng(seed);
        let pattern = random_pattern(seed ^ 0x5eed, n, fill);
        let (x, y) = (random_symmetric(&mut r, n), random_symmetric(&mut r, n));
        let px = project_to_pattern(&x, &pattern).unwrap();
        prop_assert_eq!(&project_to_pattern(&px, &pattern).unwrap(), &px);
        let combo = SymmetricDense::from_fn(n, |i, j| a * x.get(i, j) + y.get(i, j));
        let lhs = project_to_pattern(&combo, &pattern).unwrap();
        let py = project_to_pattern(&y, &pattern).unwrap();
        let rhs = SymmetricDense::from_fn(n, |i, j| a * px.get(i, j) + py.get(i, j));
        prop_assert!(max_abs_diff(lhs.as_slice(), rhs.as_slice()) <= 1e-14);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(px.get(i, j) == 0.0 || pattern.contains(i, j), true);
            }
        }
    }

    #[test]
    fn sparse_quadratic_form_matches_dense(seed in 0u64..100_000, n in 1usize..12) {
        let mut r = rng(seed);
        let q = random_sparse_spd(&mut r, n, 0.3);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let d = q.to_dense();
        let dense: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[i] * d.get(i, j) * x[j]).sum();
        prop_assert!((q.quad_form(&x) - dense).abs() <= 1e-10 * dense.abs().max(1.0));
    }

    #[test]
    fn pattern_json_round_trips(seed in 0u64..100_000, n in 1usize..10, fill in 0.0f64..1.0) {
        let p = Arc::new(random_pattern(seed, n, fill));
        let text = serde_json::to_string(p.as_ref()).unwrap();
        let back: SupportPattern = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, p.as_ref());
    }
}
