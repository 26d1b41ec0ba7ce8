use std::collections::BTreeSet;

use polyreg_core::dataset::split_indices;
use polyreg_core::{
    encode_design, enumerate_terms, expand, fit_logistic_ova, fit_ols, fit_ridge, fsr, split, Column, ColumnSpec,
    Dataset, DummyGroups, FitMethod, FsrConfig, LogisticOptions, Matrix, ModelConfig, PolyModel, PolySpec, Prediction,
    Response, Schema,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0xf17),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_matrix(n: usize, k: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0))
}

fn linear_response(x: &Matrix, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    (0..x.rows())
        .map(|i| {
            x.row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| (j as f64 + 1.0) * v)
                .sum::<f64>()
                + rng.gen_range(-0.5..0.5)
        })
        .collect()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn split_partitions_rows(n in 1usize..300, seed in any::<u64>()) {
        let x = random_matrix(n, 1, seed);
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ds = Dataset::from_matrix(&["u"], &x, &y, "y").unwrap();
        let (train, test) = split(&ds, seed).unwrap();
        prop_assert_eq!(train.n() + test.n(), n);
        let expected = if n > 20_000 { 10_000 } else { (n / 5).max(1) };
        prop_assert_eq!(test.n(), expected);
        let (rest, hold) = split_indices(n, expected, seed);
        let a: BTreeSet<usize> = rest.iter().copied().collect();
        let b: BTreeSet<usize> = hold.iter().copied().collect();
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(a.union(&b).count(), n);
    }

    #[test]
    fn numeric_encoding_is_identity(n in 1usize..40, k in 1usize..5, seed in any::<u64>()) {
        let x = random_matrix(n, k, seed);
        let names: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let ds = Dataset::from_matrix(&refs, &x, &vec![0.0; n], "y").unwrap();
        prop_assert_eq!(encode_design(&ds).matrix, x);
    }

    #[test]
    fn dummy_rows_sum_to_at_most_one(levels in proptest::collection::vec(0u32..4, 1..60)) {
        let schema = Schema::new(vec![
            ColumnSpec::categorical("g", ["a", "b", "c", "d"]),
            ColumnSpec::response_numeric("y"),
        ]).unwrap();
        let n = levels.len();
        let ds = Dataset::new(schema, vec![Column::Categorical(levels.clone())], Response::Numeric(vec![0.0; n])).unwrap();
        let enc = encode_design(&ds);
        prop_assert_eq!(enc.matrix.cols(), 3);
        for (i, &l) in levels.iter().enumerate() {
            let s: f64 = enc.matrix.row(i).iter().sum();
            prop_assert_eq!(s, if l == 0 { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal(n in 8usize..60, k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(n > k + 1);
        let x = random_matrix(n, k, seed);
        let y = linear_response(&x, seed);
        let f = fit_ols(&x, &y).unwrap();
        let scale: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(f.residuals.iter().sum::<f64>().abs() <= 1e-8 * scale.max(1.0));
        for j in 0..k {
            let d: f64 = f.residuals.iter().zip(x.column(j)).map(|(r, v)| r * v).sum();
            prop_assert!(d.abs() <= 1e-8 * scale.max(1.0), "column {} dot {}", j, d);
        }
    }

    #[test]
    fn ols_r_squared_nondecreasing_in_degree(n in 30usize..80, seed in any::<u64>()) {
        let x = random_matrix(n, 2, seed);
        let y: Vec<f64> = (0..n).map(|i| (3.0 * x[(i, 0)]).sin() + x[(i, 1)] * x[(i, 0)]).collect();
        let mut prev = 0.0;
        for d in 1..=4 {
            let t = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(d).unwrap()).unwrap();
            let r2 = fit_ols(&expand(&x, &t).unwrap(), &y).unwrap().r_squared;
            prop_assert!(r2 >= prev - 1e-10, "degree {}: {} < {}", d, r2, prev);
            prev = r2;
        }
    }

    #[test]
    fn ridge_norm_shrinks_with_lambda(n in 10usize..50, k in 1usize..4, seed in any::<u64>(), l1 in 1e-3f64..10.0, factor in 1.01f64..100.0) {
        let x = random_matrix(n, k, seed);
        let y = linear_response(&x, seed);
        let norm = |l: f64| {
            let r = fit_ridge(&x, &y, l).unwrap();
            let z = r.standardization.scales.iter().zip(&r.coefficients).map(|(s, c)| (s * c) * (s * c)).sum::<f64>();
            z.sqrt()
        };
        prop_assert!(norm(l1) >= norm(l1 * factor) - 1e-12);
    }

    #[test]
    fn predict_reproduces_fitted_values(n in 12usize..50, seed in any::<u64>()) {
        let x = random_matrix(n, 2, seed);
        let y = linear_response(&x, seed);
        let ds = Dataset::from_matrix(&["u", "v"], &x, &y, "y").unwrap();
        let (model, _) = PolyModel::fit(&ds, &ModelConfig::new(PolySpec::full(2).unwrap(), FitMethod::Ols)).unwrap();
        let t = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(2).unwrap()).unwrap();
        let direct = fit_ols(&expand(&x, &t).unwrap(), &y).unwrap();
        let Prediction::Numeric(p) = model.predict(ds.features()).unwrap() else { unreachable!() };
        for (a, b) in p.iter().zip(&direct.fitted) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }
}

#[test]
fn recovers_polynomial_coefficients() {
    let x = random_matrix(60, 2, 3);
    // 1 + 2u - v + 0.5u^2 - 1.5uv + 3v^2, graded order u, v, u^2, uv, v^2
    let beta = [2.0, -1.0, 0.5, -1.5, 3.0];
    let y: Vec<f64> = (0..60)
        .map(|i| {
            let (u, v) = (x[(i, 0)], x[(i, 1)]);
            1.0 + beta[0] * u + beta[1] * v + beta[2] * u * u + beta[3] * u * v + beta[4] * v * v
        })
        .collect();
    let t = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(2).unwrap()).unwrap();
    let f = fit_ols(&expand(&x, &t).unwrap(), &y).unwrap();
    assert!((f.intercept - 1.0).abs() < 1e-10);
    for (a, b) in f.coefficients.iter().zip(beta) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

fn three_class_problem() -> (Matrix, Vec<u32>) {
    let x = random_matrix(300, 3, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let labels = (0..300)
        .map(|i| {
            let s = [x[(i, 0)], x[(i, 1)] - 0.2, -x[(i, 0)] - x[(i, 2)]];
            let noisy: Vec<f64> = s.iter().map(|v| v + rng.gen_range(-0.4..0.4)).collect();
            (0..3).max_by(|&a, &b| noisy[a].total_cmp(&noisy[b])).unwrap() as u32
        })
        .collect();
    (x, labels)
}

#[test]
fn logistic_is_deterministic() {
    let (x, labels) = three_class_problem();
    let a = fit_logistic_ova(&x, &labels, 3, LogisticOptions::default()).unwrap();
    let b = fit_logistic_ova(&x, &labels, 3, LogisticOptions::default()).unwrap();
    assert_eq!(a.coefficients, b.coefficients);
    assert_eq!(a.intercepts, b.intercepts);
}

#[cfg(feature = "parallel")]
#[test]
fn logistic_serial_and_parallel_agree_bitwise() {
    let (x, labels) = three_class_problem();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| fit_logistic_ova(&x, &labels, 3, LogisticOptions::default()).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| fit_logistic_ova(&x, &labels, 3, LogisticOptions::default()).unwrap());
    assert_eq!(serial.coefficients, parallel.coefficients);
    assert_eq!(serial.intercepts, parallel.intercepts);
    assert_eq!(serial.iterations, parallel.iterations);
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn fsr_beats_baseline_and_selects_unique_terms(seed in any::<u64>(), classify in any::<bool>()) {
        let x = random_matrix(150, 2, seed);
        let t = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(3).unwrap()).unwrap();
        let ds = if classify {
            let labels: Vec<u32> = (0..150).map(|i| u32::from(x[(i, 0)] * x[(i, 1)] > 0.0)).collect();
            let schema = Schema::new(vec![
                ColumnSpec::numeric("u"),
                ColumnSpec::numeric("v"),
                ColumnSpec::response_class("c", ["neg", "pos"]),
            ]).unwrap();
            Dataset::new(schema, vec![Column::Numeric(x.column(0)), Column::Numeric(x.column(1))], Response::Class(labels)).unwrap()
        } else {
            Dataset::from_matrix(&["u", "v"], &x, &linear_response(&x, seed), "y").unwrap()
        };
        let r = fsr(&ds, &FsrConfig::new(t.clone()), seed).unwrap();
        if classify {
            prop_assert!(r.validation_score >= r.baseline_score);
        } else {
            prop_assert!(r.validation_score <= r.baseline_score);
        }
        let uniq: BTreeSet<usize> = r.selected.iter().copied().collect();
        prop_assert_eq!(uniq.len(), r.selected.len());
        prop_assert!(r.selected.iter().all(|&s| s < t.len()));
    }
}
