mod common;

use adasamp::objective::{self, finite_difference_check};
use adasamp::{Dataset, ObjectiveSpec};
use common::{dense, point, rows_and_labels};
use proptest::prelude::*;

fn scaled_into_ball(mut x: Vec<f64>, radius: f64) -> Vec<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > radius {
        x.iter_mut().for_each(|v| *v *= radius / n);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_differences_match_inside_radius_ten(
        (data, x, lambda) in rows_and_labels(2..20, 1..6).prop_flat_map(|rl| {
            let d = rl.0[0].len();
            (Just(rl), point(d, 10.0), 0.0..1.0f64)
        })
    ) {
        let data = dense(&data);
        let x = scaled_into_ball(x, 10.0);
        for spec in [ObjectiveSpec::LogisticL2 { lambda }, ObjectiveSpec::MeanSquareCenters] {
            let err = finite_difference_check(&spec, &data, &x, 1e-6).unwrap();
            prop_assert!(err <= 1e-5, "{spec:?}: {err}");
        }
    }

    #[test]
    fn full_batch_matches_full_bitwise(
        (rl, x) in rows_and_labels(1..40, 1..6).prop_flat_map(|rl| {
            let d = rl.0[0].len();
            (Just(rl), point(d, 5.0))
        })
    ) {
        let data = dense(&rl);
        let all: Vec<usize> = (0..data.n_samples()).collect();
        for spec in [ObjectiveSpec::logistic_for(&data), ObjectiveSpec::MeanSquareCenters] {
            let b = objective::batch_gradient(&spec, &data, &x, &all).unwrap();
            let g = objective::full_gradient(&spec, &data, &x).unwrap();
            prop_assert_eq!(
                b.batch_mean.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                g.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(
                objective::batch_value(&spec, &data, &x, &all).unwrap().to_bits(),
                objective::full_value(&spec, &data, &x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn logistic_sample_value_is_convex_on_lines(
        (rl, a, b, lambda) in rows_and_labels(1..10, 1..6).prop_flat_map(|rl| {
            let d = rl.0[0].len();
            (Just(rl), point(d, 20.0), point(d, 20.0), 0.0..1.0f64)
        })
    ) {
        let data = dense(&rl);
        let spec = ObjectiveSpec::LogisticL2 { lambda };
        let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
        for i in 0..data.n_samples() {
            let fa = objective::per_sample_value(&spec, &data, &a, i).unwrap();
            let fb = objective::per_sample_value(&spec, &data, &b, i).unwrap();
            let fm = objective::per_sample_value(&spec, &data, &mid, i).unwrap();
            let avg = 0.5 * (fa + fb);
            prop_assert!(fm <= avg + 1e-12 * (1.0 + avg.abs()), "{fm} > {avg}");
        }
    }

    #[test]
    fn sparse_and_dense_gradients_agree(
        (rl, x, zero_mask) in rows_and_labels(1..30, 1..8).prop_flat_map(|rl| {
            let (n, d) = (rl.0.len(), rl.0[0].len());
            (Just(rl), point(d, 5.0), prop::collection::vec(prop::bool::weighted(0.4), n * d))
        })
    ) {
        let (mut rows, labels) = rl;
        let d = rows[0].len();
        for (i, r) in rows.iter_mut().enumerate() {
            for (j, v) in r.iter_mut().enumerate() {
                if zero_mask[i * d + j] {
                    *v = 0.0;
                }
            }
        }
        let dense = Dataset::dense(&rows, &labels).unwrap();
        let sparse = dense.to_sparse();
        prop_assert!(sparse.is_sparse());
        for spec in [ObjectiveSpec::logistic_for(&dense), ObjectiveSpec::MeanSquareCenters] {
            let gd = objective::full_gradient(&spec, &dense, &x).unwrap();
            let gs = objective::full_gradient(&spec, &sparse, &x).unwrap();
            let scale = gd.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for (p, q) in gd.iter().zip(&gs) {
                prop_assert!((p - q).abs() <= 1e-12 * scale, "{p} vs {q}");
            }
        }
    }
}
