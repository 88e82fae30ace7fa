#![allow(dead_code)]

use adasamp::Dataset;
use proptest::prelude::*;

/// Rows and ±1 labels with `n` in `n_range` and `d` in `d_range`.
pub fn rows_and_labels(
    n_range: std::ops::Range<usize>,
    d_range: std::ops::Range<usize>,
) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (n_range, d_range).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, d), n),
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1.0 } else { -1.0 }), n),
        )
    })
}

/// A point of the given dimension with every coordinate in `[-r, r]`.
pub fn point(d: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, d)
}

pub fn dense((rows, labels): &(Vec<Vec<f64>>, Vec<f64>)) -> Dataset {
    Dataset::dense(rows, labels).unwrap()
}

/// Deterministic small fixture for the run-level tests.
pub fn logistic_fixture(n: usize, d: usize, seed: u64) -> Dataset {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| next()).collect()).collect();
    let labels: Vec<f64> = rows
        .iter()
        .map(|r| if r.iter().sum::<f64>() + 0.5 * next() > 0.0 { 1.0 } else { -1.0 })
        .collect();
    Dataset::dense(&rows, &labels).unwrap()
}
