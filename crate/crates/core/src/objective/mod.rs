//! Finite-sum objectives `R(x) = (1/N) Σ F_i(x)`.
//!
//! Two objectives are supported:
//!
//! * `LogisticL2`: `F_i(x) = log(1 + exp(-z_i xᵀy_i)) + (λ/2)‖x‖²`, with `y_i` the
//!   feature row and `z_i ∈ {-1, +1}` the label.
//! * `MeanSquareCenters`: `F_i(x) = ½‖x - c_i‖²` where the centers `c_i` are the
//!   dataset rows. Strongly convex with μ = L = 1, used as an analytic test problem.
//!
//! All means go through the chunked reduction in [`crate::vecops`], so results
//! are bit-reproducible for a given index order.

mod dataset;

pub use dataset::{Dataset, Features, Row};

use crate::error::{Error, Result};
use crate::vecops::{self, ScalarSum, VecSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveSpec {
    LogisticL2 { lambda: f64 },
    MeanSquareCenters,
}

impl ObjectiveSpec {
    /// Logistic loss with the default regularization λ = 1/N.
    pub fn logistic_for(data: &Dataset) -> Self {
        ObjectiveSpec::LogisticL2 {
            lambda: 1.0 / data.n_samples() as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ObjectiveSpec::LogisticL2 { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => Err(
                Error::InvalidConfig(format!("lambda must be finite and nonnegative, got {lambda}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Per-sample gradients of a batch together with their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    dim: usize,
    per_sample: Vec<f64>,
    pub batch_mean: Vec<f64>,
}

impl GradientBundle {
    /// Builds a bundle from explicit per-sample gradients.
    pub fn from_gradients(grads: &[Vec<f64>]) -> Result<Self> {
        if grads.is_empty() {
            return Err(Error::EmptySample);
        }
        let dim = grads[0].len();
        let mut per_sample = Vec::with_capacity(grads.len() * dim);
        let mut sum = VecSum::new(dim);
        for g in grads {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            per_sample.extend_from_slice(g);
            sum.add(g);
        }
        let batch_mean = scale(sum.finish(), 1.0 / grads.len() as f64);
        Ok(Self {
            dim,
            per_sample,
            batch_mean,
        })
    }

    pub fn len(&self) -> usize {
        self.per_sample.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.per_sample.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn sample(&self, pos: usize) -> &[f64] {
        &self.per_sample[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.per_sample.chunks_exact(self.dim)
    }
}

fn scale(mut v: Vec<f64>, a: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= a);
    v
}

fn check_point(data: &Dataset, x: &[f64]) -> Result<()> {
    if x.len() != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.n_features(),
            got: x.len(),
        });
    }
    if !vecops::all_finite(x) {
        return Err(Error::NonFinite("iterate"));
    }
    Ok(())
}

fn check_index(data: &Dataset, i: usize) -> Result<()> {
    if i >= data.n_samples() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n_samples: data.n_samples(),
        });
    }
    Ok(())
}

fn check_sample(data: &Dataset, sample: &[usize]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.iter().try_for_each(|&i| check_index(data, i))
}

/// `log(1 + exp(-t))` without overflow.
#[inline]
pub fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-t))`, branching on the sign of `t`.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

// Unchecked kernels; callers validate.

#[inline]
fn value_unchecked(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], i: usize, x_sq: f64) -> f64 {
    match *spec {
        ObjectiveSpec::LogisticL2 { lambda } => {
            let t = data.label(i) * data.row(i).dot(x);
            log1p_exp_neg(t) + 0.5 * lambda * x_sq
        }
        ObjectiveSpec::MeanSquareCenters => {
            // Coordinatewise; expanding ½‖x‖² − xᵀc + ½‖c‖² cancels badly near c.
            let sq = |c: &[f64]| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            match data.row(i) {
                Row::Dense(c) => 0.5 * sq(c),
                row => 0.5 * sq(&row.to_dense(x.len())),
            }
        }
    }
}

/// Writes the gradient of `F_i` at `x` into `out` (overwriting it).
#[inline]
fn gradient_into(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], i: usize, out: &mut [f64]) {
    match *spec {
        ObjectiveSpec::LogisticL2 { lambda } => {
            let z = data.label(i);
            let row = data.row(i);
            let t = z * row.dot(x);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = lambda * xi;
            }
            row.add_scaled_to(-z * sigmoid(-t), out);
        }
        ObjectiveSpec::MeanSquareCenters => {
            out.copy_from_slice(x);
            data.row(i).add_scaled_to(-1.0, out);
        }
    }
}

pub fn per_sample_value(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], i: usize) -> Result<f64> {
    check_index(data, i)?;
    check_point(data, x)?;
    Ok(value_unchecked(spec, data, x, i, vecops::norm_sq(x)))
}

pub fn per_sample_gradient(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    i: usize,
) -> Result<Vec<f64>> {
    check_index(data, i)?;
    check_point(data, x)?;
    let mut g = vec![0.0; x.len()];
    gradient_into(spec, data, x, i, &mut g);
    Ok(g)
}

/// Mean of `F_i(x)` over the sample.
pub fn batch_value(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], sample: &[usize]) -> Result<f64> {
    check_sample(data, sample)?;
    check_point(data, x)?;
    let x_sq = vecops::norm_sq(x);
    let mut sum = ScalarSum::new();
    for &i in sample {
        sum.add(value_unchecked(spec, data, x, i, x_sq));
    }
    Ok(sum.finish() / sample.len() as f64)
}

/// Per-sample gradients over the sample (in sample order) and their mean.
pub fn batch_gradient(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    sample: &[usize],
) -> Result<GradientBundle> {
    check_sample(data, sample)?;
    check_point(data, x)?;
    let dim = x.len();
    let mut per_sample = vec![0.0; sample.len() * dim];
    let mut sum = VecSum::new(dim);
    for (pos, &i) in sample.iter().enumerate() {
        let g = &mut per_sample[pos * dim..(pos + 1) * dim];
        gradient_into(spec, data, x, i, g);
        sum.add(g);
    }
    Ok(GradientBundle {
        dim,
        per_sample,
        batch_mean: scale(sum.finish(), 1.0 / sample.len() as f64),
    })
}

/// Mean gradient over the sample without keeping the per-sample terms.
pub fn batch_mean_gradient(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    sample: impl ExactSizeIterator<Item = usize>,
) -> Result<Vec<f64>> {
    check_point(data, x)?;
    let n = sample.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let dim = x.len();
    let mut sum = VecSum::new(dim);
    let mut g = vec![0.0; dim];
    for i in sample {
        check_index(data, i)?;
        gradient_into(spec, data, x, i, &mut g);
        sum.add(&g);
    }
    Ok(scale(sum.finish(), 1.0 / n as f64))
}

pub fn full_value(spec: &ObjectiveSpec, data: &Dataset, x: &[f64]) -> Result<f64> {
    let all: Vec<usize> = (0..data.n_samples()).collect();
    batch_value(spec, data, x, &all)
}

/// Full gradient `∇R(x)`. Bitwise equal to `batch_gradient(..).batch_mean` over `0..N`.
pub fn full_gradient(spec: &ObjectiveSpec, data: &Dataset, x: &[f64]) -> Result<Vec<f64>> {
    batch_mean_gradient(spec, data, x, 0..data.n_samples())
}

/// Max over coordinates of `|central difference − analytic| / (1 + |analytic|)` for `R`.
pub fn finite_difference_check(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidConfig(format!("step h must be positive, got {h}")));
    }
    let g = full_gradient(spec, data, x)?;
    let mut xp = x.to_vec();
    let mut worst = 0.0_f64;
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = full_value(spec, data, &xp)?;
        xp[j] = x[j] - h;
        let fm = full_value(spec, data, &xp)?;
        xp[j] = x[j];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs() / (1.0 + g[j].abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_point(label: f64, row: Vec<f64>) -> Dataset {
        Dataset::dense(&[row], &[label]).unwrap()
    }

    #[test]
    fn logistic_value_at_origin_is_log2() {
        let d = one_point(-1.0, vec![3.0, -2.0]);
        let spec = ObjectiveSpec::LogisticL2 { lambda: 0.0 };
        let v = per_sample_value(&spec, &d, &[0.0, 0.0], 0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logistic_value_with_regularization() {
        // log(1 + e^{-1}) + 0.5, evaluated in extended precision: 0.81326168751822...
        let d = one_point(1.0, vec![1.0, 0.0]);
        let spec = ObjectiveSpec::LogisticL2 { lambda: 1.0 };
        let v = per_sample_value(&spec, &d, &[1.0, 0.0], 0).unwrap();
        assert!((v - 0.813_261_687_518_223).abs() < 1e-12, "{v}");
        assert!((v - 0.813262).abs() < 1e-6);
    }

    #[test]
    fn center_value_zero_at_center() {
        let d = Dataset::centers(&[vec![1.0, 0.0]]).unwrap();
        let v = per_sample_value(&ObjectiveSpec::MeanSquareCenters, &d, &[1.0, 0.0], 0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn logistic_gradient_at_origin() {
        let d = one_point(1.0, vec![1.0, 0.0]);
        let g = per_sample_gradient(&ObjectiveSpec::LogisticL2 { lambda: 0.0 }, &d, &[0.0, 0.0], 0)
            .unwrap();
        assert_eq!(g, vec![-0.5, 0.0]);
    }

    #[test]
    fn logistic_gradient_matches_central_differences() {
        let d = one_point(1.0, vec![1.0, 0.0]);
        let spec = ObjectiveSpec::LogisticL2 { lambda: 1.0 };
        let x = [1.0, 0.0];
        let g = per_sample_gradient(&spec, &d, &x, 0).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (per_sample_value(&spec, &d, &xp, 0).unwrap()
                - per_sample_value(&spec, &d, &xm, 0).unwrap())
                / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()));
        }
        assert!((g[0] - 0.731059).abs() < 1e-6);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn center_gradient() {
        let d = Dataset::centers(&[vec![1.0, 0.0]]).unwrap();
        let g = per_sample_gradient(&ObjectiveSpec::MeanSquareCenters, &d, &[0.0, 0.0], 0).unwrap();
        assert_eq!(g, vec![-1.0, 0.0]);
    }

    #[test]
    fn stable_for_huge_margins() {
        assert!(log1p_exp_neg(-800.0).is_finite());
        assert_eq!(log1p_exp_neg(800.0), 0.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn errors() {
        let d = one_point(1.0, vec![1.0, 0.0]);
        let spec = ObjectiveSpec::LogisticL2 { lambda: 0.0 };
        assert!(matches!(
            per_sample_value(&spec, &d, &[0.0, 0.0], 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            per_sample_value(&spec, &d, &[f64::NAN, 0.0], 0),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(batch_value(&spec, &d, &[0.0, 0.0], &[]), Err(Error::EmptySample)));
        assert!(matches!(batch_gradient(&spec, &d, &[0.0, 0.0], &[]), Err(Error::EmptySample)));
        assert!(ObjectiveSpec::LogisticL2 { lambda: -1.0 }.validate().is_err());
    }

    #[test]
    fn batch_of_one_equals_per_sample() {
        let d = Dataset::dense(&[vec![1.0, 2.0], vec![-1.0, 0.5]], &[1.0, -1.0]).unwrap();
        let spec = ObjectiveSpec::LogisticL2 { lambda: 0.3 };
        let x = [0.2, -0.4];
        assert_eq!(
            batch_value(&spec, &d, &x, &[1]).unwrap(),
            per_sample_value(&spec, &d, &x, 1).unwrap()
        );
        let b = batch_gradient(&spec, &d, &x, &[1]).unwrap();
        assert_eq!(b.batch_mean, per_sample_gradient(&spec, &d, &x, 1).unwrap());
    }

    #[test]
    fn symmetric_centers_cancel() {
        let d = Dataset::centers(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let b = batch_gradient(&ObjectiveSpec::MeanSquareCenters, &d, &[0.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(b.batch_mean, vec![0.0, 0.0]);
        assert_eq!(b.len(), 2);
        assert_eq!(b.sample(0), &[-1.0, 0.0]);
    }

    #[test]
    fn logistic_batch_at_origin() {
        let d = Dataset::dense(&[vec![1.0, 2.0], vec![3.0, -1.0]], &[1.0, -1.0]).unwrap();
        let spec = ObjectiveSpec::LogisticL2 { lambda: 0.5 };
        let b = batch_gradient(&spec, &d, &[0.0, 0.0], &[0, 1]).unwrap();
        // −½ · mean(z_i y_i) = −½ · ((1,2) + (−3,1))/2
        assert_eq!(b.batch_mean, vec![0.5, -0.75]);
        assert!((batch_value(&spec, &d, &[0.0, 0.0], &[1, 0]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn full_equals_batch_over_everything_bitwise() {
        let rows: Vec<Vec<f64>> = (0..2100)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), 0.1])
            .collect();
        let labels: Vec<f64> = (0..2100).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let d = Dataset::dense(&rows, &labels).unwrap();
        let spec = ObjectiveSpec::logistic_for(&d);
        let x = [0.3, -0.2, 0.9];
        let all: Vec<usize> = (0..2100).collect();
        let b = batch_gradient(&spec, &d, &x, &all).unwrap();
        assert_eq!(b.batch_mean, full_gradient(&spec, &d, &x).unwrap());
        assert_eq!(
            batch_value(&spec, &d, &x, &all).unwrap(),
            full_value(&spec, &d, &x).unwrap()
        );
    }

    #[test]
    fn finite_difference_check_on_quadratic_is_tight() {
        let d = Dataset::centers(&[vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        let e = finite_difference_check(&ObjectiveSpec::MeanSquareCenters, &d, &[7.0, -3.0], 1e-4).unwrap();
        assert!(e <= 1e-10, "{e}");
        assert!(finite_difference_check(&ObjectiveSpec::MeanSquareCenters, &d, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn finite_difference_check_logistic_at_origin() {
        let d = Dataset::dense(&[vec![1.0, 2.0], vec![3.0, -1.0]], &[1.0, -1.0]).unwrap();
        let e = finite_difference_check(&ObjectiveSpec::logistic_for(&d), &d, &[0.0, 0.0], 1e-6).unwrap();
        assert!(e <= 1e-6, "{e}");
    }
}
