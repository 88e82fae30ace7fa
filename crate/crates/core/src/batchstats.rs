//! Sample and population variances of per-sample gradients relative to a pivot direction.
//!
//! For a pivot `p` and per-sample gradients `g_i`, `i ∈ S`:
//!
//! * `var_inner`: variance of the inner products `g_iᵀp`, centered at their mean
//!   (which is `‖p‖²` when `p` is the batch mean);
//! * `var_orth`: mean squared norm of the component of `g_i` orthogonal to `p`;
//! * `var_grad`: variance of `g_i` around the batch mean.
//!
//! Sample statistics divide by `|S| - 1`; population statistics divide by `N`.

use crate::error::{Error, Result};
use crate::objective::{self, Dataset, GradientBundle, ObjectiveSpec};
use crate::vecops::{self, ScalarSum};

/// Pivots with norm at or below this are treated as zero.
pub const DEGENERATE_PIVOT_NORM: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub sample_size: usize,
    pub pivot_norm_sq: f64,
    pub var_inner: f64,
    pub var_orth: f64,
    pub var_grad: f64,
}

/// Population moments over all N samples (divisor N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationStats {
    pub n_samples: usize,
    pub pivot_norm_sq: f64,
    pub var_inner: f64,
    pub var_orth: f64,
    pub var_grad: f64,
}

fn check_pivot(pivot: &[f64]) -> Result<f64> {
    if !vecops::all_finite(pivot) {
        return Err(Error::NonFinite("pivot"));
    }
    let pnsq = vecops::norm_sq(pivot);
    if pnsq.sqrt() <= DEGENERATE_PIVOT_NORM {
        return Err(Error::DegeneratePivot);
    }
    Ok(pnsq)
}

/// Squared norm of `g - (gᵀp / ‖p‖²) p`.
#[inline]
fn orth_residual_sq(g: &[f64], pivot: &[f64], pnsq: f64) -> f64 {
    let c = vecops::dot(g, pivot) / pnsq;
    g.iter().zip(pivot).map(|(gi, pi)| (gi - c * pi).powi(2)).sum()
}

#[inline]
fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Sample statistics of a batch in one pass. Inner products are centered with
/// Welford's update.
pub fn compute_batch_stats(bundle: &GradientBundle, pivot: &[f64]) -> Result<BatchStats> {
    let n = bundle.len();
    if n < 2 {
        return Err(Error::VarianceUndefined(n));
    }
    if pivot.len() != bundle.dim() {
        return Err(Error::DimensionMismatch {
            expected: bundle.dim(),
            got: pivot.len(),
        });
    }
    let pnsq = check_pivot(pivot)?;
    let mean = &bundle.batch_mean;

    let mut ip_mean = 0.0;
    let mut ip_m2 = 0.0;
    let mut orth = ScalarSum::new();
    let mut dev = ScalarSum::new();
    for (k, g) in bundle.iter().enumerate() {
        let ip = vecops::dot(g, pivot);
        let delta = ip - ip_mean;
        ip_mean += delta / (k + 1) as f64;
        ip_m2 += delta * (ip - ip_mean);
        orth.add(orth_residual_sq(g, pivot, pnsq));
        dev.add(dist_sq(g, mean));
    }
    let denom = (n - 1) as f64;
    Ok(BatchStats {
        sample_size: n,
        pivot_norm_sq: pnsq,
        var_inner: ip_m2.max(0.0) / denom,
        var_orth: orth.finish() / denom,
        var_grad: dev.finish() / denom,
    })
}

/// Population statistics over the whole dataset at `x`. The inner products are
/// centered at `∇R(x)ᵀp`, their exact mean.
pub fn population_stats(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    pivot: &[f64],
) -> Result<PopulationStats> {
    let full = objective::full_gradient(spec, data, x)?;
    population_stats_with(spec, data, x, &full, pivot)
}

/// As [`population_stats`] with a precomputed full gradient.
pub fn population_stats_with(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    full_gradient: &[f64],
    pivot: &[f64],
) -> Result<PopulationStats> {
    if pivot.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: pivot.len(),
        });
    }
    let pnsq = match check_pivot(pivot) {
        Err(Error::DegeneratePivot) => return Err(Error::ZeroGradient),
        other => other?,
    };
    let n = data.n_samples();
    let ip_center = vecops::dot(full_gradient, pivot);
    let mut inner = ScalarSum::new();
    let mut orth = ScalarSum::new();
    let mut dev = ScalarSum::new();
    for i in 0..n {
        let g = objective::per_sample_gradient(spec, data, x, i)?;
        inner.add((vecops::dot(&g, pivot) - ip_center).powi(2));
        orth.add(orth_residual_sq(&g, pivot, pnsq));
        dev.add(dist_sq(&g, full_gradient));
    }
    let nf = n as f64;
    Ok(PopulationStats {
        n_samples: n,
        pivot_norm_sq: pnsq,
        var_inner: inner.finish() / nf,
        var_orth: orth.finish() / nf,
        var_grad: dev.finish() / nf,
    })
}
