//! Population-level diagnostics: the exact tests, the ratio β(x) of minimal
//! sample sizes, angles, the theoretical linear rate, Monte-Carlo descent
//! probability and a reference optimum.
//!
//! Expectations over `i` are taken over the empirical distribution of the
//! dataset (divisor N).

use crate::batchstats::{population_stats_with, PopulationStats};
use crate::control::{TestOutcome, TestWhich};
use crate::error::{Error, Result};
use crate::linesearch::{backtrack_with_zeta, LineSearchConfig};
use crate::objective::{self, Dataset, ObjectiveSpec};
use crate::rng::{sample_without_replacement, RngStream};
use crate::vecops;

/// Diagnostics at one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub beta: f64,
    pub s_min_inner: f64,
    pub s_min_norm: f64,
    /// Angle between the sampled and full gradient; NaN if no sampled gradient was given.
    pub angle_deg: f64,
    pub exact_ip_lhs: f64,
    pub exact_orth_lhs: f64,
    pub exact_norm_lhs: f64,
    /// NaN when the curvature bounds do not give a valid rate.
    pub rho: f64,
    pub tan_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTests {
    pub inner_product: TestOutcome,
    pub orthogonality: TestOutcome,
    pub norm: TestOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSizes {
    pub beta: f64,
    pub s_min_inner: f64,
    pub s_min_norm: f64,
    /// Minimal size for the exact orthogonality test at a given ν.
    pub s_min_orth: f64,
}

fn outcome(lhs: f64, rhs: f64, which: TestWhich) -> TestOutcome {
    TestOutcome {
        passed: lhs <= rhs,
        lhs,
        rhs,
        which,
    }
}

/// Population statistics pivoted on the full gradient, plus that gradient.
pub fn full_pivot_stats(spec: &ObjectiveSpec, data: &Dataset, x: &[f64]) -> Result<(Vec<f64>, PopulationStats)> {
    let g = objective::full_gradient(spec, data, x)?;
    let stats = population_stats_with(spec, data, x, &g, &g)?;
    Ok((g, stats))
}

pub fn exact_tests_from(pop: &PopulationStats, theta: f64, nu: f64, sample_size: usize) -> ExactTests {
    let m = sample_size as f64;
    let g2 = pop.pivot_norm_sq;
    ExactTests {
        inner_product: outcome(pop.var_inner / m, theta * theta * g2 * g2, TestWhich::InnerProduct),
        orthogonality: outcome(pop.var_orth / m, nu * nu * g2, TestWhich::Orthogonality),
        norm: outcome(pop.var_grad / m, theta * theta * g2, TestWhich::Norm),
    }
}

/// Exact-variance inner product, orthogonality and norm tests at `x` for a sample of `sample_size`.
pub fn exact_tests(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    theta: f64,
    nu: f64,
    sample_size: usize,
) -> Result<ExactTests> {
    if sample_size == 0 {
        return Err(Error::EmptySample);
    }
    let (_, pop) = full_pivot_stats(spec, data, x)?;
    Ok(exact_tests_from(&pop, theta, nu, sample_size))
}

/// Real-valued minimal sample sizes from population moments pivoted on `∇R(x)`.
pub fn min_sizes_from(pop: &PopulationStats, theta: f64, nu: f64) -> MinSizes {
    let g2 = pop.pivot_norm_sq;
    let t2 = theta * theta;
    // E[(g_iᵀ∇R)²]/‖∇R‖² − ‖∇R‖² equals var_inner/‖∇R‖²; likewise for the norm test.
    let s_min_inner = pop.var_inner / (t2 * g2 * g2);
    let s_min_norm = pop.var_grad / (t2 * g2);
    let denom = pop.var_grad * g2;
    let beta = if denom > 0.0 { pop.var_inner / denom } else { 1.0 };
    MinSizes {
        beta,
        s_min_inner,
        s_min_norm,
        s_min_orth: pop.var_orth / (nu * nu * g2),
    }
}

/// `(β, |S_i|, |S_n|)` at `x`. β is 1 when the total gradient variance vanishes.
pub fn beta_and_min_sizes(spec: &ObjectiveSpec, data: &Dataset, x: &[f64], theta: f64) -> Result<(f64, f64, f64)> {
    let (_, pop) = full_pivot_stats(spec, data, x)?;
    let m = min_sizes_from(&pop, theta, 1.0);
    Ok((m.beta, m.s_min_inner, m.s_min_norm))
}

pub fn angle_degrees(g: &[f64], h: &[f64]) -> Result<f64> {
    let (ng, nh) = (vecops::norm(g), vecops::norm(h));
    if ng == 0.0 || nh == 0.0 {
        return Err(Error::ZeroGradient);
    }
    // 2·atan2(‖u − v‖, ‖u + v‖) on unit vectors stays accurate near 0° and 180°.
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in g.iter().zip(h) {
        let (u, v) = (a / ng, b / nh);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).to_degrees().clamp(0.0, 180.0))
}

/// `ρ = 1 − μ / (L (1 + θ² + ν²))`
pub fn theoretical_rate(theta: f64, nu: f64, mu: f64, l: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= l && l.is_finite()) {
        return Err(Error::InvalidConfig(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    Ok(1.0 - mu / (l * (1.0 + theta * theta + nu * nu)))
}

/// `ν / √(1 − θ²)`, the bound on the tangent of the angle between sampled and true gradient.
pub fn tan_bound(theta: f64, nu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidConfig(format!("theta must lie in [0, 1), got {theta}")));
    }
    Ok(nu / (1.0 - theta * theta).sqrt())
}

/// Strong convexity and smoothness constants `(μ, L)` for the objective.
/// For the logistic loss these are the bounds `λ` and `λ + mean‖y_i‖² / 4`.
pub fn curvature_bounds(spec: &ObjectiveSpec, data: &Dataset) -> (f64, f64) {
    match *spec {
        ObjectiveSpec::MeanSquareCenters => (1.0, 1.0),
        ObjectiveSpec::LogisticL2 { lambda } => {
            let mut s = vecops::ScalarSum::new();
            for i in 0..data.n_samples() {
                let row = data.row(i);
                s.add(match row {
                    objective::Row::Dense(v) => vecops::norm_sq(v),
                    objective::Row::Sparse { values, .. } => vecops::norm_sq(values),
                });
            }
            (lambda, lambda + 0.25 * s.finish() / data.n_samples() as f64)
        }
    }
}

/// Fraction of `trials` batches of size `sample_size` (drawn without
/// replacement) whose gradient makes a positive inner product with `∇R(x)`.
pub fn descent_probability(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    sample_size: usize,
    trials: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if trials < 1000 {
        return Err(Error::InvalidConfig(format!("need at least 1000 trials, got {trials}")));
    }
    let n = data.n_samples();
    if sample_size > n {
        return Err(Error::SampleTooLarge { m: sample_size, n });
    }
    let g = objective::full_gradient(spec, data, x)?;
    if vecops::norm(&g) <= crate::batchstats::DEGENERATE_PIVOT_NORM {
        return Err(Error::ZeroGradient);
    }
    // The batch gradient's inner product with ∇R is the mean of these.
    let c: Vec<f64> = (0..n)
        .map(|i| objective::per_sample_gradient(spec, data, x, i).map(|gi| vecops::dot(&gi, &g)))
        .collect::<Result<_>>()?;
    let mut hits = 0usize;
    for _ in 0..trials {
        let s = sample_without_replacement(rng, n, sample_size)?;
        let mut sum = vecops::ScalarSum::new();
        for i in s {
            sum.add(c[i]);
        }
        if sum.finish() > 0.0 {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

pub const REFERENCE_ITERATION_CAP: usize = 1_000_000;

/// Minimizer and optimal value by full-gradient descent with the backtracking
/// line search (ζ = 2, exact gradients), run until `‖∇R‖∞ <= tol`.
pub fn reference_optimum(spec: &ObjectiveSpec, data: &Dataset, tol: f64) -> Result<(Vec<f64>, f64)> {
    reference_optimum_from(spec, data, &vec![0.0; data.n_features()], tol)
}

pub fn reference_optimum_from(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x0: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let all: Vec<usize> = (0..data.n_samples()).collect();
    let ls = LineSearchConfig::default();
    let mut x = x0.to_vec();
    let mut l = ls.l0;
    for _ in 0..REFERENCE_ITERATION_CAP {
        let g = objective::full_gradient(spec, data, &x)?;
        if vecops::norm_inf(&g) <= tol {
            let f = objective::full_value(spec, data, &x)?;
            return Ok((x, f));
        }
        match backtrack_with_zeta(spec, data, &x, &g, &all, l, 2.0, &ls) {
            Ok(r) => {
                l = r.l_k;
                x = r.x_new;
            }
            // Decrease below function-value resolution: step with the last accepted estimate.
            Err(Error::LineSearchFailed { .. }) => {
                vecops::axpy(-1.0 / l, &g, &mut x);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::IterationCap(REFERENCE_ITERATION_CAP))
}

/// Full diagnostic report at `x`. `sampled` is the batch gradient used there
/// (for the angle) and `sample_size` the batch size the exact tests are evaluated at.
pub fn oracle_report(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    sampled: Option<&[f64]>,
    sample_size: usize,
    theta: f64,
    nu: f64,
) -> Result<OracleReport> {
    let (g, pop) = full_pivot_stats(spec, data, x)?;
    let sizes = min_sizes_from(&pop, theta, nu);
    let exact = exact_tests_from(&pop, theta, nu, sample_size.max(1));
    let angle_deg = match sampled {
        Some(s) => angle_degrees(s, &g).unwrap_or(f64::NAN),
        None => f64::NAN,
    };
    let (mu, l) = curvature_bounds(spec, data);
    Ok(OracleReport {
        beta: sizes.beta,
        s_min_inner: sizes.s_min_inner,
        s_min_norm: sizes.s_min_norm,
        angle_deg,
        exact_ip_lhs: exact.inner_product.lhs,
        exact_orth_lhs: exact.orthogonality.lhs,
        exact_norm_lhs: exact.norm.lhs,
        rho: theoretical_rate(theta, nu, mu, l).unwrap_or(f64::NAN),
        tan_bound: tan_bound(theta, nu).unwrap_or(f64::NAN),
    })
}
