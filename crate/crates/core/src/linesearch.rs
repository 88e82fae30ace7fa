//! Backtracking line search on the sampled function with an adaptive Lipschitz
//! estimate. Each outer iteration first contracts the previous estimate by a
//! variance-dependent factor ζ ∈ [1, 2], then expands it by η until
//!
//! ```text
//! F_S(x − g_S / L) <= F_S(x) − ‖g_S‖² / (2L)
//! ```

use crate::batchstats::{compute_batch_stats, BatchStats};
use crate::error::{Error, Result};
use crate::objective::{self, Dataset, GradientBundle, ObjectiveSpec};
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    pub l0: f64,
    pub eta: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            l0: 1.0,
            eta: 1.5,
            max_backtracks: 60,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return Err(Error::InvalidConfig(format!("l0 must be positive, got {}", self.l0)));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta must exceed 1, got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub l_k: f64,
    pub alpha_k: f64,
    pub zeta_k: f64,
    pub backtracks: usize,
    /// Number of sampled-function evaluations, including the one at `x`.
    pub function_evals: usize,
    /// The accepted point `x − g_S / L_k`.
    pub x_new: Vec<f64>,
    pub f_new: f64,
    pub f_current: f64,
}

/// `ζ = max(1, 2 / a)` with `a = var_grad / (|S| ‖g_S‖²) + 1`. Expects statistics
/// pivoted on the batch mean.
pub fn contraction_factor(stats: &BatchStats) -> f64 {
    let a = stats.var_grad / (stats.sample_size as f64 * stats.pivot_norm_sq) + 1.0;
    (2.0 / a).max(1.0)
}

/// Runs the line search from `l_prev` on sample `sample`, whose per-sample
/// gradients at `x` are in `bundle`.
pub fn backtrack(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    bundle: &GradientBundle,
    sample: &[usize],
    l_prev: f64,
    config: &LineSearchConfig,
) -> Result<LineSearchResult> {
    let stats = compute_batch_stats(bundle, &bundle.batch_mean)?;
    backtrack_with_zeta(
        spec,
        data,
        x,
        &bundle.batch_mean,
        sample,
        l_prev,
        contraction_factor(&stats),
        config,
    )
}

/// As [`backtrack`] with the contraction factor supplied by the caller
/// (ζ = 2 for exact gradients).
#[allow(clippy::too_many_arguments)]
pub fn backtrack_with_zeta(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    g: &[f64],
    sample: &[usize],
    l_prev: f64,
    zeta: f64,
    config: &LineSearchConfig,
) -> Result<LineSearchResult> {
    if !(l_prev > 0.0 && l_prev.is_finite()) {
        return Err(Error::InvalidConfig(format!("previous L must be positive, got {l_prev}")));
    }
    config.validate()?;
    let f_current = objective::batch_value(spec, data, x, sample)?;
    let g_sq = vecops::norm_sq(g);
    let mut l = l_prev / zeta;
    let mut x_new = vec![0.0; x.len()];
    let mut backtracks = 0;
    loop {
        for ((xn, xi), gi) in x_new.iter_mut().zip(x).zip(g) {
            *xn = xi - gi / l;
        }
        let f_new = if vecops::all_finite(&x_new) {
            objective::batch_value(spec, data, &x_new, sample)?
        } else {
            f64::INFINITY
        };
        if f_new <= f_current - g_sq / (2.0 * l) {
            return Ok(LineSearchResult {
                l_k: l,
                alpha_k: 1.0 / l,
                zeta_k: zeta,
                backtracks,
                function_evals: backtracks + 2,
                x_new,
                f_new,
                f_current,
            });
        }
        if backtracks == config.max_backtracks {
            return Err(Error::LineSearchFailed {
                backtracks,
                last_l: l,
            });
        }
        l *= config.eta;
        backtracks += 1;
    }
}
