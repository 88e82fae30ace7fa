//! Sample-size control: the inner product, orthogonality and norm tests, the
//! running-average safeguard for the noisy regime, and the rules that pick a
//! larger sample when a test fails.

use std::collections::VecDeque;

use crate::batchstats::{compute_batch_stats, BatchStats, DEGENERATE_PIVOT_NORM};
use crate::error::{Error, Result};
use crate::objective::GradientBundle;
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    /// Inner product test together with the orthogonality test, on sample statistics.
    AugmentedInnerProduct,
    /// Norm test on sample statistics.
    Norm,
    /// Sizes chosen from population statistics so the exact inner product and
    /// orthogonality tests hold at every iterate. Needs the full dataset, so the
    /// optimizer sets the size; the controller only reports sample margins.
    ExactAugmented,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlConfig {
    pub theta: f64,
    pub nu: f64,
    pub r: usize,
    pub omega: f64,
    pub gamma: f64,
    pub s0: usize,
    pub test_kind: TestKind,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            theta: 0.9,
            nu: 5.84,
            r: 10,
            omega: 10.0,
            gamma: gamma_from(10, 10.0),
            s0: 2,
            test_kind: TestKind::AugmentedInnerProduct,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        if self.omega.is_nan() || self.omega < 1.0 {
            return bad(format!("omega must be >= 1, got {}", self.omega));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.s0 < 2 || self.s0 > n_samples {
            return bad(format!("s0 must lie in [2, {n_samples}], got {}", self.s0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestWhich {
    InnerProduct,
    Orthogonality,
    Norm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub which: TestWhich,
}

impl TestOutcome {
    fn new(lhs: f64, rhs: f64, which: TestWhich) -> Self {
        Self {
            passed: lhs <= rhs,
            lhs,
            rhs,
            which,
        }
    }
}

/// `var_inner / |S| <= θ² ‖p‖⁴`
pub fn inner_product_test(stats: &BatchStats, theta: f64) -> TestOutcome {
    TestOutcome::new(
        stats.var_inner / stats.sample_size as f64,
        theta * theta * stats.pivot_norm_sq * stats.pivot_norm_sq,
        TestWhich::InnerProduct,
    )
}

/// `var_orth / |S| <= ν² ‖p‖²`
pub fn orthogonality_test(stats: &BatchStats, nu: f64) -> TestOutcome {
    TestOutcome::new(
        stats.var_orth / stats.sample_size as f64,
        nu * nu * stats.pivot_norm_sq,
        TestWhich::Orthogonality,
    )
}

/// `var_grad / |S| <= θ² ‖p‖²`
pub fn norm_test(stats: &BatchStats, theta: f64) -> TestOutcome {
    TestOutcome::new(
        stats.var_grad / stats.sample_size as f64,
        theta * theta * stats.pivot_norm_sq,
        TestWhich::Norm,
    )
}

fn clamp_size(raw: f64, current: usize, n: usize) -> usize {
    let floor = (current + 1).min(n);
    if raw.is_nan() || raw >= n as f64 {
        return n;
    }
    (raw.ceil() as usize).clamp(floor, n)
}

/// Size predicted to satisfy both the inner product and orthogonality tests,
/// clamped to `[current + 1, n]`.
pub fn next_sample_size(stats: &BatchStats, theta: f64, nu: f64, current: usize, n: usize) -> usize {
    let p = stats.pivot_norm_sq;
    let raw_ip = stats.var_inner / (theta * theta * p * p);
    let raw_orth = stats.var_orth / (nu * nu * p);
    clamp_size(raw_ip.max(raw_orth), current, n)
}

/// Size predicted to satisfy the norm test, clamped to `[current + 1, n]`.
pub fn next_sample_size_norm(stats: &BatchStats, theta: f64, current: usize, n: usize) -> usize {
    clamp_size(stats.var_grad / (theta * theta * stats.pivot_norm_sq), current, n)
}

/// `γ = 1/√r + (1 − 1/√r)/ω`
pub fn gamma_from(r: usize, omega: f64) -> f64 {
    let s = 1.0 / (r as f64).sqrt();
    s + (1.0 - s) / omega
}

/// True when `‖g_avg‖ < γ ‖g_batch‖`, i.e. the batch gradient looks inflated by noise.
pub fn noisy_regime_check(g_avg: &[f64], g_batch: &[f64], gamma: f64) -> bool {
    vecops::norm(g_avg) < gamma * vecops::norm(g_batch)
}

/// Mutable controller state owned by one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlState {
    current_size: usize,
    window: usize,
    recent: VecDeque<(usize, Vec<f64>)>,
    stagnation_count: usize,
    iteration: usize,
}

impl ControlState {
    pub fn new(s0: usize, r: usize) -> Self {
        Self {
            current_size: s0,
            window: r,
            recent: VecDeque::with_capacity(r),
            stagnation_count: 0,
            iteration: 0,
        }
    }

    pub fn current_size(&self) -> usize {
        self.current_size
    }

    /// Iterations since the last size change.
    pub fn stagnation_count(&self) -> usize {
        self.stagnation_count
    }

    pub fn buffered(&self) -> usize {
        self.recent.len()
    }

    /// Iteration indices of the buffered gradients, oldest first.
    pub fn buffered_iterations(&self) -> Vec<usize> {
        self.recent.iter().map(|(k, _)| *k).collect()
    }

    pub fn push_gradient(&mut self, g: Vec<f64>) {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back((self.iteration, g));
    }

    /// Moves to a larger size; the gradient window and stagnation count restart.
    /// Smaller or equal sizes are ignored.
    pub fn grow_to(&mut self, size: usize) {
        if size > self.current_size {
            self.current_size = size;
            self.recent.clear();
            self.stagnation_count = 0;
        }
    }
}

/// Mean of the `r` most recent batch gradients.
pub fn running_average(state: &ControlState) -> Result<Vec<f64>> {
    if state.recent.len() < state.window {
        return Err(Error::NotReady {
            needed: state.window,
            have: state.recent.len(),
        });
    }
    let dim = state.recent[0].1.len();
    let mut sum = vecops::VecSum::new(dim);
    for (_, g) in &state.recent {
        sum.add(g);
    }
    let inv = 1.0 / state.window as f64;
    Ok(sum.finish().into_iter().map(|v| v * inv).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionBranch {
    /// Tests passed; size unchanged.
    Kept,
    /// A test failed on the batch-mean pivot; size from the batch statistics.
    Grown,
    /// The running average flagged noise but the tests passed with it as pivot.
    NoisyKept,
    /// The running average flagged noise and a test failed with it as pivot.
    NoisyGrown,
    /// Batch gradient vanished below the full sample; size doubled.
    Degenerate,
    /// Already at the full dataset; nothing to grow.
    FullBatch,
    /// Batch gradient vanished on the full dataset.
    Converged,
    /// Size is set from population statistics by the optimizer.
    Exact,
}

impl DecisionBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionBranch::Kept => "kept",
            DecisionBranch::Grown => "grown",
            DecisionBranch::NoisyKept => "noisy_kept",
            DecisionBranch::NoisyGrown => "noisy_grown",
            DecisionBranch::Degenerate => "degenerate",
            DecisionBranch::FullBatch => "full_batch",
            DecisionBranch::Converged => "converged",
            DecisionBranch::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            DecisionBranch::Kept,
            DecisionBranch::Grown,
            DecisionBranch::NoisyKept,
            DecisionBranch::NoisyGrown,
            DecisionBranch::Degenerate,
            DecisionBranch::FullBatch,
            DecisionBranch::Converged,
            DecisionBranch::Exact,
        ]
        .into_iter()
        .find(|b| b.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlDecision {
    pub new_size: usize,
    /// Outcomes on the batch-mean pivot, then (if evaluated) on the running average.
    pub tests_run: Vec<TestOutcome>,
    pub used_running_average: bool,
    pub branch: DecisionBranch,
    /// Batch statistics on the batch-mean pivot, when defined.
    pub stats: Option<BatchStats>,
}

impl ControlDecision {
    pub fn converged(&self) -> bool {
        self.branch == DecisionBranch::Converged
    }
}

fn run_tests(stats: &BatchStats, config: &ControlConfig) -> Vec<TestOutcome> {
    match config.test_kind {
        TestKind::Norm => vec![norm_test(stats, config.theta)],
        TestKind::AugmentedInnerProduct | TestKind::ExactAugmented => vec![
            inner_product_test(stats, config.theta),
            orthogonality_test(stats, config.nu),
        ],
    }
}

fn grown_size(stats: &BatchStats, config: &ControlConfig, current: usize, n: usize) -> usize {
    match config.test_kind {
        TestKind::Norm => next_sample_size_norm(stats, config.theta, current, n),
        _ => next_sample_size(stats, config.theta, config.nu, current, n),
    }
}

/// One controller update on the bundle drawn at the current iterate. Updates
/// `state` (size, gradient window, stagnation count) and returns what happened.
pub fn controller_step(
    state: &mut ControlState,
    bundle: &GradientBundle,
    config: &ControlConfig,
    n: usize,
) -> Result<ControlDecision> {
    let current = state.current_size;
    let g = &bundle.batch_mean;
    state.iteration += 1;

    let decide = |state: &mut ControlState, new_size: usize, branch, tests_run, used, stats| {
        state.grow_to(new_size);
        if state.current_size == current {
            state.stagnation_count += 1;
        }
        Ok(ControlDecision {
            new_size: state.current_size,
            tests_run,
            used_running_average: used,
            branch,
            stats,
        })
    };

    if vecops::norm(g) <= DEGENERATE_PIVOT_NORM {
        return if current >= n {
            decide(state, n, DecisionBranch::Converged, vec![], false, None)
        } else {
            decide(state, (2 * current).min(n), DecisionBranch::Degenerate, vec![], false, None)
        };
    }

    let stats = compute_batch_stats(bundle, g)?;
    let tests = run_tests(&stats, config);

    if config.test_kind == TestKind::ExactAugmented {
        return decide(state, current, DecisionBranch::Exact, tests, false, Some(stats));
    }
    if current >= n {
        return decide(state, n, DecisionBranch::FullBatch, tests, false, Some(stats));
    }
    if tests.iter().any(|t| !t.passed) {
        let new = grown_size(&stats, config, current, n);
        return decide(state, new, DecisionBranch::Grown, tests, false, Some(stats));
    }

    state.push_gradient(g.clone());
    if state.recent.len() < state.window {
        return decide(state, current, DecisionBranch::Kept, tests, false, Some(stats));
    }
    let g_avg = running_average(state)?;
    if !noisy_regime_check(&g_avg, g, config.gamma) {
        return decide(state, current, DecisionBranch::Kept, tests, false, Some(stats));
    }

    let mut all_tests = tests;
    if vecops::norm(&g_avg) <= DEGENERATE_PIVOT_NORM {
        let new = (2 * current).min(n);
        return decide(state, new, DecisionBranch::NoisyGrown, all_tests, true, Some(stats));
    }
    let avg_stats = compute_batch_stats(bundle, &g_avg)?;
    let avg_tests = run_tests(&avg_stats, config);
    let failed = avg_tests.iter().any(|t| !t.passed);
    all_tests.extend(avg_tests);
    if failed {
        let new = grown_size(&avg_stats, config, current, n);
        decide(state, new, DecisionBranch::NoisyGrown, all_tests, true, Some(stats))
    } else {
        decide(state, current, DecisionBranch::NoisyKept, all_tests, true, Some(stats))
    }
}
