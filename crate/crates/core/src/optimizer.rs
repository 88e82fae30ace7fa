//! Outer loop: sample, step (fixed steplength or line search), update the
//! sample size, record a trace row.
//!
//! At iteration `k` a fresh sample of the current size is drawn without
//! replacement, the step is taken along its mean gradient, and only then does
//! the controller look at the same batch to pick the size for iteration `k + 1`.

use crate::batchstats::{population_stats_with, DEGENERATE_PIVOT_NORM};
use crate::control::{
    controller_step, ControlConfig, ControlDecision, ControlState, DecisionBranch, TestKind, TestWhich,
};
use crate::error::{Error, Result};
use crate::linesearch::{backtrack, LineSearchConfig};
use crate::objective::{self, Dataset, GradientBundle, ObjectiveSpec};
use crate::oracle;
use crate::rng::{sample_without_replacement, RngStream, Stream};
use crate::vecops;

/// Iterates or batch values beyond this magnitude abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    LineSearch(LineSearchConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub control: ControlConfig,
    pub step: StepRule,
    /// Budget in effective passes over the data.
    pub max_epochs: f64,
    pub tol_grad_inf: f64,
    pub seed: u64,
    /// Starting point; zero when `None`.
    pub x0: Option<Vec<f64>>,
    /// Optimal value used for `f_error`; computed with [`oracle::reference_optimum`] when `None`.
    pub r_star: Option<f64>,
    pub rstar_tol: f64,
    /// Full-gradient diagnostics (and the tolerance check) run every this many iterations.
    pub diagnostics_every: usize,
    /// Optional cap on the number of iterations.
    pub max_iterations: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            control: ControlConfig::default(),
            step: StepRule::LineSearch(LineSearchConfig::default()),
            max_epochs: 100.0,
            tol_grad_inf: 1e-6,
            seed: 0,
            x0: None,
            r_star: None,
            rstar_tol: 1e-8,
            diagnostics_every: 1,
            max_iterations: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        self.control.validate(data.n_samples())?;
        match self.step {
            StepRule::Fixed(a) if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::InvalidConfig(format!("fixed steplength must be positive, got {a}")))
            }
            StepRule::LineSearch(ls) => ls.validate()?,
            _ => {}
        }
        if self.tol_grad_inf.is_nan() || self.tol_grad_inf <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_epochs.is_nan() || self.max_epochs <= 0.0 {
            return Err(Error::InvalidConfig("epoch budget must be positive".into()));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::InvalidConfig("diagnostics interval must be at least 1".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != data.n_features() {
                return Err(Error::DimensionMismatch {
                    expected: data.n_features(),
                    got: x0.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    EpochBudget,
    /// The full-batch gradient vanished.
    Stationary,
    IterationBudget,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::EpochBudget => "epoch_budget",
            Termination::Stationary => "stationary",
            Termination::IterationBudget => "iteration_budget",
        }
    }
}

/// One row of telemetry. Diagnostics that were not computed at this iteration are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub sample_size: usize,
    pub alpha: f64,
    /// NaN for fixed steplengths.
    pub l_k: f64,
    /// Cumulative, in effective passes over the data, after this iteration.
    pub eff_evals: f64,
    /// `R(x_k) − R*`.
    pub f_error: f64,
    pub grad_inf: f64,
    pub angle_deg: f64,
    pub beta: f64,
    pub ip_lhs: f64,
    pub ip_rhs: f64,
    pub orth_lhs: f64,
    pub orth_rhs: f64,
    pub branch: DecisionBranch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub x: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
    pub r_star: f64,
    pub eff_evals: f64,
    /// `R(x) − R*` at the returned iterate.
    pub f_error: f64,
    /// `‖∇R(x)‖∞` at the returned iterate.
    pub grad_inf: f64,
}

impl RunOutput {
    pub fn final_size(&self) -> Option<usize> {
        self.trace.last().map(|r| r.sample_size)
    }
}

/// What the observer of [`run_observed`] sees after each iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub k: usize,
    pub x: &'a [f64],
    pub sample: &'a [usize],
    pub bundle: &'a GradientBundle,
    pub decision: &'a ControlDecision,
    pub record: &'a TraceRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    Gradient,
    Function,
}

/// Work of one evaluation over a batch, in full passes. Both kinds weigh the same.
pub fn effective_evals_increment(_kind: EvalKind, batch_size: usize, n: usize) -> f64 {
    batch_size as f64 / n as f64
}

pub fn run(spec: &ObjectiveSpec, data: &Dataset, config: &RunConfig) -> Result<RunOutput> {
    run_observed(spec, data, config, |_| {})
}

fn exact_required_size(
    spec: &ObjectiveSpec,
    data: &Dataset,
    x: &[f64],
    full_g: &[f64],
    control: &ControlConfig,
) -> Result<usize> {
    let n = data.n_samples();
    if vecops::norm(full_g) <= DEGENERATE_PIVOT_NORM {
        return Ok(n);
    }
    let pop = population_stats_with(spec, data, x, full_g, full_g)?;
    let s = oracle::min_sizes_from(&pop, control.theta, control.nu);
    let raw = s.s_min_inner.max(s.s_min_orth);
    Ok(if raw < n as f64 { (raw.ceil() as usize).max(1) } else { n })
}

pub fn run_observed(
    spec: &ObjectiveSpec,
    data: &Dataset,
    config: &RunConfig,
    mut observer: impl FnMut(&IterationView<'_>),
) -> Result<RunOutput> {
    spec.validate()?;
    config.validate(data)?;
    let n = data.n_samples();
    let control = &config.control;
    let r_star = match config.r_star {
        Some(v) => v,
        None => oracle::reference_optimum(spec, data, config.rstar_tol)?.1,
    };

    let mut x = config.x0.clone().unwrap_or_else(|| vec![0.0; data.n_features()]);
    let mut rng = RngStream::new(config.seed, Stream::Sampling);
    let mut state = ControlState::new(control.s0, control.r);
    let mut l_prev = match config.step {
        StepRule::LineSearch(ls) => ls.l0,
        StepRule::Fixed(_) => f64::NAN,
    };
    let mut evals = 0.0;
    let mut trace = Vec::new();

    let termination = 'outer: {
        for k in 0.. {
            let diag = k % config.diagnostics_every == 0;
            let exact = control.test_kind == TestKind::ExactAugmented;
            let full_g = if diag || exact {
                Some(objective::full_gradient(spec, data, &x)?)
            } else {
                None
            };
            let grad_inf = full_g.as_deref().map_or(f64::NAN, vecops::norm_inf);
            if diag && grad_inf <= config.tol_grad_inf {
                break 'outer Termination::Tolerance;
            }
            if evals >= config.max_epochs {
                break 'outer Termination::EpochBudget;
            }
            if config.max_iterations.is_some_and(|cap| k >= cap) {
                break 'outer Termination::IterationBudget;
            }
            if exact {
                let g = full_g.as_deref().expect("computed in exact mode");
                state.grow_to(exact_required_size(spec, data, &x, g, control)?.min(n));
            }

            let m = state.current_size();
            let sample = sample_without_replacement(&mut rng, n, m)?;
            let bundle = objective::batch_gradient(spec, data, &x, &sample)?;
            evals += effective_evals_increment(EvalKind::Gradient, m, n);
            let g = &bundle.batch_mean;

            let degenerate = vecops::norm(g) <= DEGENERATE_PIVOT_NORM;
            let (x_new, alpha, l_k, f_batch) = if degenerate {
                (x.clone(), 0.0, l_prev, f64::NAN)
            } else {
                match config.step {
                    StepRule::Fixed(a) => {
                        let mut xn = x.clone();
                        vecops::axpy(-a, g, &mut xn);
                        (xn, a, f64::NAN, f64::NAN)
                    }
                    StepRule::LineSearch(ls) => {
                        let r = if m >= 2 {
                            backtrack(spec, data, &x, &bundle, &sample, l_prev, &ls)?
                        } else {
                            // No variance estimate from one sample: no contraction.
                            crate::linesearch::backtrack_with_zeta(spec, data, &x, g, &sample, l_prev, 1.0, &ls)?
                        };
                        evals += r.function_evals as f64 * effective_evals_increment(EvalKind::Function, m, n);
                        l_prev = r.l_k;
                        (r.x_new, r.alpha_k, r.l_k, r.f_new)
                    }
                }
            };

            let decision = if m >= 2 {
                controller_step(&mut state, &bundle, control, n)?
            } else {
                ControlDecision {
                    new_size: m,
                    tests_run: vec![],
                    used_running_average: false,
                    branch: DecisionBranch::Exact,
                    stats: None,
                }
            };

            let (f_error, angle_deg, beta) = match &full_g {
                Some(fg) if diag => {
                    let f = objective::full_value(spec, data, &x)? - r_star;
                    let angle = oracle::angle_degrees(g, fg).unwrap_or(f64::NAN);
                    let beta = if vecops::norm(fg) > DEGENERATE_PIVOT_NORM {
                        let pop = population_stats_with(spec, data, &x, fg, fg)?;
                        oracle::min_sizes_from(&pop, control.theta, control.nu).beta
                    } else {
                        f64::NAN
                    };
                    (f, angle, beta)
                }
                _ => (f64::NAN, f64::NAN, f64::NAN),
            };
            let margin = |w: &[TestWhich]| {
                decision
                    .tests_run
                    .iter()
                    .take(2)
                    .find(|t| w.contains(&t.which))
                    .map_or((f64::NAN, f64::NAN), |t| (t.lhs, t.rhs))
            };
            let (ip_lhs, ip_rhs) = margin(&[TestWhich::InnerProduct, TestWhich::Norm]);
            let (orth_lhs, orth_rhs) = margin(&[TestWhich::Orthogonality]);
            let record = TraceRecord {
                k,
                sample_size: m,
                alpha,
                l_k,
                eff_evals: evals,
                f_error,
                grad_inf,
                angle_deg,
                beta,
                ip_lhs,
                ip_rhs,
                orth_lhs,
                orth_rhs,
                branch: decision.branch,
            };
            observer(&IterationView {
                k,
                x: &x,
                sample: &sample,
                bundle: &bundle,
                decision: &decision,
                record: &record,
            });
            trace.push(record);

            if !vecops::all_finite(&x_new)
                || vecops::norm(&x_new) > DIVERGENCE_LIMIT
                || f_batch.abs() > DIVERGENCE_LIMIT
            {
                return Err(Error::Diverged { iteration: k });
            }
            x = x_new;
            if decision.converged() {
                break 'outer Termination::Stationary;
            }
        }
        unreachable!("loop only exits through break")
    };

    let f_error = objective::full_value(spec, data, &x)? - r_star;
    let grad_inf = vecops::norm_inf(&objective::full_gradient(spec, data, &x)?);
    Ok(RunOutput {
        x,
        trace,
        termination,
        r_star,
        eff_evals: evals,
        f_error,
        grad_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_increments() {
        assert_eq!(effective_evals_increment(EvalKind::Gradient, 10, 10), 1.0);
        assert_eq!(effective_evals_increment(EvalKind::Function, 5, 10), 0.5);
        assert_eq!(effective_evals_increment(EvalKind::Function, 128, 8124), 128.0 / 8124.0);
    }

    #[test]
    fn identical_centers_converge_in_one_fixed_step() {
        let d = Dataset::centers(&vec![vec![2.0, -1.0]; 6]).unwrap();
        let cfg = RunConfig {
            step: StepRule::Fixed(1.0),
            ..Default::default()
        };
        let out = run(&ObjectiveSpec::MeanSquareCenters, &d, &cfg).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.termination, Termination::Tolerance);
        assert_eq!(out.x, vec![2.0, -1.0]);
        assert!(out.r_star.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        let d = Dataset::centers(&vec![vec![2.0, -1.0]; 6]).unwrap();
        let q = ObjectiveSpec::MeanSquareCenters;
        let bad = RunConfig {
            step: StepRule::Fixed(0.0),
            ..Default::default()
        };
        assert!(run(&q, &d, &bad).is_err());
        let bad = RunConfig {
            x0: Some(vec![0.0]),
            ..Default::default()
        };
        assert!(matches!(run(&q, &d, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn huge_fixed_step_diverges_with_typed_error() {
        let d = Dataset::centers(&[vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.3, 0.3]]).unwrap();
        let cfg = RunConfig {
            step: StepRule::Fixed(1e30),
            x0: Some(vec![1e80, 1e80]),
            r_star: Some(0.0),
            ..Default::default()
        };
        assert!(matches!(
            run(&ObjectiveSpec::MeanSquareCenters, &d, &cfg),
            Err(Error::Diverged { .. })
        ));
    }
}
