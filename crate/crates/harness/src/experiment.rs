//! Experiment orchestration: data sources, labelled runs, step sweeps,
//! test comparisons and oracle reports along stored iterates.

use std::collections::HashSet;
use std::path::PathBuf;

use adasamp::{
    oracle, run_observed, Dataset, ObjectiveSpec, OracleReport, RunConfig, RunOutput, StepRule, TestKind,
    TraceRecord,
};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::libsvm::parse_libsvm;
use crate::synthetic::gen_synthetic;
use crate::trace::IterateRow;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Libsvm { path: PathBuf, n_features: Option<usize> },
    Synthetic { n: usize, d: usize, flip_prob: f64, seed: u64 },
}

impl DatasetSource {
    /// Parses the `N,d,flip,seed` form of `--synthetic`.
    pub fn parse_synthetic(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || HarnessError::Usage(format!("--synthetic expects N,d,flip,seed, got {s:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(DatasetSource::Synthetic {
            n: parts[0].parse().map_err(|_| bad())?,
            d: parts[1].parse().map_err(|_| bad())?,
            flip_prob: parts[2].parse().map_err(|_| bad())?,
            seed: parts[3].parse().map_err(|_| bad())?,
        })
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Libsvm { path, n_features } => parse_libsvm(path, *n_features),
            DatasetSource::Synthetic { n, d, flip_prob, seed } => gen_synthetic(*n, *d, *flip_prob, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveChoice {
    /// Regularized logistic loss; λ defaults to 1/N.
    Logistic { lambda: Option<f64> },
    /// Mean squared distance to the dataset rows.
    Centers,
}

impl ObjectiveChoice {
    pub fn build(&self, data: &Dataset) -> ObjectiveSpec {
        match *self {
            ObjectiveChoice::Logistic { lambda: Some(lambda) } => ObjectiveSpec::LogisticL2 { lambda },
            ObjectiveChoice::Logistic { lambda: None } => ObjectiveSpec::logistic_for(data),
            ObjectiveChoice::Centers => ObjectiveSpec::MeanSquareCenters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DatasetSource,
    pub objective: ObjectiveChoice,
    pub runs: Vec<(String, RunConfig)>,
    pub output_dir: PathBuf,
    pub plots: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(HarnessError::Usage("experiment has no runs".into()));
        }
        let mut seen = HashSet::new();
        for (label, _) in &self.runs {
            if !seen.insert(label.as_str()) {
                return Err(HarnessError::Usage(format!("duplicate run label {label:?}")));
            }
        }
        Ok(())
    }
}

/// Fills in `R*` once for all runs that lack it, using the tightest requested tolerance.
pub fn share_reference_optimum(spec: &ObjectiveSpec, data: &Dataset, runs: &mut [(String, RunConfig)]) -> Result<()> {
    let missing: Vec<f64> = runs.iter().filter(|(_, c)| c.r_star.is_none()).map(|(_, c)| c.rstar_tol).collect();
    if missing.is_empty() {
        return Ok(());
    }
    let tol = missing.into_iter().fold(f64::INFINITY, f64::min);
    let (_, r_star) = oracle::reference_optimum(spec, data, tol)?;
    for (_, c) in runs.iter_mut() {
        c.r_star.get_or_insert(r_star);
    }
    Ok(())
}

#[derive(Debug)]
pub struct LabeledRun {
    pub label: String,
    pub output: std::result::Result<RunOutput, adasamp::Error>,
    /// Empty unless iterates were requested.
    pub iterates: Vec<IterateRow>,
}

pub fn run_one(spec: &ObjectiveSpec, data: &Dataset, config: &RunConfig, keep_iterates: bool) -> LabeledRun {
    let mut iterates = Vec::new();
    let output = run_observed(spec, data, config, |v| {
        if keep_iterates {
            iterates.push(IterateRow {
                k: v.k,
                sample_size: v.sample.len(),
                x: v.x.to_vec(),
                batch_gradient: v.bundle.batch_mean.clone(),
            });
        }
    });
    LabeledRun {
        label: String::new(),
        output,
        iterates,
    }
}

/// Runs every configuration of the experiment concurrently; results keep the input order.
pub fn execute(exp: &ExperimentSpec, data: &Dataset, keep_iterates: bool) -> Result<Vec<LabeledRun>> {
    exp.validate()?;
    let spec = exp.objective.build(data);
    let mut runs = exp.runs.clone();
    share_reference_optimum(&spec, data, &mut runs)?;
    Ok(runs
        .par_iter()
        .map(|(label, cfg)| LabeledRun {
            label: label.clone(),
            ..run_one(&spec, data, cfg, keep_iterates)
        })
        .collect())
}

/// `2^-10, 2^-9, ..., 2^15`.
pub fn sweep_grid() -> Vec<f64> {
    (-10..=15).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    /// Infinite when the run failed.
    pub f_error: f64,
    /// NaN when the run failed.
    pub eff_evals: f64,
    pub status: String,
    pub trace: Vec<TraceRecord>,
}

fn failure_status(e: &adasamp::Error) -> &'static str {
    match e {
        adasamp::Error::Diverged { .. } => "diverged",
        adasamp::Error::LineSearchFailed { .. } => "line_search_failed",
        _ => "failed",
    }
}

/// Fixed-step runs over [`sweep_grid`], concurrently. Every point uses the base seed.
pub fn sweep(spec: &ObjectiveSpec, data: &Dataset, base: &RunConfig) -> Result<Vec<SweepPoint>> {
    let mut base = base.clone();
    if base.r_star.is_none() {
        base.r_star = Some(oracle::reference_optimum(spec, data, base.rstar_tol)?.1);
    }
    sweep_grid()
        .into_par_iter()
        .map(|alpha| {
            let cfg = RunConfig {
                step: StepRule::Fixed(alpha),
                ..base.clone()
            };
            match adasamp::run(spec, data, &cfg) {
                Ok(out) => Ok(SweepPoint {
                    alpha,
                    f_error: out.f_error,
                    eff_evals: out.eff_evals,
                    status: out.termination.as_str().into(),
                    trace: out.trace,
                }),
                Err(e @ (adasamp::Error::Diverged { .. } | adasamp::Error::LineSearchFailed { .. })) => Ok(SweepPoint {
                    alpha,
                    f_error: f64::INFINITY,
                    eff_evals: f64::NAN,
                    status: failure_status(&e).into(),
                    trace: Vec::new(),
                }),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

/// Index of the point with the smallest final error; ties go to the larger step.
/// Failed points never win.
pub fn best_alpha(points: &[SweepPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.f_error.is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let q = &points[b];
                if p.f_error < q.f_error || (p.f_error == q.f_error && p.alpha > q.alpha) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Augmented inner product test and norm test on the same seed, concurrently.
pub fn compare(
    spec: &ObjectiveSpec,
    data: &Dataset,
    base: &RunConfig,
) -> Result<(std::result::Result<RunOutput, adasamp::Error>, std::result::Result<RunOutput, adasamp::Error>)> {
    let mut base = base.clone();
    if base.r_star.is_none() {
        base.r_star = Some(oracle::reference_optimum(spec, data, base.rstar_tol)?.1);
    }
    let with = |kind| {
        let mut c = base.clone();
        c.control.test_kind = kind;
        c
    };
    let (ip, norm) = (with(TestKind::AugmentedInnerProduct), with(TestKind::Norm));
    Ok(rayon::join(
        || adasamp::run(spec, data, &ip),
        || adasamp::run(spec, data, &norm),
    ))
}

/// Oracle report at each stored iterate, in input order.
pub fn oracle_along(
    spec: &ObjectiveSpec,
    data: &Dataset,
    rows: &[IterateRow],
    theta: f64,
    nu: f64,
) -> Result<Vec<(usize, usize, OracleReport)>> {
    let d = data.n_features();
    if let Some(r) = rows.iter().find(|r| r.x.len() != d) {
        return Err(HarnessError::Usage(format!(
            "iterate {} has dimension {}, dataset has {d}",
            r.k,
            r.x.len()
        )));
    }
    rows.par_iter()
        .map(|r| {
            let g = r.batch_gradient.iter().all(|v| v.is_finite()).then_some(r.batch_gradient.as_slice());
            let rep = oracle::oracle_report(spec, data, &r.x, g, r.sample_size, theta, nu)?;
            Ok((r.k, r.sample_size, rep))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(alpha: f64, f_error: f64) -> SweepPoint {
        SweepPoint {
            alpha,
            f_error,
            eff_evals: 1.0,
            status: "tolerance".into(),
            trace: vec![],
        }
    }

    #[test]
    fn grid_has_26_powers_of_two() {
        let g = sweep_grid();
        assert_eq!(g.len(), 26);
        assert_eq!(g[0], 1.0 / 1024.0);
        assert_eq!(g[25], 32768.0);
        assert!(g.windows(2).all(|w| w[1] == 2.0 * w[0]));
    }

    #[test]
    fn best_alpha_breaks_ties_upward_and_skips_failures() {
        let pts = vec![point(0.5, 1e-3), point(1.0, 1e-4), point(2.0, 1e-4), point(4.0, f64::INFINITY)];
        assert_eq!(best_alpha(&pts), Some(2));
        assert_eq!(best_alpha(&[point(1.0, f64::INFINITY)]), None);
    }

    #[test]
    fn synthetic_flag_parsing() {
        assert_eq!(
            DatasetSource::parse_synthetic("7000,50,0.1,3").unwrap(),
            DatasetSource::Synthetic {
                n: 7000,
                d: 50,
                flip_prob: 0.1,
                seed: 3
            }
        );
        assert!(DatasetSource::parse_synthetic("7000,50,0.1").is_err());
        assert!(DatasetSource::parse_synthetic("a,50,0.1,1").is_err());
    }

    #[test]
    fn experiment_labels_must_be_unique() {
        let exp = ExperimentSpec {
            source: DatasetSource::Synthetic {
                n: 10,
                d: 2,
                flip_prob: 0.0,
                seed: 0,
            },
            objective: ObjectiveChoice::Centers,
            runs: vec![("a".into(), RunConfig::default()), ("a".into(), RunConfig::default())],
            output_dir: ".".into(),
            plots: false,
        };
        assert!(exp.validate().is_err());
        let empty = ExperimentSpec { runs: vec![], ..exp };
        assert!(empty.validate().is_err());
    }
}
