//! Adaptive sample-size gradient methods for finite-sum problems.
//!
//! The sample used to estimate the gradient grows only when an inner product
//! test (the sampled direction must be a descent direction with high
//! probability) or an orthogonality test (the sampled direction must not be
//! nearly orthogonal to the true gradient) fails. A norm test baseline, a
//! variance-aware backtracking line search and population-level diagnostics
//! are included.

pub mod batchstats;
pub mod control;
pub mod error;
pub mod linesearch;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod vecops;

pub use batchstats::{compute_batch_stats, population_stats, BatchStats, PopulationStats};
pub use control::{ControlConfig, ControlDecision, ControlState, DecisionBranch, TestKind, TestOutcome};
pub use error::{Error, Result};
pub use linesearch::{LineSearchConfig, LineSearchResult};
pub use objective::{Dataset, GradientBundle, ObjectiveSpec};
pub use optimizer::{run, run_observed, IterationView, RunConfig, RunOutput, StepRule, Termination, TraceRecord};
pub use oracle::OracleReport;
pub use rng::{sample_without_replacement, RngStream, Stream};
