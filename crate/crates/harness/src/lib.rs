//! Benchmark harness for the adaptive sample-size optimizers: LIBSVM input,
//! synthetic data, experiment orchestration, CSV traces and SVG plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod libsvm;
pub mod plot;
pub mod synthetic;
pub mod trace;

pub use error::{HarnessError, Result};
pub use experiment::{DatasetSource, ExperimentSpec, ObjectiveChoice};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use plot::emit_plots;
pub use synthetic::{gen_synthetic, planted_weights};
pub use trace::{write_trace, TRACE_HEADER};
