//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use adasamp::control::gamma_from;
use adasamp::{ControlConfig, LineSearchConfig, RunConfig, RunOutput, StepRule, TestKind, TraceRecord};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{find_config_path, load_config_flags};
use crate::error::{HarnessError, Result};
use crate::experiment::{self, DatasetSource, ExperimentSpec, ObjectiveChoice};
use crate::plot::emit_plots;
use crate::trace::{self, fmt_f64, write_file, write_trace_file};

#[derive(Debug, Parser)]
#[command(name = "adasamp", version, about = "Adaptive sample-size gradient methods for finite-sum logistic regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One run; writes trace.csv.
    #[command(args_override_self = true)]
    Run(RunArgs),
    /// Fixed steplengths 2^-10 ... 2^15; writes sweep_summary.csv and best_trace.csv.
    #[command(args_override_self = true)]
    Sweep(CommonArgs),
    /// Inner product test against norm test on the same seed; writes trace_ip.csv and trace_norm.csv.
    #[command(args_override_self = true)]
    Compare(CommonArgs),
    /// Oracle diagnostics along stored iterates; writes oracle.csv.
    #[command(args_override_self = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write iterates.csv (iterates and batch gradients, input to `oracle`).
    #[arg(long)]
    pub save_iterates: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// iterates.csv written by `run --save-iterates`.
    #[arg(long)]
    pub iterates: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    /// Augmented inner product test (inner product + orthogonality).
    Ip,
    Norm,
    /// Inner product + orthogonality tests on exact population variances.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Logistic,
    /// Mean squared distance to the dataset rows (labels ignored).
    Centers,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// key=value file; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// LIBSVM data file.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub dataset: Option<PathBuf>,
    /// Synthetic data: sample count, dimension, label flip probability, seed.
    #[arg(long, value_name = "N,d,flip,seed")]
    pub synthetic: Option<String>,
    /// Dimension of LIBSVM data (default: largest index seen).
    #[arg(long)]
    pub n_features: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Logistic regularization (default 1/N).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub test: Option<TestArg>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Running-average window.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Noisy-regime threshold (default derived from r and omega).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial sample size.
    #[arg(long)]
    pub s0: Option<usize>,
    /// Fixed steplength.
    #[arg(long, conflicts_with = "line_search")]
    pub alpha: Option<f64>,
    /// Backtracking line search (the default when --alpha is absent).
    #[arg(long)]
    pub line_search: bool,
    #[arg(long)]
    pub l0: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<f64>,
    /// Stop when the full gradient's max-norm falls to this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Write SVG plots next to the CSV files.
    #[arg(long)]
    pub plots: bool,
    /// Gradient tolerance for the reference optimum.
    #[arg(long)]
    pub rstar_tol: Option<f64>,
    #[arg(long)]
    pub trace_diagnostics_every: Option<usize>,
}

impl CommonArgs {
    pub fn source(&self) -> Result<DatasetSource> {
        match (&self.dataset, &self.synthetic) {
            (Some(path), None) => Ok(DatasetSource::Libsvm {
                path: path.clone(),
                n_features: self.n_features,
            }),
            (None, Some(s)) => DatasetSource::parse_synthetic(s),
            _ => Err(HarnessError::Usage("give exactly one of --dataset or --synthetic".into())),
        }
    }

    pub fn objective(&self) -> ObjectiveChoice {
        match self.objective.unwrap_or(ObjectiveArg::Logistic) {
            ObjectiveArg::Logistic => ObjectiveChoice::Logistic { lambda: self.lambda },
            ObjectiveArg::Centers => ObjectiveChoice::Centers,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        let d = ControlConfig::default();
        let r = self.r.unwrap_or(d.r);
        let omega = self.omega.unwrap_or(d.omega);
        let control = ControlConfig {
            theta: self.theta.unwrap_or(d.theta),
            nu: self.nu.unwrap_or(d.nu),
            r,
            omega,
            gamma: self.gamma.unwrap_or_else(|| gamma_from(r, omega)),
            s0: self.s0.unwrap_or(d.s0),
            test_kind: match self.test.unwrap_or(TestArg::Ip) {
                TestArg::Ip => TestKind::AugmentedInnerProduct,
                TestArg::Norm => TestKind::Norm,
                TestArg::Exact => TestKind::ExactAugmented,
            },
        };
        let ls = LineSearchConfig::default();
        let step = match self.alpha {
            Some(a) => StepRule::Fixed(a),
            None => StepRule::LineSearch(LineSearchConfig {
                l0: self.l0.unwrap_or(ls.l0),
                eta: self.eta.unwrap_or(ls.eta),
                ..ls
            }),
        };
        let base = RunConfig::default();
        RunConfig {
            control,
            step,
            max_epochs: self.max_epochs.unwrap_or(base.max_epochs),
            tol_grad_inf: self.tol.unwrap_or(base.tol_grad_inf),
            seed: self.seed.unwrap_or(base.seed),
            x0: None,
            r_star: None,
            rstar_tol: self.rstar_tol.unwrap_or(base.rstar_tol),
            diagnostics_every: self.trace_diagnostics_every.unwrap_or(base.diagnostics_every),
            max_iterations: None,
        }
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        Ok(dir)
    }
}

/// Parses arguments (with `--config` entries spliced in ahead of the explicit
/// flags) and runs the command. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config_path(&args) else {
        return Ok(args);
    };
    let flags = load_config_flags(Path::new(&path))?;
    // Insert right after the subcommand name so that later explicit flags win.
    let pos = args
        .iter()
        .position(|a| matches!(a.to_str(), Some("run" | "sweep" | "compare" | "oracle")))
        .ok_or_else(|| HarnessError::Usage("missing subcommand".into()))?;
    let mut out = args[..=pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

pub fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run(a) => cmd_run(&a.common, a.save_iterates),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(&a.common, &a.iterates),
    }
}

fn summary(label: &str, out: &RunOutput) -> String {
    format!(
        "{label}: termination={} iterations={} eff_evals={} f_error={} grad_inf={} final_sample_size={}",
        out.termination.as_str(),
        out.trace.len(),
        fmt_f64(out.eff_evals),
        fmt_f64(out.f_error),
        fmt_f64(out.grad_inf),
        out.final_size().unwrap_or(0)
    )
}

fn plots(args: &CommonArgs, dir: &Path, traces: &[(&str, &[TraceRecord])]) -> Result<()> {
    if args.plots {
        emit_plots(dir, traces)?;
    }
    Ok(())
}

pub fn cmd_run(args: &CommonArgs, save_iterates: bool) -> Result<()> {
    let exp = ExperimentSpec {
        source: args.source()?,
        objective: args.objective(),
        runs: vec![("run".into(), args.run_config())],
        output_dir: args.out_dir()?,
        plots: args.plots,
    };
    let data = exp.source.load()?;
    let mut results = experiment::execute(&exp, &data, save_iterates)?;
    let res = results.remove(0);
    let out = res.output?;
    write_trace_file(&exp.output_dir.join("trace.csv"), &out.trace)?;
    if save_iterates {
        write_file(&exp.output_dir.join("iterates.csv"), |w| trace::write_iterates(&res.iterates, w))?;
    }
    plots(args, &exp.output_dir, &[("run", &out.trace)])?;
    println!("{}", summary("run", &out));
    Ok(())
}

pub fn cmd_sweep(args: &CommonArgs) -> Result<()> {
    if args.alpha.is_some() || args.line_search {
        return Err(HarnessError::Usage("sweep sets the steplength itself; drop --alpha/--line-search".into()));
    }
    let dir = args.out_dir()?;
    let data = args.source()?.load()?;
    let spec = args.objective().build(&data);
    let points = experiment::sweep(&spec, &data, &args.run_config())?;
    write_file(&dir.join("sweep_summary.csv"), |w| {
        writeln!(w, "alpha,f_error,eff_evals,termination")?;
        for p in &points {
            writeln!(w, "{},{},{},{}", fmt_f64(p.alpha), fmt_f64(p.f_error), fmt_f64(p.eff_evals), p.status)?;
        }
        Ok(())
    })?;
    let best = experiment::best_alpha(&points)
        .ok_or(HarnessError::SweepFailed)?;
    let p = &points[best];
    write_trace_file(&dir.join("best_trace.csv"), &p.trace)?;
    let label = format!("alpha={}", p.alpha);
    plots(args, &dir, &[(label.as_str(), &p.trace)])?;
    println!("best alpha={} f_error={} eff_evals={}", p.alpha, fmt_f64(p.f_error), fmt_f64(p.eff_evals));
    Ok(())
}

pub fn cmd_compare(args: &CommonArgs) -> Result<()> {
    if args.test.is_some() {
        return Err(HarnessError::Usage("compare runs both tests; drop --test".into()));
    }
    let dir = args.out_dir()?;
    let data = args.source()?.load()?;
    let spec = args.objective().build(&data);
    let (ip, norm) = experiment::compare(&spec, &data, &args.run_config())?;
    let (ip, norm) = (ip?, norm?);
    write_trace_file(&dir.join("trace_ip.csv"), &ip.trace)?;
    write_trace_file(&dir.join("trace_norm.csv"), &norm.trace)?;
    plots(args, &dir, &[("inner product", &ip.trace), ("norm", &norm.trace)])?;
    println!("{}", summary("ip", &ip));
    println!("{}", summary("norm", &norm));
    Ok(())
}

pub fn cmd_oracle(args: &CommonArgs, iterates: &Path) -> Result<()> {
    let dir = args.out_dir()?;
    let data = args.source()?.load()?;
    let spec = args.objective().build(&data);
    let rows = trace::read_iterates(iterates)?;
    let cfg = args.run_config();
    let reports = experiment::oracle_along(&spec, &data, &rows, cfg.control.theta, cfg.control.nu)?;
    write_file(&dir.join("oracle.csv"), |w| trace::write_oracle(&reports, w))?;
    println!("oracle: {} iterates", reports.len());
    Ok(())
}
