//! `nested-search`: running-time sweeps, partition optimization, CSP
//! instance generation and census, and small-instance simulation.
//!
//! Exit codes: 0 success, 2 invalid input, 3 instance too large, 1 anything else.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nested_search::complexity::{optimize_x, OptimizeConfig};
use nested_search::csp::{generate, CspInstance};
use nested_search::dynamics::{run_nested_search_with, STAGE2_CALIBRATION};
use nested_search::report::{
    evaluate, fit_scaling, parse_grid, plot_script, run_sweep, write_csv, ModelParams, RunRecord,
    SweepSpec,
};
use nested_search::schedule::AccuracyTarget;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "nested-search",
    version,
    about = "Nested adiabatic search: running times, sweeps and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stage-I time, stage-II iterations and total running time at one model point.
    Time {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Running time over a grid of one parameter, others fixed.
    Sweep {
        /// Parameter to vary: x, alpha, n, N (= 2^n) or k.
        #[arg(long, default_value = "x")]
        vary: String,
        /// Comma list `a,b,c` or inclusive range `lo:hi:count`.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fits log2 T against n; the slope is the exponent of N.
    Scaling {
        /// Values of n, as for `sweep --grid`.
        #[arg(long, default_value = "16:40:7")]
        grid: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partition fraction x minimizing the running time.
    Optimize {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Writes a seeded random CSP instance as JSON.
    Generate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive solution census of an instance.
    Census {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Census, timing and two-stage dynamics of an instance.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Stage I runs for this multiple of its time bound.
        #[arg(long, default_value_t = 1.0)]
        time_factor: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emits a matplotlib script that plots a sweep CSV.
    PlotScript {
        /// Sweep CSV the script reads by default.
        #[arg(long, default_value = "sweep.csv")]
        csv: String,
        /// Column for the horizontal axis.
        #[arg(long, default_value = "x")]
        column: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Serialize)]
struct ModelArgs {
    /// Number of variables.
    #[arg(long, default_value_t = 32)]
    n: u32,
    /// Constraint arity.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Constrainedness.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Fraction of variables in subset A.
    #[arg(long, default_value_t = 0.5)]
    x: f64,
    /// Adiabatic accuracy.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Relative tolerance of the stage-I quadrature.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            n: self.n,
            k: self.k,
            alpha: self.alpha,
            x: self.x,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Read the instance from this file instead of generating one.
    #[arg(long, conflicts_with_all = ["n", "k", "alpha", "x", "seed"])]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    x: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<CspInstance, nested_search::Error> {
        match &self.instance {
            Some(path) => CspInstance::read(path),
            None => generate(self.n, self.k, self.alpha, self.x, self.seed),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format; csv for sweeps and scaling, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Debug)]
enum CliError {
    Core(nested_search::Error),
    Io(PathBuf, io::Error),
}

impl From<nested_search::Error> for CliError {
    fn from(e: nested_search::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(nested_search::Error::TooLarge { .. }) => 3,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(nested_search::Error::Format(_) | nested_search::Error::Json(_)) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e)),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(nested_search::Error::from)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(PathBuf::from("<buffer>"), e.into_error()))
}

fn record<I: Serialize, O: Serialize>(
    command: &str,
    inputs: &I,
    outputs: &O,
    seed: Option<u64>,
) -> Result<Vec<u8>, CliError> {
    Ok(RunRecord::new(command, inputs, outputs, seed)?
        .to_json()?
        .into_bytes())
}

#[derive(Serialize)]
struct SweepInputs<'a> {
    vary: &'a str,
    grid: &'a [f64],
    #[serde(flatten)]
    fixed: ModelParams,
    epsilon: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct OptimumRow {
    n: u32,
    k: u32,
    alpha: f64,
    epsilon: f64,
    x_opt: f64,
    #[serde(rename = "log2_T")]
    log2_t: f64,
    stage1_time: f64,
    iterations: u64,
}

#[derive(Serialize)]
struct CensusRow {
    n: u32,
    k: u32,
    seed: u64,
    n_a: u32,
    n_b: u32,
    m_a: u64,
    m_b: u64,
    m_ab: u64,
    m_a_s: u64,
    m_a_ns: u64,
    m_b_s: u64,
    m_b_ns: u64,
    rectangular: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Time { model, output } => {
            let row = evaluate(&model.params(), model.epsilon, model.tolerance)?;
            let bytes = match output.format_or(Format::Json) {
                Format::Csv => csv_bytes(&[&row])?,
                Format::Json => record("time", &model, &row, None)?,
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::Sweep {
            vary,
            grid,
            model,
            output,
        } => {
            let spec = SweepSpec {
                varying: vary.parse()?,
                grid: parse_grid(&grid)?,
                fixed: model.params(),
                epsilon: model.epsilon,
                tolerance: model.tolerance,
            };
            let rows = run_sweep(&spec)?;
            let bytes = match output.format_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&rows, &mut buf)?;
                    buf
                }
                Format::Json => {
                    let inputs = SweepInputs {
                        vary: &vary,
                        grid: &spec.grid,
                        fixed: spec.fixed,
                        epsilon: spec.epsilon,
                        tolerance: spec.tolerance,
                    };
                    record("sweep", &inputs, &rows, None)?
                }
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::Scaling {
            grid,
            model,
            output,
        } => {
            let ns = parse_grid(&grid)?;
            let fit = fit_scaling(
                model.k,
                model.alpha,
                model.x,
                &ns,
                model.epsilon,
                model.tolerance,
            )?;
            eprintln!(
                "slope {:.6} (rms residual {:.3e}); approximate slope {:.6}; predicted exponent {:.6}",
                fit.slope, fit.residual, fit.approx_slope, fit.predicted_exponent
            );
            let bytes = match output.format_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&fit.rows, &mut buf)?;
                    buf
                }
                Format::Json => {
                    let inputs = SweepInputs {
                        vary: "n",
                        grid: &ns,
                        fixed: model.params(),
                        epsilon: model.epsilon,
                        tolerance: model.tolerance,
                    };
                    record("scaling", &inputs, &fit, None)?
                }
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::Optimize { model, output } => {
            let target = AccuracyTarget::new(model.epsilon)?;
            let opt = optimize_x(
                model.n,
                model.k,
                model.alpha,
                OptimizeConfig::default(),
                target,
            )?;
            let row = OptimumRow {
                n: model.n,
                k: model.k,
                alpha: model.alpha,
                epsilon: model.epsilon,
                x_opt: opt.x,
                log2_t: opt.log2_time,
                stage1_time: opt.budget.stage1_time,
                iterations: opt.budget.iterations,
            };
            let bytes = match output.format_or(Format::Json) {
                Format::Csv => csv_bytes(&[&row])?,
                Format::Json => record("optimize", &model, &row, None)?,
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::Generate { instance, out } => {
            let inst = instance.load()?;
            emit(out.as_deref(), inst.to_json()?.as_bytes())
        }
        Command::Census { instance, output } => {
            let inst = instance.load()?;
            let census = inst.census()?;
            let row = CensusRow {
                n: inst.n(),
                k: inst.k(),
                seed: inst.seed(),
                n_a: census.n_a,
                n_b: census.n_b,
                m_a: census.m_a,
                m_b: census.m_b,
                m_ab: census.m_ab,
                m_a_s: census.m_a_s,
                m_a_ns: census.m_a_ns,
                m_b_s: census.m_b_s,
                m_b_ns: census.m_b_ns,
                rectangular: census.rectangular,
            };
            let bytes = match output.format_or(Format::Json) {
                Format::Csv => csv_bytes(&[&row])?,
                Format::Json => {
                    let inputs = serde_json::from_str::<serde_json::Value>(&inst.to_json()?)?;
                    record("census", &inputs, &census, Some(inst.seed()))?
                }
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::Simulate {
            instance,
            epsilon,
            time_factor,
            output,
        } => {
            if !(time_factor > 0.0 && time_factor.is_finite()) {
                return Err(nested_search::Error::InvalidParameter {
                    name: "time-factor",
                    reason: format!("{time_factor} must be positive"),
                }
                .into());
            }
            let inst = instance.load()?;
            let target = AccuracyTarget::new(epsilon)?;
            let report = run_nested_search_with(&inst, target, time_factor, STAGE2_CALIBRATION)?;
            let bytes = match output.format_or(Format::Json) {
                Format::Csv => {
                    return Err(nested_search::Error::InvalidParameter {
                        name: "format",
                        reason: "simulate writes json only".into(),
                    }
                    .into())
                }
                Format::Json => {
                    let mut inputs = serde_json::from_str::<serde_json::Value>(&inst.to_json()?)?;
                    inputs["epsilon"] = epsilon.into();
                    inputs["time_factor"] = time_factor.into();
                    record("simulate", &inputs, &report, Some(inst.seed()))?
                }
            };
            emit(output.out.as_deref(), &bytes)
        }
        Command::PlotScript { csv, column, out } => {
            emit(out.as_deref(), plot_script(&csv, &column).as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
