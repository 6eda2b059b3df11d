//! Command-line front end. Exit codes: 0 exists / acm_exists, 3 not_exists /
//! not_found, 4 unknown, 2 usage or data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::acm::{learn_acm_linreg_exact, learn_acm_sampled, AcmConfig, AcmReport, AcmVerdict};
use crate::baselines::{drop_incomplete, mean_impute};
use crate::certain::linreg::DEFAULT_TOL;
use crate::certain::{
    check_certain_arccos_svm, check_certain_linear_svm, check_certain_linreg, check_certain_poly_svm,
    check_certain_rbf_svm, serialize_repair, CertainReport, KernelCertainReport, Verdict,
};
use crate::dataset::{
    load_csv, read_bounds_file, write_csv, BoundsPolicy, CompleteData, IncompleteDataset, LoadOptions, Repair, RepairBounds, Task,
    DEFAULT_NULL_MARKERS,
};
use crate::error::{Error, Result};
use crate::oracle::{oracle_certain, GridSpec, OracleModel, OracleVerdict};
use crate::report::{CommandEcho, DatasetProfile, ModelBlock, RunReport, Timings, ToolInfo, VerdictBlock};
use crate::trainers::{train_kernel_svm_dual, train_linear_svm, train_ols, DualOptions, KernelSpec, LinearLoss, SvmOptions};

pub const EXIT_EXISTS: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_EXISTS: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "certain", version, about = "Decide whether missing values need imputing before training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Name of the label column.
    #[arg(long, global = true, default_value = "y")]
    pub label: String,

    /// Defaults to regression for linreg and classification for the SVMs.
    #[arg(long, global = true, value_enum)]
    pub task: Option<TaskArg>,

    /// Classification label mapped to +1; every other label maps to -1.
    #[arg(long, global = true)]
    pub positive_label: Option<String>,

    /// Comma-separated strings read as missing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub null_markers: Option<Vec<String>>,

    /// SVM regularization constant.
    #[arg(long = "C", global = true, default_value_t = 1.0)]
    pub c: f64,

    #[arg(long, global = true, default_value_t = 1.0)]
    pub gamma: f64,

    #[arg(long, global = true, default_value_t = 2)]
    pub degree: u32,

    #[arg(long, global = true, default_value_t = 1.0)]
    pub coef0: f64,

    #[arg(long, global = true, default_value_t = 0.0)]
    pub epsilon: f64,

    #[arg(long, global = true, default_value_t = 64)]
    pub samples: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// JSON file mapping feature names to [lo, hi].
    #[arg(long, global = true)]
    pub bounds: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 21)]
    pub grid_points: usize,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Compact single-line JSON.
    #[arg(long, global = true, conflicts_with = "quiet")]
    pub json: bool,

    /// Print nothing on stdout; only the exit code reports the verdict.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Leave wall-clock timings out of the report, making it reproducible
    /// byte for byte.
    #[arg(long, global = true)]
    pub no_timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a certain model exists and return it.
    Check {
        #[arg(long, value_enum)]
        model: CheckModel,
        data: PathBuf,
    },
    /// Learn an approximately certain model.
    Acm {
        #[arg(long, value_enum)]
        model: AcmModel,
        /// Per-example decomposition (linreg only).
        #[arg(long)]
        exact: bool,
        data: PathBuf,
    },
    /// Brute-force ground truth over a grid of repairs. Small inputs only.
    Oracle {
        #[arg(long, value_enum)]
        model: CheckModel,
        data: PathBuf,
    },
    /// Write a complete CSV by mean imputation or by dropping incomplete rows.
    Impute {
        #[arg(long, value_enum)]
        strategy: Strategy,
        /// Output file (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
        data: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckModel {
    Linreg,
    Linsvm,
    PolySvm,
    RbfSvm,
    ArccosSvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AcmModel {
    Linreg,
    Linsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Mean,
    Drop,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, echo: Vec<String>) -> Result<i32> {
    match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be >= 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(cli, echo))
        }
        None => dispatch(cli, echo),
    }
}

fn dispatch(cli: &Cli, echo: Vec<String>) -> Result<i32> {
    match &cli.command {
        Command::Check { model, data } => cmd_check(cli, *model, data, echo),
        Command::Acm { model, exact, data } => cmd_acm(cli, *model, *exact, data, echo),
        Command::Oracle { model, data } => cmd_oracle(cli, *model, data, echo),
        Command::Impute { strategy, output, data } => cmd_impute(cli, *strategy, output.as_deref(), data),
    }
}

fn load(cli: &Cli, path: &Path, default_task: Task) -> Result<IncompleteDataset> {
    let task = match cli.task {
        Some(TaskArg::Regression) => Task::Regression,
        Some(TaskArg::Classification) => Task::Classification,
        None => default_task,
    };
    let mut opts = LoadOptions::new(cli.label.clone(), task);
    opts.positive_label = cli.positive_label.clone();
    opts.null_markers = match &cli.null_markers {
        Some(m) => m.clone(),
        None => DEFAULT_NULL_MARKERS.iter().map(|s| s.to_string()).collect(),
    };
    load_csv(path, &opts)
}

fn bounds_for(cli: &Cli, ds: &IncompleteDataset) -> Result<RepairBounds> {
    let overrides = cli.bounds.as_deref().map(read_bounds_file).transpose()?;
    RepairBounds::derive(ds, BoundsPolicy::ObservedMinMax, overrides.as_ref())
}

fn require_classification(ds: &IncompleteDataset, what: &str) -> Result<()> {
    if ds.task() != Task::Classification {
        return Err(Error::Config(format!("{what} needs --task classification")));
    }
    Ok(())
}

/// Data used to time one ordinary training run.
fn baseline_data(ds: &IncompleteDataset) -> CompleteData {
    mean_impute(ds).unwrap_or_else(|_| drop_incomplete(ds))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

fn time_training(ds: &IncompleteDataset, model: CheckModel, cli: &Cli) -> Result<f64> {
    let data = baseline_data(ds);
    if data.n() == 0 {
        return Ok(0.0);
    }
    let (_, ms) = timed(|| match model {
        CheckModel::Linreg => train_ols(&data.x, &data.y).map(|_| ()),
        CheckModel::Linsvm => train_linear_svm(&data.x, &data.y, &SvmOptions::new(cli.c)).map(|_| ()),
        _ => train_kernel_svm_dual(&data.x, &data.y, kernel_for(model, cli)?, &DualOptions::new(cli.c)).map(|_| ()),
    })?;
    Ok(ms)
}

fn kernel_for(model: CheckModel, cli: &Cli) -> Result<KernelSpec> {
    match model {
        CheckModel::PolySvm => KernelSpec::polynomial(cli.degree, cli.coef0),
        CheckModel::RbfSvm => KernelSpec::rbf(cli.gamma),
        CheckModel::ArccosSvm => Ok(KernelSpec::Arccos),
        CheckModel::Linreg | CheckModel::Linsvm => Ok(KernelSpec::Linear),
    }
}

fn default_task(model: CheckModel) -> Task {
    match model {
        CheckModel::Linreg => Task::Regression,
        _ => Task::Classification,
    }
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::Exists => EXIT_EXISTS,
        Verdict::NotExists => EXIT_NOT_EXISTS,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn emit(cli: &Cli, report: &RunReport) -> Result<()> {
    if cli.quiet {
        return Ok(());
    }
    let text = if cli.json {
        serde_json::to_string(report)?
    } else {
        serde_json::to_string_pretty(report)?
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn timings(cli: &Cli, train_ms: f64, check_ms: f64) -> Option<Timings> {
    (!cli.no_timings).then_some(Timings { train_ms, check_ms })
}

fn cmd_check(cli: &Cli, model: CheckModel, path: &Path, echo: Vec<String>) -> Result<i32> {
    let ds = load(cli, path, default_task(model))?;
    if model != CheckModel::Linreg {
        require_classification(&ds, "an SVM")?;
    }
    let (verdict, details, model_block, check_ms) = match model {
        CheckModel::Linreg | CheckModel::Linsvm => {
            let (r, ms): (CertainReport, f64) = timed(|| match model {
                CheckModel::Linreg => check_certain_linreg(&ds, DEFAULT_TOL),
                _ => check_certain_linear_svm(&ds, cli.c, &SvmOptions::new(cli.c)),
            })?;
            let block = r.model.as_ref().map_or(ModelBlock::None, ModelBlock::linear);
            let details = json!({ "diagnostics": to_value(&r.diagnostics)?, "witness": to_value(&r.witness)? });
            (r.verdict, details, block, ms)
        }
        _ => {
            let opts = DualOptions::new(cli.c);
            let (r, ms): (KernelCertainReport, f64) = match model {
                CheckModel::PolySvm => timed(|| check_certain_poly_svm(&ds, cli.degree, cli.coef0, &opts))?,
                CheckModel::RbfSvm => {
                    let bounds = bounds_for(cli, &ds)?;
                    timed(|| check_certain_rbf_svm(&ds, cli.gamma, &opts, &bounds))?
                }
                _ => {
                    let bounds = bounds_for(cli, &ds)?;
                    timed(|| check_certain_arccos_svm(&ds, &opts, Some(&bounds)))?
                }
            };
            let block = r.model.as_ref().map_or(ModelBlock::None, ModelBlock::dual);
            let details = json!({
                "kernel": to_value(&r.kernel)?,
                "lwb": r.lwb,
                "incomplete_examples": r.incomplete_examples,
                "diagnostics": to_value(&r.diagnostics)?,
            });
            (r.verdict, details, block, ms)
        }
    };
    let train_ms = time_training(&ds, model, cli)?;
    let report = RunReport {
        tool: ToolInfo::default(),
        command: CommandEcho {
            name: "check".into(),
            model: Some(value_name(&model)),
            args: echo,
        },
        dataset: DatasetProfile::of(&path.display().to_string(), &ds),
        verdict: VerdictBlock {
            value: verdict.as_str().into(),
            source: "checker".into(),
            details,
        },
        model: model_block,
        timings: timings(cli, train_ms, check_ms),
    };
    emit(cli, &report)?;
    Ok(exit_for(verdict))
}

fn cmd_acm(cli: &Cli, model: AcmModel, exact: bool, path: &Path, echo: Vec<String>) -> Result<i32> {
    let (check_model, loss) = match model {
        AcmModel::Linreg => (CheckModel::Linreg, LinearLoss::Ols),
        AcmModel::Linsvm => (CheckModel::Linsvm, LinearLoss::Svm { c: cli.c }),
    };
    if exact && model != AcmModel::Linreg {
        return Err(Error::Config("--exact is only available for --model linreg".into()));
    }
    let ds = load(cli, path, default_task(check_model))?;
    if model == AcmModel::Linsvm {
        require_classification(&ds, "an SVM")?;
    }
    let bounds = bounds_for(cli, &ds)?;
    let cfg = AcmConfig {
        epsilon: cli.epsilon,
        samples: cli.samples,
        seed: cli.seed,
        ..Default::default()
    };
    let (r, check_ms): (AcmReport, f64) = timed(|| {
        if exact {
            learn_acm_linreg_exact(&ds, &bounds, &cfg)
        } else {
            learn_acm_sampled(&ds, &bounds, loss, &cfg)
        }
    })?;
    let train_ms = time_training(&ds, check_model, cli)?;
    let value = match r.verdict {
        AcmVerdict::AcmExists => "acm_exists",
        AcmVerdict::NotFound => "not_found",
    };
    let mut details = to_value(&r)?;
    if let Value::Object(map) = &mut details {
        map.remove("model");
    }
    let report = RunReport {
        tool: ToolInfo::default(),
        command: CommandEcho {
            name: "acm".into(),
            model: Some(value_name(&model)),
            args: echo,
        },
        dataset: DatasetProfile::of(&path.display().to_string(), &ds),
        verdict: VerdictBlock {
            value: value.into(),
            source: if exact { "acm-exact" } else { "acm-sampled" }.into(),
            details,
        },
        model: ModelBlock::linear(&r.model),
        timings: timings(cli, train_ms, check_ms),
    };
    emit(cli, &report)?;
    Ok(match r.verdict {
        AcmVerdict::AcmExists => EXIT_EXISTS,
        AcmVerdict::NotFound => EXIT_NOT_EXISTS,
    })
}

#[derive(Serialize)]
struct OracleWitness<'a> {
    #[serde(serialize_with = "serialize_repair")]
    first: &'a Repair,
    #[serde(serialize_with = "serialize_repair")]
    worst: &'a Repair,
}

fn cmd_oracle(cli: &Cli, model: CheckModel, path: &Path, echo: Vec<String>) -> Result<i32> {
    let ds = load(cli, path, default_task(model))?;
    if model != CheckModel::Linreg {
        require_classification(&ds, "an SVM")?;
    }
    let oracle_model = match model {
        CheckModel::Linreg => OracleModel::Linear(LinearLoss::Ols),
        CheckModel::Linsvm => OracleModel::Linear(LinearLoss::Svm { c: cli.c }),
        _ => OracleModel::Kernel {
            kernel: kernel_for(model, cli)?,
            c: cli.c,
        },
    };
    let grid = GridSpec {
        points_per_cell: cli.grid_points,
        bounds: bounds_for(cli, &ds)?,
    };
    let (v, check_ms): (OracleVerdict, f64) = timed(|| oracle_certain(&ds, oracle_model, &grid, oracle_model.same_optimum_tol()))?;
    let train_ms = time_training(&ds, model, cli)?;
    let mut details = to_value(&v)?;
    if let (Value::Object(map), Some((first, worst))) = (&mut details, &v.witness) {
        map.insert("witness".into(), to_value(&OracleWitness { first, worst })?);
    }
    let verdict = if v.exists { Verdict::Exists } else { Verdict::NotExists };
    let report = RunReport {
        tool: ToolInfo::default(),
        command: CommandEcho {
            name: "oracle".into(),
            model: Some(value_name(&model)),
            args: echo,
        },
        dataset: DatasetProfile::of(&path.display().to_string(), &ds),
        verdict: VerdictBlock {
            value: verdict.as_str().into(),
            source: "grid-oracle".into(),
            details,
        },
        model: ModelBlock::None,
        timings: timings(cli, train_ms, check_ms),
    };
    emit(cli, &report)?;
    Ok(exit_for(verdict))
}

fn cmd_impute(cli: &Cli, strategy: Strategy, output: Option<&Path>, path: &Path) -> Result<i32> {
    let ds = load(cli, path, Task::Regression)?;
    let data = match strategy {
        Strategy::Mean => mean_impute(&ds)?,
        Strategy::Drop => drop_incomplete(&ds),
    };
    match output {
        Some(out) => {
            let file = File::create(out).map_err(|source| Error::Io {
                path: out.to_path_buf(),
                source,
            })?;
            write_csv(&data, &cli.label, file)?;
        }
        None => write_csv(&data, &cli.label, std::io::stdout().lock())?,
    }
    Ok(EXIT_EXISTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_check_flags() {
        let cli = Cli::try_parse_from(["certain", "check", "--model", "rbf-svm", "d.csv", "--C", "10", "--gamma", "0.5"]).unwrap();
        assert_eq!(cli.c, 10.0);
        assert_eq!(cli.gamma, 0.5);
        assert!(matches!(cli.command, Command::Check { model: CheckModel::RbfSvm, .. }));
        assert_eq!(cli.seed, 0);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["certain", "check", "--model", "linreg", "x.csv", "--frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["certain", "check", "--model", "linreg", "/nonexistent/x.csv"]), EXIT_USAGE);
    }
}
