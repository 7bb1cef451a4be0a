//! Command-line front end: clustering, benchmarking, segmentation and
//! hedge-algebra inspection.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 a run
//! finished without converging (its output is still written).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::evaluation::{
    load_dataset, minmax_normalize, render_csv, run_benchmark, write_report, Algorithm, EngineParams,
    LabelColumn, ReportFormat,
};
use crate::hedge_algebra::{HedgeAlgebra, HedgeParams};
use crate::imaging::{load_image, save_image, segment, upscale_nearest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Exponent used by plain FCM when none is given.
pub const DEFAULT_FCM_M: f64 = 2.0;
pub const DEFAULT_M_MIN: f64 = 1.5;
pub const DEFAULT_M_MAX: f64 = 20.0;
pub const DEFAULT_RUNS: usize = 20;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "hamfcm", version, about = "Fuzzy c-means with a hedge-algebra driven exponent")]
pub struct Cli {
    /// TOML file of flag values keyed by long flag name; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a numeric table and emit the result document as JSON.
    Cluster(ClusterArgs),
    /// Run several seeds against labeled data and report accuracy.
    Benchmark(BenchmarkArgs),
    /// Cluster the pixels of a PNG or PPM image and repaint them.
    Segment(SegmentArgs),
    /// Hedge-algebra utilities.
    Ha {
        #[command(subcommand)]
        command: HaCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum HaCommand {
    /// Print the term table as CSV, sorted by semantic value.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoKind {
    Hamfcm,
    Fcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    Minmax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelArg {
    First,
    Last,
    None,
    Auto,
}

impl From<LabelArg> for LabelColumn {
    fn from(arg: LabelArg) -> Self {
        match arg {
            LabelArg::First => LabelColumn::First,
            LabelArg::Last => LabelColumn::Last,
            LabelArg::None => LabelColumn::None,
            LabelArg::Auto => LabelColumn::Auto,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct HaArgs {
    /// Measure of "small"; "big" gets the complement.
    #[arg(long)]
    pub fm_small: Option<f64>,
    #[arg(long)]
    pub mu_less: Option<f64>,
    #[arg(long)]
    pub mu_possibly: Option<f64>,
    #[arg(long)]
    pub mu_more: Option<f64>,
    #[arg(long)]
    pub mu_very: Option<f64>,
    /// Maximum number of hedges per term.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EngineArgs {
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Clustering engine [default: hamfcm].
    #[arg(long, value_enum)]
    pub algo: Option<AlgoKind>,
    /// Fixed exponent (FCM default 2; for hamfcm pins m-min = m-max).
    #[arg(long, conflicts_with_all = ["m_min", "m_max"])]
    pub m: Option<f64>,
    /// Lower end of the exponent range [default: 1.5].
    #[arg(long)]
    pub m_min: Option<f64>,
    /// Upper end of the exponent range [default: 20].
    #[arg(long)]
    pub m_max: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Convergence threshold on the largest centroid shift [default: 1e-6].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// [default: 300]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Iterations during which hedge-algebra parameters adapt [default: 20].
    #[arg(long)]
    pub ha_update_cap: Option<usize>,
    #[command(flatten)]
    pub ha: HaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Label column to strip before clustering [default: auto].
    #[arg(long, value_enum)]
    pub label_col: Option<LabelArg>,
    /// Feature scaling [default: none].
    #[arg(long, value_enum)]
    pub normalize: Option<Normalize>,
    /// Result document path; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub label_col: Option<LabelArg>,
    /// Number of seeds, counted up from --seed [default: 20].
    #[arg(long)]
    pub runs: Option<usize>,
    /// Feature scaling [default: none].
    #[arg(long, value_enum)]
    pub normalize: Option<Normalize>,
    /// Report path; `.json` selects JSON, anything else CSV. CSV on standard
    /// output when absent.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[arg(long, value_name = "FILE")]
    pub image: Option<PathBuf>,
    /// Output image (.png or .ppm).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Enlarge the 48x48 result back to the source size.
    #[arg(long)]
    pub upscale: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub ha: HaArgs,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// A failed invocation: message for standard error plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Run { source, .. } => exit_code(source),
        Error::Domain(_) | Error::Config(_) | Error::Shape(_) => EXIT_USAGE,
        Error::Initialization(_)
        | Error::Parse { .. }
        | Error::Format(_)
        | Error::Decode { .. }
        | Error::Io { .. } => EXIT_INPUT,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure { code: exit_code(&err), message: err.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

const CONFIG_KEYS: &[&str] = &[
    "input", "output", "report", "image", "out", "upscale", "label-col", "runs", "normalize",
    "clusters", "algo", "m", "m-min", "m-max", "seed", "epsilon", "max-iter", "ha-update-cap",
    "fm-small", "mu-less", "mu-possibly", "mu-more", "mu-very", "depth",
];

/// Values from the `--config` file. Keys use long flag names; underscores are
/// accepted in place of hyphens.
#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|f| Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let raw: toml::Table =
            text.parse().map_err(|e| Failure::input(format!("invalid config: {e}")))?;
        let mut table = toml::Table::new();
        for (key, value) in raw {
            let key = key.replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Failure::usage(format!("unknown config key '{key}'")));
            }
            table.insert(key, value);
        }
        Ok(ConfigFile { table })
    }

    fn wrong_type(key: &str, expected: &str) -> Failure {
        Failure::usage(format!("config key '{key}' must be {expected}"))
    }

    fn float(&self, key: &str) -> CliResult<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(Self::wrong_type(key, "a number")),
        }
    }

    fn integer(&self, key: &str) -> CliResult<Option<u64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
            Some(_) => Err(Self::wrong_type(key, "a non-negative integer")),
        }
    }

    fn count(&self, key: &str) -> CliResult<Option<usize>> {
        Ok(self.integer(key)?.map(|v| v as usize))
    }

    fn string(&self, key: &str) -> CliResult<Option<String>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Self::wrong_type(key, "a string")),
        }
    }

    fn boolean(&self, key: &str) -> CliResult<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Self::wrong_type(key, "true or false")),
        }
    }

    fn path(&self, key: &str) -> CliResult<Option<PathBuf>> {
        Ok(self.string(key)?.map(PathBuf::from))
    }

    fn choice<T: ValueEnum>(&self, key: &str) -> CliResult<Option<T>> {
        self.string(key)?
            .map(|s| T::from_str(&s, false).map_err(|_| Failure::usage(format!("config key '{key}': invalid value '{s}'"))))
            .transpose()
    }
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::usage(format!("missing required option --{flag}")))
}

pub fn resolve_ha_params(args: &HaArgs, cfg: &ConfigFile) -> CliResult<HedgeParams> {
    let mut params = HedgeParams::default();
    if let Some(fm_small) = args.fm_small.or(cfg.float("fm-small")?) {
        params.fm_small = fm_small;
        params.fm_big = 1.0 - fm_small;
    }
    let fields = [
        (args.mu_less, "mu-less", &mut params.mu_less),
        (args.mu_possibly, "mu-possibly", &mut params.mu_possibly),
        (args.mu_more, "mu-more", &mut params.mu_more),
        (args.mu_very, "mu-very", &mut params.mu_very),
    ];
    for (flag, key, slot) in fields {
        if let Some(v) = flag.or(cfg.float(key)?) {
            *slot = v;
        }
    }
    if let Some(depth) = args.depth.or(cfg.count("depth")?) {
        params.depth_bound = depth;
    }
    params.validate()?;
    Ok(params)
}

/// Merges flags over the config file. The exponent flags form one group:
/// if any of them is on the command line, the file's exponent keys are ignored.
pub fn resolve_engine(
    args: &EngineArgs,
    cfg: &ConfigFile,
    default_clusters: Option<usize>,
) -> CliResult<(EngineParams, u64)> {
    let clusters = required(args.clusters.or(cfg.count("clusters")?).or(default_clusters), "clusters")?;
    let algo = args.algo.or(cfg.choice("algo")?).unwrap_or(AlgoKind::Hamfcm);

    let (m, m_min, m_max) = if args.m.is_some() || args.m_min.is_some() || args.m_max.is_some() {
        (args.m, args.m_min, args.m_max)
    } else {
        let group = (cfg.float("m")?, cfg.float("m-min")?, cfg.float("m-max")?);
        if group.0.is_some() && (group.1.is_some() || group.2.is_some()) {
            return Err(Failure::usage("config sets both 'm' and 'm-min'/'m-max'; they are mutually exclusive"));
        }
        group
    };
    let algorithm = match algo {
        AlgoKind::Fcm => {
            if m_min.is_some() || m_max.is_some() {
                return Err(Failure::usage("--m-min/--m-max apply to hamfcm; use --m with fcm"));
            }
            Algorithm::Fcm { m: m.unwrap_or(DEFAULT_FCM_M) }
        }
        AlgoKind::Hamfcm => match m {
            Some(m) => Algorithm::Hamfcm { m_min: m, m_max: m },
            None => Algorithm::Hamfcm {
                m_min: m_min.unwrap_or(DEFAULT_M_MIN),
                m_max: m_max.unwrap_or(DEFAULT_M_MAX),
            },
        },
    };

    let mut engine = EngineParams::new(algorithm, clusters);
    if let Some(eps) = args.epsilon.or(cfg.float("epsilon")?) {
        engine.epsilon = eps;
    }
    if let Some(max_iter) = args.max_iter.or(cfg.count("max-iter")?) {
        engine.max_iter = max_iter;
    }
    if let Some(cap) = args.ha_update_cap.or(cfg.count("ha-update-cap")?) {
        engine.ha_update_cap = Some(cap);
    }
    engine.ha_params = resolve_ha_params(&args.ha, cfg)?;
    engine.config(0).validate(usize::MAX)?;
    let seed = args.seed.or(cfg.integer("seed")?).unwrap_or(DEFAULT_SEED);
    Ok((engine, seed))
}

fn emit(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, body).map_err(|e| Error::io(path, e).into()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::input(format!("cannot write to standard output: {e}")))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::input(e.to_string()))
}

fn scale(data: crate::clustering::Dataset, normalize: Normalize) -> crate::clustering::Dataset {
    match normalize {
        Normalize::Minmax => minmax_normalize(&data),
        Normalize::None => data,
    }
}

fn cmd_cluster(args: &ClusterArgs, cfg: &ConfigFile) -> CliResult<i32> {
    let input = required(args.input.clone().or(cfg.path("input")?), "input")?;
    let label_col = args.label_col.or(cfg.choice("label-col")?).unwrap_or(LabelArg::Auto);
    let normalize = args.normalize.or(cfg.choice("normalize")?).unwrap_or(Normalize::None);
    let output = args.output.clone().or(cfg.path("output")?);
    let (engine, seed) = resolve_engine(&args.engine, cfg, None)?;

    let loaded = load_dataset(&input, label_col.into(), b',')?;
    let data = scale(loaded.data, normalize);
    let result = engine.run(&data, seed)?;
    emit(output.as_deref(), &to_json(&result.to_document())?)?;
    if !result.converged {
        eprintln!("warning: no convergence after {} iterations", result.iterations);
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn cmd_benchmark(args: &BenchmarkArgs, cfg: &ConfigFile) -> CliResult<i32> {
    let input = required(args.input.clone().or(cfg.path("input")?), "input")?;
    let label_col = required(args.label_col.or(cfg.choice("label-col")?), "label-col")?;
    if matches!(label_col, LabelArg::None) {
        return Err(Failure::usage("benchmark needs a label column (first|last|auto)"));
    }
    let runs = args.runs.or(cfg.count("runs")?).unwrap_or(DEFAULT_RUNS);
    if runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    let normalize = args.normalize.or(cfg.choice("normalize")?).unwrap_or(Normalize::None);
    let report_path = args.report.clone().or(cfg.path("report")?);

    let loaded = load_dataset(&input, label_col.into(), b',')?;
    let mut dataset = loaded.into_labeled().map_err(|e| Failure::input(e.to_string()))?;
    dataset.data = scale(dataset.data, normalize);
    let (engine, first_seed) = resolve_engine(&args.engine, cfg, Some(dataset.num_classes()))?;
    let seeds: Vec<u64> = (0..runs as u64).map(|k| first_seed + k).collect();

    let report = run_benchmark(&dataset, &engine, &seeds)?;
    match &report_path {
        Some(path) => write_report(&report, path, ReportFormat::from_path(path))?,
        None => emit(None, &render_csv(&report))?,
    }
    eprintln!(
        "{} {}: best accuracy {:.4} (seed {}), mean {:.4} over {} runs",
        report.algorithm,
        report.parameters,
        report.best_accuracy,
        report.best_seed,
        report.mean_accuracy,
        report.runs.len()
    );
    let stalled = report.runs.iter().filter(|r| !r.converged).count();
    if stalled > 0 {
        eprintln!("warning: {stalled} of {} runs did not converge", report.runs.len());
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(serde::Serialize)]
struct SegmentSummary {
    width: usize,
    height: usize,
    palette: Vec<[u8; 3]>,
    iterations: usize,
    converged: bool,
}

fn cmd_segment(args: &SegmentArgs, cfg: &ConfigFile) -> CliResult<i32> {
    let image_path = required(args.image.clone().or(cfg.path("image")?), "image")?;
    let out = args.out.clone().or(cfg.path("out")?);
    let upscale = args.upscale || cfg.boolean("upscale")?.unwrap_or(false);
    let (engine, seed) = resolve_engine(&args.engine, cfg, None)?;

    let source = load_image(&image_path)?;
    let seg = segment(&source, &engine, seed)?;
    let picture = if upscale {
        upscale_nearest(&seg.image, source.width(), source.height())?
    } else {
        seg.image
    };
    if let Some(path) = &out {
        save_image(&picture, path)?;
    }
    let summary = SegmentSummary {
        width: picture.width(),
        height: picture.height(),
        palette: seg.palette,
        iterations: seg.result.iterations,
        converged: seg.result.converged,
    };
    emit(None, &to_json(&summary)?)?;
    if !seg.result.converged {
        eprintln!("warning: no convergence after {} iterations", seg.result.iterations);
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

/// Term table as CSV: term,depth,v,fm,interval_lo,interval_hi.
pub fn render_term_table(algebra: &HedgeAlgebra) -> String {
    let mut out = String::from("term,depth,v,fm,interval_lo,interval_hi\n");
    for t in algebra.terms() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.term,
            t.term.depth(),
            t.v,
            t.fm,
            t.lo,
            t.hi
        ));
    }
    out
}

fn cmd_inspect(args: &InspectArgs, cfg: &ConfigFile) -> CliResult<i32> {
    let params = resolve_ha_params(&args.ha, cfg)?;
    let out = args.out.clone().or(cfg.path("out")?);
    let algebra = HedgeAlgebra::new(params)?;
    emit(out.as_deref(), &render_term_table(&algebra))?;
    Ok(EXIT_OK)
}

fn dispatch_parsed(cli: &Cli) -> CliResult<i32> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Cluster(args) => cmd_cluster(args, &cfg),
        Command::Benchmark(args) => cmd_benchmark(args, &cfg),
        Command::Segment(args) => cmd_segment(args, &cfg),
        Command::Ha { command: HaCommand::Inspect(args) } => cmd_inspect(args, &cfg),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch_parsed(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    dispatch(std::env::args_os())
}
