//! Command-line front end: argument definitions and command handlers.

pub mod config;
pub mod data;
pub mod error;
pub mod model_file;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nphmm::diagnostics::{diagnose, DEFAULT_TOLERANCE};
use nphmm::em::{fit, Bandwidth, EmissionFamily, FitOptions};
use nphmm::kernel::{bandwidth_cv, default_bandwidth_grid};
use nphmm::simeval::{
    aligned_accuracy, rand_index, rows_to_csv, run_benchmark, simulate_hmm, simulate_regions, Decoder, Design,
};
use serde::Serialize;

use crate::config::{BenchConfigFile, DesignSpec, FamilySpec};
use crate::data::{format_labels, format_observations, read_labels, read_observations, write_atomic};
use crate::error::{CliError, CliResult, Context, EXIT_INPUT};
use crate::model_file::ModelFile;

pub const THREADS_ENV: &str = "NPHMM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nphmm", version, about = "Hidden Markov models with nonparametric emissions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to an observation file.
    Fit(FitArgs),
    /// Decode the hidden state path of an observation file.
    Decode(DecodeArgs),
    /// Simulate an observation file (and its true state path).
    Simulate(SimulateArgs),
    /// Score a predicted state path against the truth.
    Eval(EvalArgs),
    /// Check the identifiability conditions of a model.
    Diagnose(DiagnoseArgs),
    /// Run a simulation benchmark and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Observation file: one observation per line, comma or whitespace separated.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of hidden states.
    #[arg(long)]
    pub states: usize,
    /// Emission family: nb, np, np-reg, mixture or kernel.
    #[arg(long)]
    pub emission: String,
    /// Penalty weight for np-reg.
    #[arg(long, default_value_t = config::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Penalty exponent for np-reg (weight y^alpha).
    #[arg(long, default_value_t = config::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Largest count with its own emission probability (np, np-reg) [default: largest observed].
    #[arg(long)]
    pub y_max: Option<u64>,
    /// Number of mixture components [default for zero-inflated: states + 1].
    #[arg(long)]
    pub components: Option<usize>,
    /// Mixture component family: poisson, gaussian, binomial, triangular or zero-inflated.
    #[arg(long, default_value = "poisson")]
    pub component_family: String,
    /// Binomial trials [default: largest observed count].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Fixed kernel bandwidth.
    #[arg(long, conflicts_with = "bandwidth_cv")]
    pub bandwidth: Option<f64>,
    /// Choose the kernel bandwidth by leave-one-out likelihood (the default when --bandwidth is absent).
    #[arg(long)]
    pub bandwidth_cv: bool,
    /// Kernel: gaussian or epanechnikov.
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
    /// Weight-recursion steps per kernel M-step.
    #[arg(long, default_value_t = config::DEFAULT_INNER_ITERS)]
    pub inner_iters: usize,
    /// Use every stride-th observation as a kernel anchor.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Maximum EM iterations per start.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Relative objective improvement at which a start stops.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Number of EM starts.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Seed for every random choice.
    #[arg(long)]
    pub seed: u64,
    /// Output model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Fit report file (JSON) [default: <out stem>.report.json next to --out].
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Observation file.
    #[arg(long)]
    pub data: PathBuf,
    /// Decoding method: viterbi or map.
    #[arg(long, default_value = "viterbi")]
    pub method: String,
    /// Output file with one 1-based state label per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design file (JSON): {"preset": "desk"}, {"regions": [...], "distributions": [...]} or {"model": {...}, "n": N}.
    #[arg(long)]
    pub config: PathBuf,
    /// Simulation seed.
    #[arg(long)]
    pub seed: u64,
    /// Output observation file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output file for the true state path (1-based labels).
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted state labels, one per line.
    #[arg(long)]
    pub pred: PathBuf,
    /// True state labels, one per line.
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Singular values at or below this count as zero.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark file (JSON), e.g. {"preset": "desk", "replicates": 20, "seed": 1}.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV table.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitReportFile {
    pub family: String,
    pub states: usize,
    pub seed: u64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub best_start: usize,
    pub log_likelihood: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub n: usize,
    pub rand_index: f64,
    pub aligned_accuracy: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_model(path: &Path, flag: &str) -> CliResult<nphmm::Hmm> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{flag}: cannot read {}: {e}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{flag}: {} is not a model file: {e}", path.display())))?;
    file.to_model().ctx(flag)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, flag: &str) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{flag}: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{flag}: invalid {}: {e}", path.display())))
}

fn default_report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    out.with_file_name(format!("{stem}.report.json"))
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let obs = read_observations(&args.data, "--data")?;
    if args.states == 0 {
        return Err(CliError::input("--states: must be >= 1"));
    }
    let spec = FamilySpec {
        lambda: Some(args.lambda),
        alpha: Some(args.alpha),
        y_max: args.y_max,
        components: args.components,
        component_family: Some(args.component_family.clone()),
        trials: args.trials,
        bandwidth: args.bandwidth,
        bandwidth_cv: args.bandwidth_cv,
        kernel: Some(args.kernel.clone()),
        inner_iters: Some(args.inner_iters),
        stride: Some(args.stride),
        ..FamilySpec::named(&args.emission)
    };
    let max_count = obs.as_counts().and_then(|c| c.iter().copied().max());
    let mut family = spec.to_family(args.states, max_count)?;
    if args.max_iter == 0 {
        return Err(CliError::input("--max-iter: must be >= 1"));
    }
    if !(args.tol > 0.0) {
        return Err(CliError::input("--tol: must be > 0"));
    }
    if args.starts == 0 {
        return Err(CliError::input("--starts: must be >= 1"));
    }
    // Resolve a cross-validated bandwidth up front so the report records it.
    let mut bandwidth = None;
    if let EmissionFamily::Kernel { kernel, bandwidth: bw, .. } = &mut family {
        let w = match bw {
            Bandwidth::Fixed(w) => *w,
            Bandwidth::CrossValidated(grid) => {
                let grid = grid.clone().unwrap_or_else(|| default_bandwidth_grid(&obs));
                bandwidth_cv(&obs, *kernel, &grid).ctx("--bandwidth-cv")?
            }
        };
        *bw = Bandwidth::Fixed(w);
        bandwidth = Some(w);
    }
    let lambda = family.lambda();
    let opts = FitOptions { max_iter: args.max_iter, tol: args.tol, n_starts: args.starts, seed: args.seed, family };
    let report = fit(&obs, args.states, &opts).ctx("fit")?;
    let model_json = to_json(&ModelFile::from_model(&report.model));
    let report_json = to_json(&FitReportFile {
        family: args.emission.clone(),
        states: args.states,
        seed: args.seed,
        n: obs.len(),
        converged: report.converged,
        iterations: report.iterations,
        best_start: report.best_start_index,
        log_likelihood: report.log_likelihood,
        lambda,
        bandwidth,
        objective_trace: report.objective_trace,
    });
    let report_path = args.report.clone().unwrap_or_else(|| default_report_path(&args.out));
    write_atomic(&args.out, model_json.as_bytes(), "--out")?;
    write_atomic(&report_path, report_json.as_bytes(), "--report")?;
    Ok(())
}

pub fn cmd_decode(args: &DecodeArgs) -> CliResult<()> {
    let model = load_model(&args.model, "--model")?;
    let obs = read_observations(&args.data, "--data")?;
    let decoder = Decoder::from_name(&args.method).ctx("--method")?;
    let path = decoder.decode(&model, &obs).ctx("--data")?;
    write_atomic(&args.out, format_labels(&path).as_bytes(), "--out")
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec: DesignSpec = load_json(&args.config, "--config")?;
    let seq = match spec.to_design("--config")? {
        Design::Regions(scheme) => simulate_regions(&scheme, args.seed),
        Design::Hmm { model, n } => simulate_hmm(&model, n, args.seed).ctx("--config")?,
    };
    let data = format_observations(&seq.obs);
    let truth = seq.truth.as_deref().map(format_labels);
    write_atomic(&args.out, data.as_bytes(), "--out")?;
    if let (Some(path), Some(t)) = (&args.truth_out, truth) {
        write_atomic(path, t.as_bytes(), "--truth-out")?;
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<String> {
    let pred = read_labels(&args.pred, "--pred")?;
    let truth = read_labels(&args.truth, "--truth")?;
    let ri = rand_index(&truth, &pred).ctx("--pred")?;
    let acc = aligned_accuracy(&truth, &pred).ctx("--pred")?;
    Ok(to_json(&EvalReport { n: truth.len(), rand_index: ri, aligned_accuracy: acc }))
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> CliResult<String> {
    if !(args.tol > 0.0) {
        return Err(CliError::input("--tol: must be > 0"));
    }
    let model = load_model(&args.model, "--model")?;
    let json = to_json(&diagnose(&model, args.tol));
    if let Some(out) = &args.out {
        write_atomic(out, json.as_bytes(), "--out")?;
    }
    Ok(json)
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let file: BenchConfigFile = load_json(&args.config, "--config")?;
    let config = file.to_config("--config")?;
    let rows = run_benchmark(&config).ctx("--config")?;
    write_atomic(&args.out, rows_to_csv(&rows).as_bytes(), "--out")
}

/// Runs a parsed command; returns what should go to standard output.
pub fn run(cli: &Cli) -> CliResult<Option<String>> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a).map(|_| None),
        Command::Decode(a) => cmd_decode(a).map(|_| None),
        Command::Simulate(a) => cmd_simulate(a).map(|_| None),
        Command::Eval(a) => cmd_eval(a).map(Some),
        Command::Diagnose(a) => cmd_diagnose(a).map(Some),
        Command::Bench(a) => cmd_bench(a).map(|_| None),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV}: expected a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::input(format!("{THREADS_ENV}: {e}")))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(out) => {
            if let Some(text) = out {
                print!("{text}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
