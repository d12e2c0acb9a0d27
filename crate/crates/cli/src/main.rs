//! gaussfit command-line interface
//!
//! Fits a Gaussian to a sampled `x,y` CSV, runs the Monte Carlo comparison
//! of the five estimators, and writes the erf lookup table.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaussfit::bench::{run_bench_iters, run_bench_snr, BenchConfig, Execution, SnrGrid};
use gaussfit::erf::{build_erf_table, ErfTable, KGrid};
use gaussfit::initfit::InitConfig;
use gaussfit::io::{read_erf_table_csv, read_signal_csv, write_erf_table_csv, write_report_csv};
use gaussfit::{run_method, ClampPolicy, FitError, FitResult, MethodId, MethodSpec};
use serde_json::{Map, Value};

const EXIT_CONFIG: u8 = 2;
const EXIT_FIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gaussfit", version, about = "Log-domain Gaussian fitting and Monte Carlo comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one signal and write the result as a flat JSON object
    Fit(FitArgs),
    /// Monte Carlo MSE comparison of the estimators
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Write the erf(k/sqrt 2) lookup table
    Erftable(ErfTableArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input CSV with header `x,y` and uniformly spaced x
    #[arg(long)]
    input: PathBuf,

    /// Estimator: M1, M2, M3, M4 or M5
    #[arg(long)]
    method: MethodId,

    /// WLS iterations (default 2 for M2/M4, 12 for M5)
    #[arg(long)]
    iters: Option<usize>,

    /// Window length for the peak location average
    #[arg(long = "window-l", default_value_t = 3)]
    window_l: usize,

    /// Absolute floor applied before the logarithm (default 1e-6 of the largest sample)
    #[arg(long = "clamp-floor")]
    clamp_floor: Option<f64>,

    /// Precomputed erf table from `gaussfit erftable`
    #[arg(long = "erf-table")]
    erf_table: Option<PathBuf>,

    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// MSE against SNR
    Snr(SnrArgs),
    /// MSE against WLS iteration count at a fixed SNR
    Iters(ItersArgs),
}

#[derive(Args, Debug)]
struct CommonBench {
    /// Monte Carlo trials per sweep point
    #[arg(long, default_value_t = 2000)]
    trials: usize,

    /// Master seed; every trial seed derives from it
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Comma-separated estimators
    #[arg(long, value_delimiter = ',', default_value = "M1,M2,M3,M4,M5")]
    methods: Vec<MethodId>,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,

    /// Record mean wall-clock time per call (makes the CSV machine dependent)
    #[arg(long)]
    timing: bool,

    /// Run trials on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct SnrArgs {
    #[command(flatten)]
    common: CommonBench,

    /// SNR sweep A^2/noise power in dB as start:step:stop
    #[arg(long, default_value = "-10:0.5:20", allow_hyphen_values = true)]
    snr: String,
}

#[derive(Args, Debug)]
struct ItersArgs {
    #[command(flatten)]
    common: CommonBench,

    /// Fixed SNR in dB
    #[arg(long = "snr-db", default_value_t = 12.0, allow_hyphen_values = true)]
    snr_db: f64,

    /// Iteration counts as start:step:stop
    #[arg(long = "iter-sweep", default_value = "1:1:12")]
    iter_sweep: String,
}

#[derive(Args, Debug)]
struct ErfTableArgs {
    /// Smallest k
    #[arg(long, default_value_t = 0.1)]
    kmin: f64,

    /// Grid step in k
    #[arg(long, default_value_t = 0.01)]
    kstep: f64,

    /// Largest k
    #[arg(long, default_value_t = 10.0)]
    kmax: f64,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::config(format!("expected start:step:stop, got `{s}`")));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("`{part}` in `{s}` is not a number")))?;
    }
    Ok((out[0], out[1], out[2]))
}

fn parse_iter_sweep(s: &str) -> Result<Vec<usize>, Failure> {
    let (start, step, stop) = parse_triple(s)?;
    let whole = |v: f64| v >= 1.0 && v.fract() == 0.0;
    if !(whole(start) && whole(step) && whole(stop) && stop >= start) {
        return Err(Failure::config(format!("iteration sweep `{s}` must use positive integers")));
    }
    Ok((start as usize..=stop as usize).step_by(step as usize).collect())
}

fn bench_config(common: &CommonBench) -> BenchConfig {
    BenchConfig {
        trials: common.trials,
        master_seed: common.seed,
        methods: common.methods.clone(),
        timing: common.timing,
        execution: if common.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..Default::default()
    }
}

fn load_table(path: Option<&Path>) -> Result<ErfTable, Failure> {
    match path {
        Some(p) => read_erf_table_csv(p).map_err(Failure::config),
        None => build_erf_table(&KGrid::default()).map_err(Failure::config),
    }
}

fn fit_json(fit: &FitResult) -> Value {
    let mut obj = Map::new();
    obj.insert("A".into(), fit.params.amplitude.into());
    obj.insert("mu".into(), fit.params.mu.into());
    obj.insert("sigma".into(), fit.params.sigma.into());
    obj.insert("method".into(), fit.method.map(|m| m.as_str()).into());
    obj.insert("iterations_run".into(), fit.iterations_run.into());
    obj.insert("status".into(), fit.status.as_str().into());
    for (name, value) in fit.diagnostics.entries() {
        obj.insert(format!("diagnostics.{name}"), value.into());
    }
    Value::Object(obj)
}

fn failed_json(method: MethodId, error: &FitError) -> Value {
    let mut obj = Map::new();
    obj.insert("method".into(), method.as_str().into());
    obj.insert("status".into(), "failed".into());
    obj.insert("error".into(), error.to_string().into());
    Value::Object(obj)
}

fn emit(value: &Value, output: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::config)? + "\n";
    match output {
        Some(p) => fs::write(p, text).map_err(Failure::config),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_fit(args: &FitArgs) -> Result<(), Failure> {
    let signal = read_signal_csv(&args.input).map_err(Failure::config)?;
    let table = load_table(args.erf_table.as_deref())?;
    let mut spec = MethodSpec::new(args.method);
    spec.init = InitConfig {
        window_len: args.window_l,
        ..spec.init
    };
    if let Some(f) = args.clamp_floor {
        if !(f.is_finite() && f > 0.0) {
            return Err(Failure::config(FitError::InvalidClamp(f)));
        }
        spec.clamp = ClampPolicy::Absolute(f);
    }
    if let Some(k) = args.iters {
        match args.method {
            MethodId::M2 | MethodId::M4 => spec.stage2_iters = k,
            MethodId::M5 => spec.m5_iters = k,
            MethodId::M1 | MethodId::M3 => {
                return Err(Failure::config(format!("--iters does not apply to {}", args.method)))
            }
        }
    }
    spec.validate().map_err(Failure::config)?;
    match run_method(&spec, &signal, &table) {
        Ok(fit) => emit(&fit_json(&fit), args.output.as_deref()),
        Err(e) => {
            emit(&failed_json(args.method, &e), args.output.as_deref())?;
            Err(Failure {
                code: EXIT_FIT,
                message: e.to_string(),
            })
        }
    }
}

fn run_bench(cmd: &BenchCommand) -> Result<(), Failure> {
    let (report, out) = match cmd {
        BenchCommand::Snr(args) => {
            let (start, step, stop) = parse_triple(&args.snr)?;
            let config = BenchConfig {
                snr_grid: SnrGrid { start, step, stop },
                ..bench_config(&args.common)
            };
            (run_bench_snr(&config), &args.common.out)
        }
        BenchCommand::Iters(args) => {
            let config = BenchConfig {
                fixed_snr_db: args.snr_db,
                iter_sweep: parse_iter_sweep(&args.iter_sweep)?,
                ..bench_config(&args.common)
            };
            (run_bench_iters(&config), &args.common.out)
        }
    };
    let report = report.map_err(Failure::config)?;
    write_report_csv(&report, out).map_err(Failure::config)
}

fn run_erftable(args: &ErfTableArgs) -> Result<(), Failure> {
    let grid = KGrid::from_range(args.kmin, args.kstep, args.kmax).map_err(Failure::config)?;
    let table = build_erf_table(&grid).map_err(Failure::config)?;
    write_erf_table_csv(&table, &args.out).map_err(Failure::config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(args) => run_fit(args),
        Command::Bench(cmd) => run_bench(cmd),
        Command::Erftable(args) => run_erftable(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
