use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rearr::corpus::{generate_corpus, write_corpus, CorpusSpec};
use rearr::formats::{read_grid, read_profile};
use rearr::report::{render, write_suite_outputs, Format, ReportFile, View, REPORT_JSON};
use rearr::suite::{run_suite, RecordContext, ReportRecord, Status};
use rearr::{parse_report, CliError, SuiteConfig, OUT_DIR_ENV};
use rearr_core::inequalities::DerivativeForm;
use rearr_core::{
    run_check, ConstantMode, GradientMode, GridFunction, GridGeometry, InequalityId,
    InequalityParams,
};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rearr",
    version,
    about = "Check rearrangement and Sobolev-type inequalities on sampled functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of grid functions.
    Corpus {
        /// Corpus spec (TOML); the built-in default corpus when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV, default_value = "rearr-out")]
        out: PathBuf,
    },
    /// Check one inequality on one function.
    Check(CheckArgs),
    /// Run a full suite and write its reports.
    Suite(SuiteArgs),
    /// Re-render the report of a suite run.
    Report {
        /// Suite output directory or a `report.json` file.
        #[arg(long = "in", env = OUT_DIR_ENV, default_value = "rearr-out")]
        input: PathBuf,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long, default_value = "full")]
        view: View,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    ineq: InequalityId,
    /// Grid function file (JSON); not needed for scalar sweeps.
    #[arg(long = "fn")]
    function: Option<PathBuf>,
    /// Profile file; the Euclidean Coulhon function when omitted.
    #[arg(long)]
    phi: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Defaults to the dimension of the grid.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "paper_constant")]
    mode: ConstantMode,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long, default_value = "metric_max")]
    gradient_mode: GradientMode,
    #[arg(long)]
    derivative_factor: Option<f64>,
    #[arg(long)]
    pointwise: bool,
    #[arg(long, default_value_t = 2.0)]
    chain_exponent: f64,
    /// Include the per-t trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SuiteArgs {
    /// Suite config (TOML); the built-in default suite when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    gradient_mode: Option<GradientMode>,
    #[arg(long)]
    constant_mode: Option<ConstantMode>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    points_per_decade: Option<u32>,
    /// Keep per-t traces (`--detail true|false`).
    #[arg(long)]
    detail: Option<bool>,
}

fn corpus(spec: Option<PathBuf>, out: PathBuf) -> Result<u8, CliError> {
    let spec = match spec {
        Some(path) => CorpusSpec::load(&path)?,
        None => CorpusSpec::default(),
    };
    let items = generate_corpus(&spec)?;
    write_corpus(&out, &spec, &items)?;
    eprintln!("wrote {} functions to {}", items.len(), out.display());
    Ok(EXIT_PASS)
}

fn check(a: CheckArgs) -> Result<u8, CliError> {
    let f = match &a.function {
        Some(path) => Some(read_grid(path)?),
        None if a.ineq.needs_function() => {
            return Err(CliError::Config(format!("{} needs --fn", a.ineq)))
        }
        None => None,
    };
    let phi = match &a.phi {
        Some(path) => Some(read_profile(path)?.phi()?),
        None => None,
    };
    let dim = f.as_ref().map_or(1, GridFunction::dim);
    let params = InequalityParams {
        p: a.p,
        n: a.n.unwrap_or(dim),
        constant_mode: a.mode,
        tolerance: a.tol,
        derivative_factor: a.derivative_factor,
        derivative_form: if a.pointwise {
            DerivativeForm::Pointwise
        } else {
            DerivativeForm::Integrated
        },
        gradient_mode: a.gradient_mode,
        chain_exponent: a.chain_exponent,
        ..InequalityParams::default()
    };
    let placeholder;
    let func = match &f {
        Some(f) => f,
        None => {
            placeholder = GridFunction::zeros(GridGeometry::new(1.0, vec![3])?);
            &placeholder
        }
    };
    let id = a
        .function
        .as_ref()
        .and_then(|p| p.file_stem())
        .map_or_else(|| "-".to_string(), |s| s.to_string_lossy().into_owned());
    let ctx = RecordContext {
        function_id: &id,
        grid: None,
        seed: None,
        gradient_mode: a.gradient_mode,
        constant_mode: a.mode,
        keep_trace: a.trace,
    };
    let report = run_check(a.ineq, func, phi.as_ref(), &params)?;
    let record = ReportRecord::from_report(&report, a.p, &ctx);
    let mut json = serde_json::to_vec_pretty(&record).expect("records serialize");
    json.push(b'\n');
    to_stdout(&json)?;
    Ok(if record.status == Status::Pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn suite(a: SuiteArgs) -> Result<u8, CliError> {
    let mut cfg = match &a.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(m) = a.gradient_mode {
        cfg.gradient_mode = m;
    }
    if let Some(m) = a.constant_mode {
        cfg.constant_mode = m;
    }
    if let Some(t) = a.tol {
        cfg.tolerance = t;
    }
    if let Some(p) = a.points_per_decade {
        cfg.points_per_decade = p;
    }
    if let Some(d) = a.detail {
        cfg.detail = d;
    }
    let out = a
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("rearr-out"));
    let (corpus, seed) = cfg.load_corpus()?;
    let result = run_suite(&cfg, &corpus, seed)?;
    let code = result.exit_code() as u8;
    write_suite_outputs(&out, &ReportFile::new(result))?;
    eprintln!("reports written to {}", out.display());
    Ok(code)
}

/// A closed pipe (`| head`) is not an error.
fn to_stdout(bytes: &[u8]) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::io(std::path::Path::new("<stdout>"), e))
        }
        _ => Ok(()),
    }
}

fn report(
    input: PathBuf,
    format: Format,
    view: View,
    out: Option<PathBuf>,
) -> Result<u8, CliError> {
    let path = if input.is_dir() {
        input.join(REPORT_JSON)
    } else {
        input
    };
    let file = parse_report(&path)?;
    let bytes = render(&file, format, view).map_err(|e| CliError::parse(&path, e))?;
    match out {
        Some(target) => std::fs::write(&target, bytes).map_err(|e| CliError::io(&target, e))?,
        None => to_stdout(&bytes)?,
    }
    Ok(file.result().exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Corpus { spec, out } => corpus(spec, out),
        Command::Check(a) => check(a),
        Command::Suite(a) => suite(a),
        Command::Report {
            input,
            format,
            view,
            out,
        } => report(input, format, view, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
