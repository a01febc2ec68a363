//! `qsim` — build, analyze, and run unitary quantum simulators for
//! stationary stochastic processes described by ε-machine spec files.
//!
//! Subcommands: `analyze`, `validate`, `fig2`, `surface`, `simulate`.
//! Exit codes: 0 success, 1 verification failure, 2 input error.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{
    curve_csv, curve_json, exit_code_for, surface_csv, surface_json, validation_text,
    AnalysisReport, Format,
};
use qsim_core::machine::EpsilonMachine;
use qsim_core::quantum::QuantumModel;
use qsim_core::simulate::{
    exact_distribution, init_simulator, tv_distance, Start, WordDistribution,
};
use qsim_core::spec_doc::parse_machine;
use qsim_core::sweep::{cq_curve, surface, GridSpec};
use qsim_core::QsimError;

/// Default seed when neither `--seed` nor `QSF_SEED` is given.
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(
    name = "qsim",
    version,
    about = "Unitary quantum simulators for stationary stochastic processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: stationary distribution, complexities, overlaps,
    /// verification residuals.
    Analyze(AnalyzeArgs),
    /// Structural validation of a machine-spec file.
    Validate(ValidateArgs),
    /// Staged-complexity curve of the upset-gambler process.
    Fig2(Fig2Args),
    /// Complexity surface over a (p, q) parameter grid.
    Surface(SurfaceArgs),
    /// Run the q-simulator and emit a symbol stream.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Machine-spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Verification tolerance for all residual checks.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Word-length cap for the Markov-order search.
    #[arg(long, default_value_t = 12)]
    markov_cap: usize,
    /// Minimality probe depth (defaults to twice the state count).
    #[arg(long)]
    probe_depth: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    probe_depth: Option<usize>,
}

#[derive(Args)]
struct Fig2Args {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// Largest encoding length L.
    #[arg(long)]
    lmax: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Grid as `pmin:pmax:n,qmin:qmax:n`.
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Number of symbols to emit.
    #[arg(long)]
    length: usize,
    /// Seed; falls back to the QSF_SEED environment variable, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Start state label; the stationary distribution when absent.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Fig2(args) => cmd_fig2(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<EpsilonMachine, QsimError> {
    let text = fs::read_to_string(path)
        .map_err(|e| QsimError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_machine(&text)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), QsimError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| QsimError::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn resolve_seed(arg: Option<u64>) -> Result<u64, QsimError> {
    if let Some(seed) = arg {
        return Ok(seed);
    }
    match std::env::var("QSF_SEED") {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            QsimError::InvalidParameter(format!("QSF_SEED `{text}` is not a valid seed"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, QsimError> {
    let machine = read_spec(&args.spec)?;
    let probe = args.probe_depth.unwrap_or(machine.default_probe_depth());
    let validation = machine.validate(probe);
    if !validation.passed() {
        return Err(QsimError::Validation(validation.describe(&machine)));
    }
    let markov = machine.markov_order_bound(args.markov_cap);
    let model = QuantumModel::build(machine)?;
    let report = AnalysisReport::build(&model, &validation, markov, args.tol);
    let format = match args.format {
        Some(OutputFormat::Csv) => Format::Csv,
        Some(OutputFormat::Json) => Format::Json,
        None => Format::Text,
    };
    let verified = report.verified;
    write_output(&args.out, &report.render(format))?;
    Ok(if verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, QsimError> {
    let machine = read_spec(&args.spec)?;
    let probe = args.probe_depth.unwrap_or(machine.default_probe_depth());
    let report = machine.validate(probe);
    print!("{}", validation_text(&machine, &report));
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_fig2(args: Fig2Args) -> Result<ExitCode, QsimError> {
    let rows = cq_curve(args.p, args.q, args.lmax)?;
    let content = match args.format {
        OutputFormat::Csv => curve_csv(&rows),
        OutputFormat::Json => curve_json(&rows),
    };
    write_output(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_surface(args: SurfaceArgs) -> Result<ExitCode, QsimError> {
    let grid = GridSpec::parse(&args.grid)?;
    let cells = surface(&grid)?;
    let content = match args.format {
        OutputFormat::Csv => surface_csv(&cells),
        OutputFormat::Json => surface_json(&cells),
    };
    write_output(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, QsimError> {
    let machine = read_spec(&args.spec)?;
    machine.validated()?;
    let seed = resolve_seed(args.seed)?;
    let start = match &args.start {
        Some(label) => Start::State(machine.state_index(label)?),
        None => Start::Stationary,
    };
    let model = QuantumModel::build(machine)?;
    let mut sim = init_simulator(&model, start, seed)?;
    let word = sim.run(args.length)?;

    let machine = model.machine();
    let mut content = machine.format_word(&word);
    content.push('\n');

    let mut counts = vec![0u64; machine.n_symbols()];
    for &x in &word {
        counts[x] += 1;
    }
    let freqs: Vec<String> = machine
        .alphabet()
        .iter()
        .zip(&counts)
        .map(|(label, &c)| format!("{label}: {:.6}", c as f64 / word.len().max(1) as f64))
        .collect();
    content.push_str(&format!("symbol frequencies: {}\n", freqs.join(", ")));

    if args.length >= 10_000 {
        let tv = sliding_window_tv(model.machine(), &word, 3)?;
        content.push_str(&format!("length-3 word TV distance vs exact: {tv:.6}\n"));
    }
    write_output(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

/// TV distance between sliding-window word frequencies of the emitted
/// stream and the exact stationary distribution.
fn sliding_window_tv(
    machine: &EpsilonMachine,
    word: &[usize],
    window: usize,
) -> Result<f64, QsimError> {
    let pi = machine.stationary_distribution()?;
    let exact = exact_distribution(machine, &pi, window)?;
    let a = machine.n_symbols();
    let n_cells = a.pow(window as u32);
    let mut counts = vec![0u64; n_cells];
    let n_windows = word.len() + 1 - window;
    for w in word.windows(window) {
        let idx = w.iter().fold(0usize, |acc, &x| acc * a + x);
        counts[idx] += 1;
    }
    let probs: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / n_windows as f64)
        .collect();
    let empirical = WordDistribution::from_dense(window, a, probs);
    Ok(tv_distance(&empirical, &exact))
}
