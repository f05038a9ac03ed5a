use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mur_cli::{
    check_any_optimal, error_report, mccm_report, offsets, problem::parse_list, region, region_csv, region_json, region_svg, sdp_dump,
    transport_report, CliError, CostSpec, ProblemFile, RunOptions,
};
use mur_core::parallel::with_threads;
use mur_core::{ErrorMeasure, RegionSample};

#[derive(Parser)]
#[command(name = "mur", version, about = "Measurement uncertainty regions via optimal transport and SDP")]
struct Cli {
    /// Worker threads for region tracing (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RegionArgs {
    /// Error measure: M, C or E (default: the file's, else all three).
    #[arg(long)]
    measure: Option<ErrorMeasure>,
    /// Number of weight vectors sampled on the simplex.
    #[arg(long)]
    samples: Option<usize>,
    /// Relative tolerance of the SDP solver.
    #[arg(long)]
    tol: Option<f64>,
    /// CSV output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON output path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Transport cost of `p` to `q`, primal and dual.
    Transport {
        /// discrete, discrete:<d>, quadratic:<v,...> or matrix:<row>;<row>
        #[arg(long)]
        cost: String,
        /// Source distribution, comma-separated.
        #[arg(long)]
        p: String,
        /// Target distribution, comma-separated.
        #[arg(long)]
        q: String,
    },
    /// Optimal pricing schemes of a cost.
    Mccm {
        #[arg(long)]
        cost: String,
    },
    /// Errors of the first observable of a problem file against the second.
    Error {
        problem: PathBuf,
        #[arg(long)]
        measure: Option<ErrorMeasure>,
    },
    /// Supporting hyperplane offsets at the file's weights.
    Offset {
        problem: PathBuf,
        #[arg(long)]
        measure: Option<ErrorMeasure>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Writes the SDP over joint measurements as plain text.
        #[arg(long)]
        sdp: Option<PathBuf>,
    },
    /// Boundary of an uncertainty region.
    Region {
        problem: PathBuf,
        #[command(flatten)]
        args: RegionArgs,
    },
    /// Builtin examples.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Spin-1 components with quadratic costs.
    Spin1 {
        #[command(flatten)]
        args: RegionArgs,
    },
    /// Position and momentum on Z_d with the discrete metric.
    Fourier {
        #[arg(long = "d")]
        d: usize,
        #[command(flatten)]
        args: RegionArgs,
    },
}

fn list_arg(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    parse_list(s).map_err(|e| CliError::Validation(format!("{flag}: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => write_file(p, text),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cost_arg(spec: &str, default_size: Option<usize>) -> Result<mur_core::CostFunction, CliError> {
    let (spec, size) = CostSpec::parse_arg(spec)?;
    let n = size
        .or(default_size)
        .or(spec.matrix.as_ref().map(Vec::len))
        .ok_or_else(|| CliError::Validation("--cost: discrete costs need an outcome count, e.g. discrete:3".into()))?;
    spec.build(n, None).map_err(|e| e.within("--cost"))
}

fn write_region(samples: &[RegionSample], out: Option<&Path>, svg: Option<&Path>, json: Option<&Path>) -> Result<(), CliError> {
    emit(&region_csv(samples), out)?;
    if let Some(p) = json {
        write_file(p, &region_json(samples))?;
    }
    if let Some(p) = svg {
        let plot = region_svg(samples).ok_or_else(|| CliError::Validation("--svg: plots need at least two observables".into()))?;
        write_file(p, &plot)?;
    }
    check_any_optimal(samples)
}

fn run_region(problem: &ProblemFile, args: &RegionArgs) -> Result<(), CliError> {
    let opts = RunOptions::with_tol(args.tol)?;
    let samples = region(problem, args.measure, args.samples, &opts)?;
    write_region(&samples, args.out.as_deref(), args.svg.as_deref(), args.json.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transport { cost, p, q } => {
            let (p, q) = (list_arg("--p", &p)?, list_arg("--q", &q)?);
            let c = cost_arg(&cost, Some(p.len()))?;
            print!("{}", transport_report(&c, &p, &q)?);
        }
        Command::Mccm { cost } => print!("{}", mccm_report(&cost_arg(&cost, None)?)?),
        Command::Error { problem, measure } => print!("{}", error_report(&ProblemFile::load(&problem)?, measure)?),
        Command::Offset { problem, measure, tol, out, json, sdp } => {
            let problem = ProblemFile::load(&problem)?;
            if let Some(p) = sdp {
                write_file(&p, &sdp_dump(&problem, measure)?)?;
            }
            let samples = offsets(&problem, measure, &RunOptions::with_tol(tol)?)?;
            write_region(&samples, out.as_deref(), None, json.as_deref())?;
        }
        Command::Region { problem, args } => run_region(&ProblemFile::load(&problem)?, &args)?,
        Command::Demo { which: Demo::Spin1 { args } } => run_region(&ProblemFile::spin1(None), &args)?,
        Command::Demo { which: Demo::Fourier { d, args } } => run_region(&ProblemFile::fourier(d, None), &args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = with_threads(threads, move || run(cli)).map_err(CliError::from).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mur: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
