use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sdg::solver::{InitialGuess, NewtonConfig};
use sdg::{ManufacturedSolution, StandardCoefficient, StopNorm};
use sdg_cli::{emit, plot_data, run_study, CliError, Format, StudyConfig};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Convergence study for the staggered DG discretization of
/// -div(rho(grad u) grad u) = f on the unit square.
#[derive(Debug, Parser)]
#[command(name = "sdg", version)]
struct Args {
    /// Exact solution: u1 or u2.
    #[arg(long, default_value = "u1")]
    solution: ManufacturedSolution,

    /// Coefficient: rho1..rho6, or const:<c>.
    #[arg(long, default_value = "rho1")]
    rho: StandardCoefficient,

    /// Polynomial degree k.
    #[arg(long, default_value_t = 1)]
    degree: usize,

    /// Subdivisions per side, comma separated and increasing.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    meshes: Vec<usize>,

    /// Newton stops when the successive error falls below this.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, default_value_t = 100)]
    max_iters: usize,

    #[arg(long, value_enum, default_value = "md")]
    format: Format,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Plot data file; defaults to `<out>.plot.dat` when --out is given.
    #[arg(long)]
    plot: Option<PathBuf>,

    /// Initial guess: linear or zero.
    #[arg(long, default_value = "linear")]
    init: InitialGuess,

    /// Successive-error norm: l2 or coeff.
    #[arg(long, default_value = "l2")]
    stop_norm: StopNorm,

    /// Halve Newton steps that do not reduce the residual.
    #[arg(long)]
    line_search: bool,

    /// Recorded in the report metadata.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn configure_threads() -> Result<(), CliError> {
    // The sparse factorization runs single-threaded so that results do not
    // depend on scheduling; assembly and postprocessing use rayon.
    faer::set_global_parallelism(faer::Par::Seq);
    let Ok(value) = std::env::var("SDG_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SDG_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(args: Args) -> Result<bool, CliError> {
    configure_threads()?;
    let config = StudyConfig {
        solution: args.solution,
        coefficient: args.rho,
        degree: args.degree,
        meshes: args.meshes,
        newton: NewtonConfig {
            tolerance: args.tol,
            max_iterations: args.max_iters,
            initial_guess: args.init,
            stop_norm: args.stop_norm,
            line_search: args.line_search,
            ..NewtonConfig::default()
        },
        seed: args.seed,
    };
    let report = run_study(&config)?;
    emit(&report, args.format, args.out.as_deref())?;
    let plot = args.plot.or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".plot.dat");
            PathBuf::from(s)
        })
    });
    if let Some(path) = plot {
        std::fs::write(&path, plot_data(&report)).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    if let Some(f) = &report.failure {
        eprintln!("sdg: N = {}: {}", f.n, f.message);
    }
    Ok(report.converged())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(e @ CliError::Config(_)) => {
            eprintln!("sdg: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("sdg: {e}");
            ExitCode::FAILURE
        }
    }
}
