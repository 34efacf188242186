//! `fraclap`: kernel tables, Green-representation solves and the check suite
//! for the fractional Laplacian.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical failure.

mod config;
mod kernel;
mod output;
mod solve;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraclap::verify::VerifyConfig;

use config::{FileConfig, Format, Mode, Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    ChecksFailed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ChecksFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
            CliError::ChecksFailed => f.write_str("one or more checks failed"),
        }
    }
}

impl From<fraclap::Error> for CliError {
    fn from(e: fraclap::Error) -> Self {
        match e {
            fraclap::Error::ToleranceNotMet { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fraclap", version, about = "Kernels, Green-representation solvers and estimate checks for the fractional Laplacian")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for sampled points [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reproducible output: fixed reduction order, no timings (default)
    #[arg(long, global = true, conflicts_with = "fast")]
    strict: bool,
    /// Record wall-clock timings in reports
    #[arg(long, global = true)]
    fast: bool,
    /// Worker threads [default: all cores]
    #[arg(long, global = true, env = "FRACLAP_THREADS")]
    threads: Option<usize>,
    /// Relative quadrature tolerance [default: 1e-8]
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Absolute quadrature tolerance [default: 1e-12]
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Output format; kernel tables default to csv, check reports to json
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (kernel: table, default stdout; solve: grid file, default solution.txt)
    #[arg(long, short = 'o', global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a kernel at point pairs, one table row per pair
    #[command(after_help = KERNEL_HELP)]
    Kernel(KernelCmd),
    /// Solve a Dirichlet problem and write the grid solution and a JSON report
    #[command(after_help = SOLVE_HELP)]
    Solve(SolveCmd),
    /// Run checks by id (or all) and write one report per check
    #[command(after_help = verify::check_list())]
    Verify(VerifyCmd),
}

const KERNEL_HELP: &str = "Rows hold x then y (2N numbers), or r t for H. Points come inline or from \
--points, one row per line, separated by spaces or commas, # starts a comment.\n\
Rows on the diagonal are flagged `diagonal` (value inf) and do not change the exit code.\n\
Related checks: poisson-normalization, green-symmetry, reflection-inequalities, h-monotonicity, \
green-limit, kernel-bounds.\n\
Example: fraclap kernel green-ball --dim 1 --s 0.5 0 0.5";

const SOLVE_HELP: &str = "Writes the grid (text table, or CSV with --format csv) to --output and \
the run report to <output>.report.json, each through a temporary file and a rename. \
A quadrature failure exits with 3 after writing the partial report.\n\
Related checks: ball-torsion, boundary-estimate, holder, strip-mass, liouville, monotonicity.\n\
Example: fraclap solve ball --dim 1 --s 0.5 --f 1 -o torsion.txt";

#[derive(Args, Debug)]
struct ParamArgs {
    /// Dimension N
    #[arg(long)]
    dim: Option<usize>,
    /// Order s in (0, 1)
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Args, Debug)]
struct KernelCmd {
    #[arg(value_enum)]
    target: kernel::Target,
    #[command(flatten)]
    params: ParamArgs,
    /// Ball radius R
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// File of point rows
    #[arg(long, value_name = "FILE")]
    points: Option<PathBuf>,
    /// Inline point rows, flattened
    #[arg(allow_negative_numbers = true, value_name = "VALUES")]
    values: Vec<f64>,
}

#[derive(Args, Debug)]
struct SolveCmd {
    #[arg(value_enum)]
    problem: solve::Problem,
    #[command(flatten)]
    params: ParamArgs,
    /// Ball radius [default: 1]
    #[arg(long)]
    radius: Option<f64>,
    /// Grid nodes per axis for the ball [default: 41, 21, 9 for N = 1, 2, >= 3]
    #[arg(long)]
    nodes: Option<usize>,
    /// Constant right-hand side [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    f: Option<f64>,
    /// Constant exterior data for the ball [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Slab width carrying f for halfspace-linear [default: 1]
    #[arg(long)]
    slab: Option<f64>,
    /// Box depth in x_1 [default: 2 slab for halfspace-linear, 4 otherwise]
    #[arg(long)]
    depth: Option<f64>,
    /// Lateral half width of the Picard box [default: 4]
    #[arg(long)]
    half_width: Option<f64>,
    /// Cells along x_1 [default: 40; Picard boxes 80, 40, 16 for N = 1, 2, 3]
    #[arg(long)]
    normal_cells: Option<usize>,
    /// Lateral cells of the Picard box [default: 80 for N = 2, 32 for N = 3]
    #[arg(long)]
    lateral_cells: Option<usize>,
    /// Exponent of the power nonlinearity u^q (halfspace-semilinear)
    #[arg(long)]
    q: Option<f64>,
    /// Constant Picard start [default: 0.01]
    #[arg(long)]
    u0: Option<f64>,
    /// Upper end of the range on which u^q is trusted [default: 1000]
    #[arg(long)]
    range_max: Option<f64>,
    /// Picard iteration budget [default: 200]
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyCmd {
    /// Check id, or `all`
    id: String,
    /// Run the check for this (N, s) only
    #[command(flatten)]
    params: ParamArgs,
    /// Directory for the report files [default: reports]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mode = if g.fast {
        Some(Mode::Fast)
    } else if g.strict {
        Some(Mode::Strict)
    } else {
        None
    };
    let flags = Overrides {
        seed: g.seed,
        mode,
        threads: g.threads,
        format: g.format,
        output: g.output.clone(),
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
    };
    let cfg = RunConfig::resolve(&file, &flags)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Kernel(cmd) => kernel::run(kernel::KernelArgs {
            target: cmd.target,
            params: config::require_params(cmd.params.dim, cmd.params.s, &file.params)?,
            radius: cmd.radius,
            points: cmd.points.as_deref(),
            values: &cmd.values,
            format: cfg.format.unwrap_or(Format::Csv),
            output: cfg.output.as_deref(),
        }),
        Command::Solve(cmd) => {
            let params = config::require_params(cmd.params.dim, cmd.params.s, &file.params)?;
            let opts = solve::SolveOptions {
                radius: cmd.radius,
                nodes: cmd.nodes,
                f: cmd.f,
                g: cmd.g,
                slab: cmd.slab,
                depth: cmd.depth,
                half_width: cmd.half_width,
                normal_cells: cmd.normal_cells,
                lateral_cells: cmd.lateral_cells,
                q: cmd.q,
                u0: cmd.u0,
                range_max: cmd.range_max,
                max_iter: cmd.max_iter,
            }
            .merged(&file.solve);
            let output = cfg.output.clone().unwrap_or_else(|| {
                PathBuf::from(if cfg.format == Some(Format::Csv) { "solution.csv" } else { "solution.txt" })
            });
            let outcome = solve::solve(cmd.problem, &params, &opts, cfg.seed, &cfg.spec, cfg.format)?;
            let report_path = solve::write(&outcome, &output)?;
            if outcome.field.is_some() {
                eprintln!("wrote {} and {}", output.display(), report_path.display());
            } else {
                eprintln!("wrote {}", report_path.display());
            }
            outcome.error.map_or(Ok(()), Err)
        }
        Command::Verify(cmd) => {
            let vc = VerifyConfig {
                seed: cfg.seed,
                spec: cfg.spec,
                params: config::params(cmd.params.dim, cmd.params.s, &file.params)?,
                record_time: cfg.mode == Mode::Fast,
            };
            let out_dir = cmd.out_dir.or(file.verify.out_dir).unwrap_or_else(|| PathBuf::from("reports"));
            verify::run(&cmd.id, &vc, &out_dir, cfg.format.unwrap_or(Format::Json))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::ChecksFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
