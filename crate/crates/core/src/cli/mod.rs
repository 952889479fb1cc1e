//! Command-line front end: `digitize`, `estimate`, `converge` and
//! `cell-dump`.
//!
//! Every report echoes the configuration that produced it. Reports contain
//! no timing unless `--timing` is given, so identical inputs produce
//! identical bytes at any thread count.

mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use run::{
    cell_dump_report, converge_tables, digitize_files, estimate_report, log_log_slope, ConvergeOutput,
    EstimateConfig, InputSpec, Mode,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "vorotens", version, about = "Minkowski tensor estimation from point samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Digitize a reference shape on a cubic lattice.
    Digitize(DigitizeArgs),
    /// Estimate Minkowski tensors from a sample or a digitized shape.
    Estimate(EstimateArgs),
    /// Run estimation over a sweep of lattice spacings and fit convergence
    /// rates.
    Converge(ConvergeArgs),
    /// Dump one restricted Voronoi cell and its moments as JSON.
    CellDump(CellDumpArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Shape JSON file (or inline JSON starting with `{`).
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    pub shape: Option<String>,
    /// Sample JSON file, or a PBM file with its header at `<path>.json`.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Lattice spacing(s) for digitizing `--shape`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Rank of the position part.
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    /// Rank of the normal part.
    #[arg(long, default_value_t = 0)]
    pub s: u32,
    /// Radii, strictly increasing.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "auto_radii")]
    pub radii: Vec<f64>,
    /// Choose radii geometrically in [0.3β, 0.8β], β = min(reach, cap).
    #[arg(long)]
    pub auto_radii: bool,
    /// Upper bound β for automatic radii.
    #[arg(long, default_value_t = crate::estimators::DEFAULT_RADIUS_CAP)]
    pub radius_cap: f64,
    /// Declared reach of the sampled set; radii must stay below it.
    #[arg(long)]
    pub reach: Option<f64>,
    /// Region of interest as JSON (or `@file`).
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// Monte Carlo samples per cell.
    #[arg(long, default_value_t = 100_000)]
    pub mc_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degree cap of the exact moment backend.
    #[arg(long, default_value_t = crate::cells::DEFAULT_MAX_DEGREE)]
    pub max_degree: u32,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Sum over lattice-boundary sites only.
    #[arg(long, conflicts_with_all = ["shell", "reduced"])]
    pub refined: bool,
    /// Shell measures `V_R - V_{R/2}` (needed for direction caps).
    #[arg(long, conflicts_with = "reduced")]
    pub shell: bool,
    /// Subtract the lattice volume tensor and use one radius fewer.
    #[arg(long)]
    pub reduced: bool,
    /// Accept more radii than unknowns and solve in the least-squares sense.
    #[arg(long)]
    pub least_squares: bool,
    /// Record wall-clock times in the report.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub estimate: EstimateArgs,
    /// Summary JSON path (default: next to `--out`, else standard error).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DigitizeArgs {
    /// Shape JSON file (or inline JSON starting with `{`).
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub a: f64,
    /// Window padding around the shape's bounding box (default `2a`).
    #[arg(long)]
    pub pad: Option<f64>,
    /// Sample JSON output (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a PBM image, with its header at `<path>.json`.
    #[arg(long)]
    pub pbm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CellDumpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Coordinates of the site (must be a sample point).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub site: Vec<f64>,
    #[arg(long)]
    pub radius: f64,
    /// Highest moment degree to include.
    #[arg(long, default_value_t = 2)]
    pub s_max: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_cli(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Digitize(args) => {
            let shape = run::read_shape(&args.shape)?;
            let pad = args.pad.unwrap_or(2.0 * args.a);
            let (json, pbm) = digitize_files(&shape, args.a, pad, args.pbm.is_some())?;
            write_or_print(args.out.as_ref(), &json)?;
            if let (Some(path), Some((image, header))) = (args.pbm, pbm) {
                std::fs::write(&path, image)?;
                std::fs::write(sidecar(&path), header)?;
            }
            Ok(())
        }
        Command::Estimate(args) => {
            let cfg = EstimateConfig::from_args(&args)?;
            let report = with_threads(args.threads, || estimate_report(&cfg, args.timing))?;
            write_or_print(args.out.as_ref(), &report)
        }
        Command::Converge(args) => {
            let est = &args.estimate;
            let cfg = EstimateConfig::from_args(est)?;
            let out = with_threads(est.threads, || converge_tables(&cfg, est.timing))?;
            write_or_print(est.out.as_ref(), &out.csv)?;
            let summary_path = args
                .summary
                .clone()
                .or_else(|| est.out.as_ref().map(|p| p.with_extension("summary.json")));
            match summary_path {
                Some(p) => std::fs::write(p, &out.summary)?,
                None => eprint!("{}", out.summary),
            }
            Ok(())
        }
        Command::CellDump(args) => {
            let input = InputSpec::from_args(&args.input)?;
            let text = cell_dump_report(&input, &args.site, args.radius, args.s_max)?;
            write_or_print(args.out.as_ref(), &text)
        }
    }
}

/// Header path for a PBM image.
pub fn sidecar(path: &std::path::Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start thread pool: {e}")))?
            .install(f),
    }
}
