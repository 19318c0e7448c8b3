//! `conicscan` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O or model parse failure, 2 numerical failure,
//! 3 unmet precondition, 64 usage error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conicscan::Error;

pub const EXIT_IO: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "conicscan", version, about = "Locate, classify and count band crossings of Hermitian families")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "CONICSCAN_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by every model-driven subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model file, or `builtin:NAME`.
    #[arg(long)]
    pub model: String,
    /// Output directory for reports.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Coarse scan grid, `N` or `N1,N2,N3`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
    /// Stop refinement once the pair gap is below this value.
    #[arg(long)]
    pub refine_tol: Option<f64>,
    /// Seed of every random draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Band index `n` of the pair `(n, n + 1)`; defaults to the model's own.
    #[arg(long)]
    pub band: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find crossings of bands `n`, `n + 1` and classify them.
    Scan(Common),
    /// Scan, then extract cone data and chirality at each conical crossing.
    Classify(Common),
    /// Chern numbers of slices `s = const`.
    Chern {
        #[command(flatten)]
        common: Common,
        /// Slice positions; defaults to both ends of the first axis.
        #[arg(long = "s", value_delimiter = ',', allow_hyphen_values = true)]
        slices: Vec<f64>,
    },
    /// Compare Chern jumps, chirality sums and the wall spectral flow of a homotopy.
    #[command(name = "verify-theorem3")]
    VerifyTheorem3 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wall: WallArgs,
        /// Skip the domain-wall count.
        #[arg(long)]
        no_flow: bool,
    },
    /// Draw a small perturbation that makes every crossing conical.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PerturbKind::Shift)]
        kind: PerturbKind,
        /// Size bound of the perturbation.
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        /// Bump centre `a,b,c`; defaults to the first non-conical crossing.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Vec<f64>,
        /// Bump radius.
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
    },
    /// Domain-wall spectral flow and, optionally, a wavepacket comparison.
    Adiabatic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        wall: WallArgs,
        /// Also compare a wall wavepacket with the Dirac model of the first cone.
        #[arg(long)]
        wavepacket: bool,
        /// Packet width in rescaled units.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Final rescaled time.
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Sampled times after zero.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Built-in models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
}

#[derive(Args, Debug, Clone)]
pub struct WallArgs {
    /// Wall rate.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Cylinder width in sites; defaults to `max(40, 2 / delta)`.
    #[arg(long)]
    pub width: Option<usize>,
    /// Number of xi1 samples.
    #[arg(long, default_value_t = 64)]
    pub k1: usize,
}

impl WallArgs {
    pub fn resolved_width(&self) -> usize {
        self.width
            .unwrap_or_else(|| 40usize.max((2.0 / self.delta).ceil() as usize))
    }
}

#[derive(Subcommand, Debug)]
enum ModelsAction {
    /// List built-in model names.
    List,
    /// Print the JSON definition of a built-in model.
    Show { name: String },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbKind {
    /// Constant Hermitian shift avoiding higher multiplicities.
    Shift,
    /// Constant Pauli shift of a two-band family.
    Pauli,
    /// Localized bump in the pair frame.
    Bump,
}

fn parse_grid(text: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad grid entry {p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let grid = match parts.as_slice() {
        [n] => [*n; 3],
        [a, b, c] => [*a, *b, *c],
        _ => return Err("grid takes one or three comma-separated counts".into()),
    };
    if grid.iter().any(|&g| g < 2) {
        return Err("grid counts must be at least 2".into());
    }
    Ok(grid)
}

/// Exit code of a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
        Error::Input(_) => EXIT_USAGE,
        e if e.is_precondition() => EXIT_PRECONDITION,
        _ => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let code = match cli.command {
        Command::Scan(c) => commands::scan(&c),
        Command::Classify(c) => commands::classify(&c),
        Command::Chern { common, slices } => commands::chern(&common, &slices),
        Command::VerifyTheorem3 { common, wall, no_flow } => commands::verify(&common, &wall, no_flow),
        Command::Perturb {
            common,
            kind,
            eps,
            center,
            radius,
        } => commands::perturb(&common, kind, eps, &center, radius),
        Command::Adiabatic {
            common,
            wall,
            wavepacket,
            sigma,
            horizon,
            samples,
        } => commands::adiabatic(&common, &wall, wavepacket.then_some((sigma, horizon, samples))),
        Command::Models { action } => match action {
            ModelsAction::List => commands::models_list(),
            ModelsAction::Show { name } => commands::models_show(&name),
        },
    };
    ExitCode::from(code)
}
