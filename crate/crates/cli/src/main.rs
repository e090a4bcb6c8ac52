//! `kfs`: command-line driver for the Kerr-feedback simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 resource guard. Failures are reported on stderr as
//! `error[<category>]: <message>`.

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "kfs", version = kfs_core::CODE_TAG, about = "Driven Kerr cavity with homodyne feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation; writes timeseries.csv, final_state.json
    /// and, if enabled, snapshots/.
    Evolve {
        /// Run configuration (JSON).
        config: PathBuf,
    },
    /// Solve for the steady state; writes steady_state.json,
    /// observables.json and steady_wigner.csv.
    Steady {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Wigner function and integrated negativity of a state file.
    Wigner {
        /// State file (JSON, dense-row-major).
        state: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Where to write the x,p,w field.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run a parameter sweep spec; writes the CSV plus its .json and
    /// .timing.csv companions.
    Sweep {
        spec: PathBuf,
        /// Worker threads; defaults to all cores.
        #[arg(long, env = "KFS_THREADS")]
        workers: Option<usize>,
    },
    /// Steady-state negativity against the Fock cutoff.
    Convergence {
        config: PathBuf,
        /// Increasing cutoffs to try.
        #[arg(long, value_delimiter = ',', default_values_t = [40, 60, 80, 100])]
        cutoffs: Vec<usize>,
    },
    /// Interaction strength of a polariton trap, or the effective
    /// detection efficiency.
    Estimate(EstimateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Evolve,
}

#[derive(Args)]
struct GridArgs {
    /// x range; the grid is inferred from the state when no range is given.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    x: Option<Vec<f64>>,
    /// p range; defaults to the x range.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    p: Option<Vec<f64>>,
    /// Points per axis for an explicit range.
    #[arg(long, default_value_t = 256)]
    points: usize,
}

#[derive(Args)]
struct EstimateArgs {
    /// Exciton Bohr radius in nm.
    #[arg(long, default_value_t = 10.0)]
    bohr_radius: f64,
    /// Exciton Hopfield fraction |X|.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    hopfield: f64,
    /// Relative permittivity.
    #[arg(long, default_value_t = 13.0)]
    epsilon: f64,
    /// Trap area in square micrometres (default: 1 um diameter disc).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    trap_area: f64,
    /// Polariton lifetime in ps; also prints U in units of the linewidth.
    #[arg(long)]
    lifetime_ps: Option<f64>,
    /// Detector quantum efficiency; selects the efficiency estimate.
    #[arg(long, requires = "reflectance")]
    eta0: Option<f64>,
    /// Fraction of the output sent to the homodyne detector.
    #[arg(long, requires = "eta0")]
    reflectance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Evolve { config } => commands::evolve(&config),
        Command::Steady { config, method } => {
            commands::steady(&config, matches!(method, Method::Evolve))
        }
        Command::Wigner {
            state,
            grid,
            output,
        } => commands::wigner(&state, grid.x, grid.p, grid.points, output.as_deref()),
        Command::Sweep { spec, workers } => commands::sweep(&spec, workers),
        Command::Convergence { config, cutoffs } => commands::convergence(&config, &cutoffs),
        Command::Estimate(a) => match (a.eta0, a.reflectance) {
            (Some(eta0), Some(r)) => commands::eta(eta0, r),
            _ => commands::interaction(
                kfs_core::analysis::PolaritonParams {
                    bohr_radius: a.bohr_radius,
                    hopfield_x: a.hopfield,
                    permittivity: a.epsilon,
                    trap_area: a.trap_area,
                },
                a.lifetime_ps,
            ),
        },
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}
