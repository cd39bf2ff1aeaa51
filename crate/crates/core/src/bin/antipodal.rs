use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use antipodal::cli::{self, MapSource, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "antipodal", about = "Antipodal coincidences of polynomial maps S^2 -> R^2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Built-in scenario name (see `list-scenarios`)
    #[arg(long, conflicts_with = "map", required_unless_present = "map")]
    scenario: Option<String>,
    /// Map or family JSON file
    #[arg(long)]
    map: Option<PathBuf>,
    /// Seed for `random-odd`
    #[arg(long)]
    seed: Option<u64>,
    /// Degree for `random-odd`
    #[arg(long)]
    degree: Option<u32>,
    /// SolverConfig JSON file
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Input {
    fn source(&self) -> MapSource {
        match (&self.scenario, &self.map) {
            (_, Some(path)) => MapSource::File(path.clone()),
            (Some(name), None) => MapSource::Scenario {
                name: name.clone(),
                seed: self.seed,
                degree: self.degree,
            },
            (None, None) => unreachable!("clap requires one of --scenario/--map"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one map and write the coincidence set as JSON
    Solve {
        #[command(flatten)]
        input: Input,
        /// Family parameter (defaults to the family's own epsilon)
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        /// Output file (defaults to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the family parameter and write trace.csv and events.json
    Sweep {
        #[command(flatten)]
        input: Input,
        /// Parameter range
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
        eps: Vec<f64>,
        /// Number of grid points, endpoints included
        #[arg(long)]
        steps: usize,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check parity on seeded random odd fields
    Verify {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        degree: u32,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// List built-in scenarios
    ListScenarios,
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_FAILURE as u8 } else { 0 });
        }
    };
    let (mut stdout, mut stderr) = (io::stdout().lock(), io::stderr());
    let code = match parsed.command {
        Command::ListScenarios => cli::run_list(&mut stdout),
        Command::Solve { input, epsilon, out } => match cli::load_config(input.config.as_deref()) {
            Ok(cfg) => cli::run_solve(&input.source(), epsilon, &cfg, out.as_deref(), &mut stdout, &mut stderr),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Command::Sweep { input, eps, steps, out } => match cli::load_config(input.config.as_deref()) {
            Ok(cfg) => cli::run_sweep(
                &input.source(),
                eps[0],
                eps[1],
                steps,
                &cfg,
                &out,
                &mut stdout,
                &mut stderr,
            ),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Command::Verify {
            trials,
            seed,
            degree,
            config,
        } => match cli::load_config(config.as_deref()) {
            Ok(cfg) => cli::run_verify(trials, seed, degree, &cfg, &mut stdout, &mut stderr),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
    };
    ExitCode::from(code as u8)
}
