use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cemm_bench::commands::{cmd_checks, cmd_compare, cmd_fit, cmd_simulate};
use cemm_bench::config::{parse_seed_list, ExperimentSpec, FileConfig};
use cemm_bench::HarnessError;

/// Simulate Gaussian mixtures and compare EM, CEMM and SAGE convergence.
#[derive(Debug, Parser)]
#[command(name = "cemm-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw datasets from a benchmark scenario and write them as CSV.
    Simulate(ExperimentArgs),
    /// Fit one dataset with one algorithm and write its trajectory.
    Fit(ExperimentArgs),
    /// Run several algorithms over several seeds and summarize cycle counts.
    Compare(ExperimentArgs),
    /// Run the invariant check suite.
    Checks,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML file with default values for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark scenario: well_separated or overlapping.
    #[arg(long)]
    scenario: Option<String>,
    /// Dataset CSV to fit instead of a simulated scenario.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Algorithm(s): em, cemm, sage (comma separated).
    #[arg(long, alias = "algorithms", value_delimiter = ',')]
    algorithm: Option<Vec<String>>,
    /// Starting point: moment or explicit.
    #[arg(long)]
    init: Option<String>,
    /// Component count for the moment start.
    #[arg(long)]
    components: Option<usize>,
    /// Explicit start proportions (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init_p: Option<Vec<f64>>,
    /// Explicit start means (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init_mu: Option<Vec<f64>>,
    /// Explicit start variances (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init_var: Option<Vec<f64>>,
    /// Sample size per simulated dataset.
    #[arg(long)]
    n: Option<usize>,
    /// Seed list, e.g. `1,2,5-8`.
    #[arg(long, alias = "seeds")]
    seed: Option<String>,
    /// Relative tolerance on the change of the modified log-likelihood.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_cycles: Option<usize>,
    /// Variance floor; defaults to 1e-6 · trace(S)/d of the data.
    #[arg(long)]
    variance_floor: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn into_spec(self) -> Result<ExperimentSpec, HarnessError> {
        let mut file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let seeds = self.seed.as_deref().map(parse_seed_list).transpose()?;
        let flags = FileConfig {
            scenario: self.scenario,
            data: self.data,
            n: self.n,
            seed: None,
            seeds,
            algorithm: None,
            algorithms: self.algorithm,
            init: self.init,
            components: self.components,
            init_p: self.init_p,
            init_mu: self.init_mu,
            init_var: self.init_var,
            tol: self.tol,
            max_cycles: self.max_cycles,
            variance_floor: self.variance_floor,
            out: self.out,
        };
        if flags.scenario.is_some() || flags.data.is_some() {
            file.scenario = None;
            file.data = None;
        }
        ExperimentSpec::from_config(&file.merged_with(flags))
    }
}

fn dispatch(command: Command) -> Result<String, HarnessError> {
    match command {
        Command::Simulate(args) => cmd_simulate(&args.into_spec()?),
        Command::Fit(args) => cmd_fit(&args.into_spec()?),
        Command::Compare(args) => cmd_compare(&args.into_spec()?),
        Command::Checks => cmd_checks(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
