use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simcorr_cli::{
    compare_gold, enumerate, run_experiment, simulate_truth, validate_feed, Artifacts, CliError, ExperimentConfig,
    FeedReport, ModelKind,
};

#[derive(Parser)]
#[command(name = "simcorr", version, about = "Particle filtering with exact partial observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the filter and write summary, heat-map or gold comparison CSVs.
    Run(Overrides),
    /// Simulate a ground truth and its observation feed.
    SimulateTruth(Overrides),
    /// Check a feed file for shape, monotone revelation and presence-only rules.
    ValidateFeed {
        path: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
    },
    /// Compare AR(1) particle marginals with the exact Gaussian posterior.
    CompareGold(Overrides),
    /// Exact invasion occupancy probabilities by enumeration.
    Enumerate(Overrides),
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "ar1" => Ok(ModelKind::Ar1),
        "invasion" => Ok(ModelKind::Invasion),
        other => Err(format!("unknown model `{other}` (expected ar1 or invasion)")),
    }
}

impl Overrides {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), CliError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(n) = self.particles {
            config.particles = n;
        }
        if let Some(scheme) = &self.scheme {
            config.scheme = scheme.clone();
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        let out = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        Ok((config, out))
    }
}

fn write(artifacts: &Artifacts, out: &PathBuf) -> Result<(), CliError> {
    artifacts.write_to(out)?;
    for (name, _) in &artifacts.files {
        println!("wrote {}", out.join(name).display());
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(o) => {
            let (config, out) = o.load()?;
            write(&run_experiment(&config)?, &out)
        }
        Command::SimulateTruth(o) => {
            let (config, out) = o.load()?;
            write(&simulate_truth(&config)?, &out)
        }
        Command::CompareGold(o) => {
            let (config, out) = o.load()?;
            write(&compare_gold(&config)?, &out)
        }
        Command::Enumerate(o) => {
            let (config, out) = o.load()?;
            let (artifacts, log_evidence) = enumerate(&config)?;
            println!("log evidence {log_evidence:.16e}");
            write(&artifacts, &out)
        }
        Command::ValidateFeed { path, model } => match validate_feed(&path, model)? {
            ok @ FeedReport::Ok { .. } => {
                println!("{ok}");
                Ok(())
            }
            FeedReport::Violation(reason) => Err(CliError::Config(format!("violation: {reason}"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
