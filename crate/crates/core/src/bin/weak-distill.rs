use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weak_distill::harness::{write_bounds, write_experiment, ExperimentConfig, Method};
use weak_distill::{Error, ScenarioParams};

#[derive(Parser)]
#[command(
    name = "weak-distill",
    version,
    about = "Weak resource distillation experiments"
)]
struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep sample budgets and write per-trial and mean TVD tables.
    Run(ConfigArgs),
    /// Write implied-accuracy bound curves and full bound reports.
    Bounds(ConfigArgs),
    /// Scenario utilities.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Print or save a seeded scenario instance as JSON.
    Export {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config file plus per-key overrides.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    sample_grid: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<f64>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, Error> {
    match s {
        "rejection" => Ok(Method::Rejection),
        "estimation" => Ok(Method::Estimation),
        other => Err(Error::Config(format!("unknown method '{other}'"))),
    }
}

impl ConfigArgs {
    fn load(self, threads: Option<usize>) -> Result<ExperimentConfig, Error> {
        let mut cfg: ExperimentConfig = toml::from_str(&fs::read_to_string(&self.config)?)
            .map_err(|e| Error::Config(format!("{}: {e}", self.config.display())))?;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.methods {
            cfg.methods = v
                .iter()
                .map(|m| parse_method(m))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = self.sample_grid {
            cfg.sample_grid = v;
        }
        if let Some(v) = self.epsilon_grid {
            cfg.epsilon_grid = Some(v);
        }
        if let Some(v) = self.output_dir {
            cfg.output_dir = v;
        }
        if threads.is_some() {
            cfg.threads = threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let paths = write_experiment(&args.load(cli.threads)?)?;
            println!("{}", paths.raw.display());
            println!("{}", paths.aggregate.display());
        }
        Command::Bounds(args) => {
            let paths = write_bounds(&args.load(cli.threads)?)?;
            println!("{}", paths.bounds.display());
            println!("{}", paths.report.display());
        }
        Command::Scenario {
            command: ScenarioCommand::Export { name, seed, out },
        } => {
            let json = ScenarioParams::default_for(&name)?.build(seed)?.to_json()?;
            match out {
                Some(path) => fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
