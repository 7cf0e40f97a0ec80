use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snnfit_cli::config::ExperimentConfig;
use snnfit_cli::run::{self, RUNS_ENV};
use snnfit_cli::CliError;

#[derive(Parser)]
#[command(name = "snnfit", version, about = "Fit Izhikevich network connectivity to target firing rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Root directory for run directories.
    #[arg(long, env = RUNS_ENV)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one network and write its raster and rate series.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "ge")]
        g_e: Option<f64>,
        #[arg(long = "gi")]
        g_i: Option<f64>,
        #[arg(long)]
        f: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Simulated duration in ms.
        #[arg(long)]
        duration: Option<usize>,
        /// Also write a raster/rate SVG.
        #[arg(long)]
        svg: bool,
        /// Also write the weight matrix as row,col,weight triplets.
        #[arg(long)]
        dump_weights: bool,
        #[arg(long, hide = true)]
        no_noise: bool,
    },
    /// Run every study in the config under every seed.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild fronts, summaries and plots of an optimization run.
    Front {
        /// Run directory written by `optimize`.
        run_dir: PathBuf,
        /// Use this generation instead of the last.
        #[arg(long)]
        generation: Option<usize>,
    },
}

fn load(common: &Common, default: impl FnOnce() -> ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default(),
    };
    if let Some(seed) = common.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            common,
            g_e,
            g_i,
            f,
            mu,
            duration,
            svg,
            dump_weights,
            no_noise,
        } => {
            let mut config = load(&common, ExperimentConfig::simulate_default)?;
            let sim = &mut config.simulate;
            sim.g_e = g_e.unwrap_or(sim.g_e);
            sim.g_i = g_i.unwrap_or(sim.g_i);
            sim.f = f.unwrap_or(sim.f);
            sim.mu = mu.unwrap_or(sim.mu);
            sim.svg |= svg;
            sim.dump_weights |= dump_weights;
            if no_noise {
                sim.noise = false;
            }
            if let Some(d) = duration {
                config.network.duration = d;
            }
            let root = common.out.clone().unwrap_or_else(run::default_root);
            let out = run::simulate(&config, &root, common.jobs)?;
            println!("{}", out.dir.display());
        }
        Command::Optimize { common } => {
            if common.config.is_none() {
                return Err(CliError::Config("optimize needs --config".into()));
            }
            let config = load(&common, ExperimentConfig::simulate_default)?;
            let root = common.out.clone().unwrap_or_else(run::default_root);
            let out = run::optimize(&config, &root, common.jobs)?;
            println!("{}", out.dir.display());
        }
        Command::Front { run_dir, generation } => {
            for path in run::front(&run_dir, generation)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("snnfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
