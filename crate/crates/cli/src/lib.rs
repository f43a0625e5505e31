//! Command-line driver for the `dnls-core` experiments.
//!
//! Every run resolves its configuration (file, then flags), writes outputs
//! atomically into the output directory and keeps `manifest.json` there up to
//! date with the resolved config, seeds and SHA-256 digests of all outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{resolve, Format, Overrides, Resolved, Validate};
use error::{CliError, CliResult};
use output::Run;

#[derive(Debug, Parser)]
#[command(
    name = "dnls",
    version,
    about = "Discrete NLS solitons, Gibbs sampling and stochastic dynamics"
)]
pub struct Cli {
    /// TOML or JSON configuration file (JSON by `.json` extension).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; every chain, trajectory and restart derives its stream from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SetArgs {
    /// Set a key of the subcommand block, e.g. `--set m=25 --set sde.beta=inf`.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the stochastic dynamics.
    Simulate(SetArgs),
    /// Metropolis sampling of the Gibbs measure.
    Sample(SetArgs),
    /// Continuous soliton parameters and sampled profile.
    Soliton(SetArgs),
    /// Discrete soliton by constrained minimization.
    SolitonDiscrete(SetArgs),
    /// Small-gradient large-deviation estimates and bounds.
    Ldtest(SetArgs),
    /// Energy-window concentration of the Gibbs measure.
    Concentrate(SetArgs),
    /// Scan of the discrete Gagliardo-Nirenberg ratio.
    Gncheck(SetArgs),
    /// Lie-algebra rank of the noise and drift fields.
    Rankcheck(SetArgs),
    /// Phase- and translation-invariant H1 distance between two profiles.
    Distance(SetArgs),
    /// Probability of being within eps of the soliton as n grows.
    Headline(SetArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Sample(_) => "sample",
            Command::Soliton(_) => "soliton",
            Command::SolitonDiscrete(_) => "soliton-discrete",
            Command::Ldtest(_) => "ldtest",
            Command::Concentrate(_) => "concentrate",
            Command::Gncheck(_) => "gncheck",
            Command::Rankcheck(_) => "rankcheck",
            Command::Distance(_) => "distance",
            Command::Headline(_) => "headline",
        }
    }

    fn set_args(&self) -> &SetArgs {
        match self {
            Command::Simulate(a)
            | Command::Sample(a)
            | Command::Soliton(a)
            | Command::SolitonDiscrete(a)
            | Command::Ldtest(a)
            | Command::Concentrate(a)
            | Command::Gncheck(a)
            | Command::Rankcheck(a)
            | Command::Distance(a)
            | Command::Headline(a) => a,
        }
    }
}

fn execute<T, F>(name: &str, ov: &Overrides, body: F) -> CliResult<()>
where
    T: DeserializeOwned + Serialize + Validate,
    F: FnOnce(&mut Run, &T, u64) -> CliResult<()> + Send,
    T: Sync,
{
    let resolved: Resolved<T> = resolve(name, ov)?;
    let snapshot = serde_json::to_value(&resolved).map_err(|e| CliError::Other(e.to_string()))?;
    let mut run = Run::start(&resolved.global.out, resolved.global.format, name, snapshot)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = resolved.global.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Other(e.to_string()))?;
    let seed = resolved.global.seed;
    let outcome = pool.install(|| body(&mut run, &resolved.params, seed));
    run.finish(&outcome)?;
    outcome
}

/// Run one parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let ov = Overrides {
        config: cli.config,
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out,
        format: cli.format,
        set: cli.command.set_args().set.clone(),
    };
    let name = cli.command.name();
    use commands as c;
    match cli.command {
        Command::Simulate(_) => execute(name, &ov, c::simulate),
        Command::Sample(_) => execute(name, &ov, c::sample),
        Command::Soliton(_) => execute(name, &ov, |r, p, _| c::soliton(r, p)),
        Command::SolitonDiscrete(_) => execute(name, &ov, c::soliton_discrete),
        Command::Ldtest(_) => execute(name, &ov, c::ldtest),
        Command::Concentrate(_) => execute(name, &ov, c::concentrate),
        Command::Gncheck(_) => execute(name, &ov, |r, p, _| c::gncheck(r, p)),
        Command::Rankcheck(_) => execute(name, &ov, c::rankcheck),
        Command::Distance(_) => execute(name, &ov, |r, p, _| c::distance(r, p)),
        Command::Headline(_) => execute(name, &ov, c::headline),
    }
}
