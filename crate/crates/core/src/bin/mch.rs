//! `mch`: spectra, thermodynamics and wave functions from a run config.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mc_hamiltonian::config::{Route, RunConfig};
use mc_hamiltonian::report::{self, OutputFile};
use mc_hamiltonian::reproduce::{self, Target};
use mc_hamiltonian::Result;

#[derive(Parser)]
#[command(name = "mch", version, about = "Effective Hamiltonians from Euclidean transition matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML, or an output file with an embedded config).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `sampler.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `output.dir`, then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `sampler.route`.
    #[arg(long)]
    route: Option<Route>,
}

#[derive(Subcommand)]
enum Command {
    /// Energies of the effective Hamiltonian.
    Spectrum(Common),
    /// Z, U and C over the configured β grid.
    Thermo(Common),
    /// Box amplitudes of selected eigenstates.
    Wavefn {
        #[command(flatten)]
        common: Common,
        /// State indices, e.g. `--states 0,1,2`; defaults to `output.states`.
        #[arg(long, value_delimiter = ',')]
        states: Vec<usize>,
    },
    /// Regenerate a reference table or figure data set.
    Reproduce {
        target: Target,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.sampler.seed = seed;
    }
    if let Some(route) = common.route {
        cfg.sampler.route = route;
    }
    cfg.validate()?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(PathBuf, Vec<OutputFile>)> {
    match cli.command {
        Command::Spectrum(common) => {
            let (cfg, out) = load(&common)?;
            Ok((out, report::run_spectrum(&cfg)?))
        }
        Command::Thermo(common) => {
            let (cfg, out) = load(&common)?;
            Ok((out, report::run_thermo(&cfg)?))
        }
        Command::Wavefn { common, states } => {
            let (cfg, out) = load(&common)?;
            Ok((out, report::run_wavefunctions(&cfg, &states)?))
        }
        Command::Reproduce { target, seed, out } => Ok((out, reproduce::reproduce(target, seed)?)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(dir, files)| {
        report::write_all(&dir, &files)?;
        Ok((dir, files))
    });
    match result {
        Ok((dir, files)) => {
            for f in &files {
                println!("{}", dir.join(&f.name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
