use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cra_photon_cli::{
    run_scenario, scenarios::with_threads, CliResult, ScenarioConfig, ScenarioKind,
};

#[derive(Parser)]
#[command(
    name = "cra-photon",
    version,
    about = "Photon scattering off an emitter in a coupled-resonator array"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-photon bound-state energies and residues.
    BoundStates(Common),
    /// Reflection and transmission off a bound state across the band.
    SweepBoundRt(Common),
    /// Real-space breakup wavefunction on a grid.
    BreakupMap(Common),
    /// Two-photon outgoing wavefunction and its correlation slices.
    TwoPhotonCorr(Common),
    /// Three-body bound-state energies and profiles.
    ThreeBody(Common),
    /// Compare against finite-chain diagonalization and the regularized route.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let (kind, common) = match cli.command {
        Command::BoundStates(c) => (ScenarioKind::BoundStates, c),
        Command::SweepBoundRt(c) => (ScenarioKind::BoundRtSweep, c),
        Command::BreakupMap(c) => (ScenarioKind::BreakupMap, c),
        Command::TwoPhotonCorr(c) => (ScenarioKind::TwoPhotonCorr, c),
        Command::ThreeBody(c) => (ScenarioKind::ThreeBody, c),
        Command::OracleCheck(c) => (ScenarioKind::OracleCheck, c),
    };
    let config = ScenarioConfig::load(&common.config)?;
    let out = config.output_dir(common.out.as_deref())?;
    with_threads(common.threads, || run_scenario(kind, &config, &out))?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
